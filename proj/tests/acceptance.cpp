// Desk-scale acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "horolab/automorphic.hpp"
#include "horolab/cli.hpp"
#include "horolab/decay.hpp"
#include "horolab/diophantine.hpp"
#include "horolab/experiments.hpp"
#include "horolab/measures.hpp"
#include "horolab/modular.hpp"
#include "horolab/oscillatory.hpp"
#include "horolab/parallel.hpp"
#include "horolab/rng.hpp"

using namespace horolab;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> dyadic(int k_first, int k_last) {
  std::vector<double> out;
  for (int k = k_first; k <= k_last; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

// ---- 1 ---------------------------------------------------------------------------

Verdict cvy_threshold() {
  const double bound = measures::cvy_lower_bound(450, 447);
  const double dim = std::log(447.0) / std::log(450.0);
  return {bound > measures::kSpectralThreshold && dim < 0.9992,
          fmt("cvy bound %.10f vs 39/64 = %.6f, dim_H %.10f", bound, measures::kSpectralThreshold, dim)};
}

// ---- 2 ---------------------------------------------------------------------------

measures::FractalMeasure random_measure(Rng& rng) {
  const int b = 2 + static_cast<int>(rng.below(11));  // 2..12
  std::vector<int> digits;
  while (digits.size() < 2) {
    digits.clear();
    for (int d = 0; d < b; ++d) {
      if (rng.uniform() < 0.5) digits.push_back(d);
    }
  }
  std::vector<double> w;
  for (std::size_t i = 0; i < digits.size(); ++i) w.push_back(0.2 + rng.uniform());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return measures::FractalMeasure(b, digits, w, 0.0);
}

// CSV of the 20 comparisons; used again for the determinism check.
std::string fourier_oracle_csv(std::uint64_t seed, bool& all_within, double& worst) {
  constexpr std::size_t kSamples = 1'000'000;
  Rng rng(seed);
  std::ostringstream csv;
  csv.precision(17);
  csv << "base,digits,xi,product_re,product_im,mc_re,mc_im,stderr\n";
  all_within = true;
  worst = 0.0;
  for (int pair = 0; pair < 20; ++pair) {
    const measures::FractalMeasure mu = random_measure(rng);
    const double xi = 100.0 * rng.uniform();
    const measures::MeasureExpr m(mu);
    const Complex exact = measures::fourier_transform(m, xi);
    const auto xs = measures::sample(m, measures::precision_depth(m), kSamples, derive_seed(seed, pair));
    Complex sum = 0.0;
    for (double x : xs) sum += e(xi * x);
    const Complex mean = sum / static_cast<double>(kSamples);
    const double se = std::sqrt(std::max(0.0, 1.0 - std::norm(mean)) / static_cast<double>(kSamples));
    const double dev = std::abs(mean - exact) / se;
    worst = std::max(worst, dev);
    if (dev > 3.0) all_within = false;
    csv << mu.base() << ',' << mu.size() << ',' << xi << ',' << exact.real() << ',' << exact.imag() << ','
        << mean.real() << ',' << mean.imag() << ',' << se << '\n';
  }
  return csv.str();
}

Verdict fourier_oracle() {
  bool ok = false;
  double worst = 0.0;
  fourier_oracle_csv(2024, ok, worst);
  return {ok, fmt("20 pairs, largest deviation %.2f standard errors", worst)};
}

// ---- 3 ---------------------------------------------------------------------------

Verdict refinement_and_shift() {
  const std::vector<measures::FractalMeasure> mus = {
      measures::FractalMeasure(3, {0, 2}),
      measures::FractalMeasure(10, {0, 3, 4, 9}),
      measures::FractalMeasure(450, [] {
        std::vector<int> d(447);
        std::iota(d.begin(), d.end(), 0);
        return d;
      }()),
  };
  double worst_refine = 0.0, worst_shift = 0.0;
  const double x0 = 0.3183098861837907;
  for (const auto& mu : mus) {
    const measures::MeasureExpr m(mu);
    const measures::MeasureExpr shifted = m.shifted(x0);
    const double b = mu.base();
    for (int k = 0; k < 1000; ++k) {
      const double xi = -500.0 + k * (1000.0 / 999.0);
      const Complex v = measures::fourier_transform(m, xi);
      const Complex refined = measures::symbol_g(mu, xi / b) * measures::fourier_transform(m, xi / b);
      worst_refine = std::max(worst_refine, std::abs(v - refined));
      worst_shift = std::max(worst_shift, std::abs(measures::fourier_transform(shifted, xi) - e(xi * x0) * v));
    }
  }
  return {worst_refine <= 1e-10 && worst_shift <= 1e-10,
          fmt("max refinement defect %.2e, max shift defect %.2e", worst_refine, worst_shift)};
}

// ---- 4 ---------------------------------------------------------------------------

Verdict constant_term_identity() {
  const auto raw = modular::parse_test_function("eisenstein:t=1,part=raw");
  const auto& params = *automorphic::eisenstein_params(1.0);
  const auto heights = dyadic(2, 12);
  modular::MuYOptions opts;
  opts.method = modular::Method::Cylinder;
  opts.tol = 1e-8;
  const auto values =
      modular::mu_y_values(measures::parse_measure("leb"), *raw, modular::HorocycleConfig{0.0, 1, 0.25}, heights, opts);
  double worst = 0.0;
  for (const auto& v : values) worst = std::max(worst, std::abs(v.value - automorphic::constant_term(v.y, params)));

  experiments::ExperimentConfig cfg;
  cfg.measure = "leb";
  cfg.test = "eisenstein:t=1";
  cfg.grid = {0.25, 0.5, 11};
  cfg.mu = opts;
  const auto res = experiments::run_equidistribution(cfg);
  const double eta = res.report.exponent;
  return {worst <= 1e-6 && std::abs(eta - 0.5) <= 0.03,
          fmt("max |mu_y - constant term| %.2e, eta %.4f +- %.4f", worst, eta, res.report.exponent_stderr)};
}

// ---- 5 ---------------------------------------------------------------------------

Verdict spectral_gap() {
  const auto phi = modular::parse_test_function("eisenstein:t=1");
  const auto raw = modular::parse_test_function("eisenstein:t=1,part=raw");
  const auto& params = *automorphic::eisenstein_params(1.0);
  const auto report = automorphic::spectral_gap_fit(*phi, dyadic(3, 12));
  double worst = 0.0;
  for (double y : {0.125, 0.03125}) {
    const auto n = std::max<std::size_t>(automorphic::spectral_gap_quadrature(y), 128);
    for (long m = -20; m <= 20; ++m) {
      if (m == 0) continue;
      const Complex numeric = automorphic::horocycle_fourier_coeff(*raw, m, y, n);
      worst = std::max(worst, std::abs(numeric - automorphic::series_coefficient(m, y, params)));
    }
  }
  const bool in_range = report.exponent >= 0.40 && report.exponent <= 0.60;
  return {in_range && worst <= 1e-7, fmt("exponent %.4f +- %.4f (r2 %.3f), coefficient defect %.2e", report.exponent,
                                         report.exponent_stderr, report.r2, worst)};
}

// ---- 6 ---------------------------------------------------------------------------

Verdict truncation_lemma() {
  const auto& params = *automorphic::eisenstein_params(1.0);
  const double a = automorphic::truncation_tail_mass(params, 0.05, 1.2);
  const double b = automorphic::truncation_tail_mass(params, 0.01, 1.2);
  return {a < 1e-6 && b < 1e-12, fmt("tail(0.05) %.3e (< 1e-6), tail(0.01) %.3e (< 1e-12)", a, b)};
}

// ---- 7 ---------------------------------------------------------------------------

const char* const kHeadline[] = {"horolab", "equidist", "--measure", "cantor:450:0..446", "--test", "eisenstein:t=1",
                                 "--ygrid", "0.25:0.5:15", "--budget", "1000000", "--seed", "7"};

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run_cli(std::vector<const char*> argv) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Verdict headline() {
  experiments::ExperimentConfig cfg;
  cfg.measure = "cantor:450:0..446";
  cfg.test = "eisenstein:t=1";
  cfg.grid = {0.25, 0.5, 15};
  cfg.mu.budget = 1'000'000;
  cfg.mu.seed = 7;
  const auto res = experiments::run_equidistribution(cfg);
  const auto& rows = res.report.rows;  // increasing y
  // Decreasing as y -> 0 up to twice the combined Monte Carlo error bars.
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].error > rows[i + 1].error + 2.0 * (rows[i].error_bar + rows[i + 1].error_bar)) decreasing = false;
  }
  const bool ok = res.report.status == ReportStatus::Ok && decreasing && res.report.exponent > 0.05 &&
                  res.report.r2 > 0.9;
  // the CLI must agree and exit 0 exactly when the fit is conclusive
  const CliRun cli = run_cli({std::begin(kHeadline), std::end(kHeadline)});
  const bool cli_ok = (cli.code == cli::kExitOk) == (res.report.status == ReportStatus::Ok);
  return {ok && cli_ok, fmt("eta %.4f +- %.4f, r2 %.3f, decreasing %s, status %s, cli exit %d", res.report.exponent,
                            res.report.exponent_stderr, res.report.r2, decreasing ? "yes" : "no",
                            to_string(res.report.status), cli.code)};
}

// ---- 8 ---------------------------------------------------------------------------

Verdict stationary_phase() {
  const auto w = oscillatory::parse_window("coswin:0,1");
  const auto f2 = oscillatory::parse_phase("poly:0,0,1");
  const auto f3 = oscillatory::parse_phase("poly:0,0,0,1");
  const double xi = 1e4;
  const double fresnel = std::abs(oscillatory::oscillatory_integral(f2, w, xi).value) * std::sqrt(2.0 * xi);
  const double rel = std::abs(fresnel / std::abs(w(0.0)) - 1.0);
  const auto grid = geometric_grid(10.0, std::pow(10.0, 0.25), 13);
  const double b2 = oscillatory::exponent_fit_oscillatory(f2, w, grid).report.exponent;
  const double b3 = oscillatory::exponent_fit_oscillatory(f3, w, grid).report.exponent;
  return {rel <= 0.02 && std::abs(b2 - 0.5) <= 0.05 && std::abs(b3 - 1.0 / 3.0) <= 0.05,
          fmt("Fresnel ratio %.6f, beta(x^2) %.4f, beta(x^3) %.4f", fresnel / std::abs(w(0.0)), b2, b3)};
}

// ---- 9 ---------------------------------------------------------------------------

Verdict khintchine() {
  const auto psi = diophantine::ApproximationFunction::power(1.0);
  const auto leb = diophantine::khintchine_profile(measures::parse_measure("leb"), psi, 10'000, 20'000, 11);
  const double rel = std::abs(leb.mean_count / leb.comparison - 1.0);
  const auto fr = diophantine::khintchine_profile(measures::parse_measure("cantor:450:0..446"), psi, 1000, 100'000, 12);
  double ratio = 0.0;
  for (std::size_t i = 0; i < fr.hit_rate.size(); ++i) ratio += fr.hit_rate[i] / fr.two_psi[i];
  ratio /= static_cast<double>(fr.hit_rate.size());
  return {rel <= 0.10 && std::abs(ratio - 1.0) <= 0.15,
          fmt("Lebesgue mean N_x(1e4) %.3f vs 2 sum psi %.3f (%.1f%%), fractal mean hit/2psi %.4f", leb.mean_count,
              leb.comparison, 100.0 * rel, ratio)};
}

// ---- 10 --------------------------------------------------------------------------

Verdict determinism() {
  bool ok_a = false, ok_b = false;
  double w = 0.0;
  worker_threads() = 1;
  const std::string f1 = fourier_oracle_csv(2024, ok_a, w);
  worker_threads() = 4;
  const std::string f2 = fourier_oracle_csv(2024, ok_b, w);

  std::vector<const char*> eq(std::begin(kHeadline), std::end(kHeadline));
  const CliRun e1 = run_cli(eq);
  eq.insert(eq.begin() + 1, {"--threads", "4"});
  const CliRun e2 = run_cli(eq);

  const std::vector<const char*> kh = {"horolab", "khintchine", "--measure", "cantor:450:0..446", "--Q", "1000",
                                       "--samples", "20000", "--seed", "5"};
  const CliRun k1 = run_cli(kh);
  std::vector<const char*> kh4 = kh;
  kh4.insert(kh4.begin() + 1, {"--threads", "4"});
  const CliRun k2 = run_cli(kh4);
  worker_threads() = 1;

  const bool fourier_same = f1 == f2;
  const bool equi_same = e1.out == e2.out && e1.err == e2.err && !e1.out.empty();
  const bool khin_same = k1.out == k2.out && k1.err == k2.err && !k1.out.empty();
  return {fourier_same && equi_same && khin_same,
          fmt("byte-identical across reruns with 1 and 4 threads: fourier %s, equidist %s, khintchine %s",
              fourier_same ? "yes" : "no", equi_same ? "yes" : "no", khin_same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, cvy_threshold},    {2, fourier_oracle},   {3, refinement_and_shift}, {4, constant_term_identity},
      {5, spectral_gap},     {6, truncation_lemma}, {7, headline},             {8, stationary_phase},
      {9, khintchine},       {10, determinism},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& ex) {
      v = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
