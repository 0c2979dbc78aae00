#include "horolab/automorphic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "horolab/parallel.hpp"

namespace horolab::automorphic {

namespace {

// Powers of two at least n.
std::size_t pow2_at_least(double n) {
  std::size_t p = 1;
  while (static_cast<double>(p) < n) p *= 2;
  return p;
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ---- Arithmetic -----------------------------------------------------------------

Complex divisor_tau(long m, Complex z) {
  if (m < 1) throw DomainError("divisor_tau: m must be >= 1");
  const bool real = z.imag() == 0.0;
  auto power = [&](long d) -> Complex {
    if (real) return std::pow(static_cast<double>(d), z.real());
    return std::exp(z * std::log(static_cast<double>(d)));
  };
  Complex small = 0.0, large = 0.0;
  for (long d = 1; d * d <= m; ++d) {
    if (m % d != 0) continue;
    small += power(d);
    if (d * d != m) large += power(m / d);
  }
  return small + large;
}

double hecke_h(long n, double t) {
  if (n < 1) throw DomainError("hecke_h: n must be >= 1");
  const double ln = std::log(static_cast<double>(n));
  double sum = 0.0;
  for (long d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    // (n/d^2)^{it} + (n/(n/d)^2)^{it} = 2 cos(t log(n/d^2))
    const double a = t * (ln - 2.0 * std::log(static_cast<double>(d)));
    sum += d * d == n ? 1.0 : 2.0 * std::cos(a);
  }
  return sum;
}

std::vector<double> hecke_h_table(long n_max, double t) {
  if (n_max < 1) return {0.0};
  const auto N = static_cast<std::size_t>(n_max);
  std::vector<std::uint32_t> spf(N + 1, 0);
  for (std::size_t p = 2; p <= N; ++p) {
    if (spf[p] != 0) continue;
    for (std::size_t k = p; k <= N; k += p) {
      if (spf[k] == 0) spf[k] = static_cast<std::uint32_t>(p);
    }
  }
  std::vector<double> h(N + 1, 0.0);
  h[1] = 1.0;
  for (std::size_t n = 2; n <= N; ++n) {
    const std::size_t p = spf[n];
    std::size_t rest = n;
    int k = 0;
    while (rest % p == 0) {
      rest /= p;
      ++k;
    }
    const double lp = t * std::log(static_cast<double>(p));
    double hp = 0.0;  // sum_{j=0..k} p^{it(2j-k)}
    for (int j = 0; j <= k; ++j) hp += std::cos(lp * (2 * j - k));
    h[n] = hp * h[rest];
  }
  return h;
}

// ---- Eisenstein parameters --------------------------------------------------------

EisensteinParams::EisensteinParams(double t, int M) : t_(t), M_(M) {
  if (t == 0.0 || !std::isfinite(t)) throw DomainError("EisensteinParams: t must be a nonzero real");
  if (std::abs(t) > 30.0) throw DomainError("EisensteinParams: |t| <= 30 supported");
  if (M < 8) throw DomainError("EisensteinParams: M must be >= 8");
  zeta_ = special::zeta_1line({1.0, 2.0 * t});
  xi_ = special::completed_zeta({1.0, 2.0 * t});
  c_ = special::completed_zeta({1.0, -2.0 * t}) / xi_;
  if (std::abs(std::abs(c_) - 1.0) > 1e-9) {
    throw DomainError("EisensteinParams: |c(t)| deviates from 1 beyond 1e-9");
  }
  omega_ = xi_ / std::abs(xi_);
  series_.resize(static_cast<std::size_t>(M) + 1);
  for (int n = 1; n <= M; ++n) series_[static_cast<std::size_t>(n)] = 2.0 / xi_ * hecke_h(n, t);
  table_ = std::make_shared<special::KBesselTable>(t);
}

EisensteinParamsPtr eisenstein_params(double t) {
  static std::mutex mutex;
  static std::map<double, EisensteinParamsPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[t];
  if (!slot) slot = std::make_shared<const EisensteinParams>(t);
  return slot;
}

Complex constant_term(double y, const EisensteinParams& p) {
  if (!(y > 0.0)) throw DomainError("constant_term: y must be positive");
  const double r = std::sqrt(y);
  const double a = p.t() * std::log(y);
  const Complex ys{std::cos(a), std::sin(a)};
  return r * (ys + p.c() * std::conj(ys));
}

Complex eisenstein_reduced(double x, double y, const EisensteinParams& p) {
  Complex value = constant_term(y, p);
  const double r = std::sqrt(y);
  const double c1 = std::cos(kTwoPi * x);
  const double decay = std::exp(-kTwoPi * y);
  double cos_prev = 1.0, cos_n = c1;  // cos(2 pi (n-1) x), cos(2 pi n x)
  double damp = decay;                // exp(-2 pi n y)
  const auto& a = p.series();
  const auto& K = p.kbessel();
  for (int n = 1; n <= p.M(); ++n) {
    if (damp < 1e-20) break;
    const double arg = kTwoPi * n * y;
    const double kval = arg >= 5.0 ? K.scaled(arg) * damp : K(arg);
    value += a[static_cast<std::size_t>(n)] * (2.0 * r * kval * cos_n);
    const double next = 2.0 * c1 * cos_n - cos_prev;
    cos_prev = cos_n;
    cos_n = next;
    damp *= decay;
  }
  return value;
}

Complex eisenstein_value(const modular::ModularPoint& z, const EisensteinParams& p) {
  if (!modular::is_reduced(z.x, z.y)) {
    throw DomainError("eisenstein_value: point is not reduced; the truncation bound needs y >= sqrt(3)/2");
  }
  return eisenstein_reduced(z.x, z.y, p);
}

Complex hecke_eis(long m, const EisensteinParams& p) {
  if (m < 1) throw DomainError("hecke_eis: m must be >= 1");
  return hecke_h(m, p.t()) / p.zeta_1p2it();
}

Complex series_coefficient(long m, double y, const EisensteinParams& p) {
  if (!(y > 0.0)) throw DomainError("series_coefficient: y must be positive");
  if (m == 0) return constant_term(y, p);
  const long am = std::abs(m);
  return p.whittaker_factor() * hecke_h(am, p.t()) * std::sqrt(y) * p.kbessel()(kTwoPi * am * y);
}

// ---- Eisenstein observable ----------------------------------------------------------

EisensteinTest::EisensteinTest(EisensteinParamsPtr params, bool symmetrized)
    : params_(std::move(params)), symmetrized_(symmetrized) {
  // Hyperbolic gradient y |grad f| of the nonconstant part on a grid of the
  // domain below height 4 (above it the part is below 1e-10).
  const EisensteinParams& p = *params_;
  auto f = [&](double x, double y) { return eisenstein_reduced(x, y, p) - constant_term(y, p); };
  constexpr int kGrid = 48;
  constexpr double h = 1e-6;
  double grad = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double x = -0.5 + static_cast<double>(i) / kGrid;
    for (int j = 0; j <= kGrid; ++j) {
      const double y = 0.85 + (4.0 - 0.85) * j / kGrid;
      const double dx = std::abs(f(x + h, y) - f(x - h, y)) / (2 * h);
      const double dy = std::abs(f(x, y + h) - f(x, y - h)) / (2 * h);
      grad = std::max(grad, y * std::hypot(dx, dy));
    }
  }
  lip_base_ = 1.5 * grad + 1e-3;
}

Complex EisensteinTest::at(double x, double y) const {
  const Complex v = eisenstein_reduced(x, y, *params_);
  if (!symmetrized_) return v;
  return (params_->omega() * v).real();
}

double EisensteinTest::lipschitz(double max_height) const {
  // y^s + c y^(1-s) has hyperbolic gradient at most 2 |s| sqrt(y).
  return lip_base_ + 2.0 * std::abs(params_->s()) * std::sqrt(std::max(1.0, max_height));
}

std::string EisensteinTest::literal() const {
  std::ostringstream os;
  os.precision(17);
  os << "eisenstein:t=" << params_->t();
  if (!symmetrized_) os << ",part=raw";
  return os.str();
}

modular::TestFunctionPtr make_eisenstein_test(double t, bool symmetrized) {
  return std::make_shared<EisensteinTest>(eisenstein_params(t), symmetrized);
}

// ---- Horocycle Fourier coefficients -----------------------------------------------------

namespace {

void check_quadrature(std::size_t n_quad) {
  if (n_quad < 1 || (n_quad & (n_quad - 1)) != 0) {
    throw DomainError("horocycle Fourier coefficients: N_quad must be a power of two");
  }
}

std::vector<Complex> horocycle_samples(const modular::TestFunction& phi, double y, std::size_t n_quad) {
  const std::size_t chunks = (n_quad + modular::kChunk - 1) / modular::kChunk;
  const auto parts = parallel_map(chunks, [&](std::size_t c) {
    const std::size_t begin = c * modular::kChunk;
    const std::size_t end = std::min(n_quad, begin + modular::kChunk);
    std::vector<Complex> v;
    v.reserve(end - begin);
    for (std::size_t j = begin; j < end; ++j) {
      v.push_back(phi(static_cast<double>(j) / static_cast<double>(n_quad), y));
    }
    return v;
  });
  std::vector<Complex> out;
  out.reserve(n_quad);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

Complex horocycle_fourier_coeff(const modular::TestFunction& phi, long m, double y, std::size_t n_quad) {
  check_quadrature(n_quad);
  if (static_cast<double>(n_quad) < 4.0 * std::abs(static_cast<double>(m))) {
    throw DomainError("horocycle_fourier_coeff: N_quad must be >= 4|m|");
  }
  if (!(y > 0.0)) throw DomainError("horocycle_fourier_coeff: y must be positive");
  const auto samples = horocycle_samples(phi, y, n_quad);
  Complex sum = 0.0;
  for (std::size_t j = 0; j < n_quad; ++j) {
    // exact reduction of m j / N mod 1 keeps the phase accurate for large m
    const auto k = static_cast<std::size_t>(((m % static_cast<long>(n_quad)) + static_cast<long>(n_quad)) *
                                            static_cast<long>(j) % static_cast<long>(n_quad));
    sum += samples[j] * e(-static_cast<double>(k) / static_cast<double>(n_quad));
  }
  return sum / static_cast<double>(n_quad);
}

std::vector<Complex> horocycle_fourier_coeffs(const modular::TestFunction& phi, double y, std::size_t n_quad) {
  check_quadrature(n_quad);
  if (!(y > 0.0)) throw DomainError("horocycle_fourier_coeffs: y must be positive");
  auto samples = horocycle_samples(phi, y, n_quad);
  std::vector<Complex> out(n_quad);
  {
    const int n = static_cast<int>(n_quad);
    auto* in = reinterpret_cast<fftw_complex*>(samples.data());
    auto* res = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
      std::lock_guard lock(fftw_mutex());
      plan = fftw_plan_dft_1d(n, in, res, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  for (auto& v : out) v /= static_cast<double>(n_quad);
  return out;
}

std::size_t spectral_gap_quadrature(double y) {
  const double m_max = std::ceil(1.0 / y);
  return pow2_at_least(std::max(64.0, 8.0 * m_max));
}

DecayReport spectral_gap_fit(const modular::TestFunction& phi, std::span<const double> y_grid) {
  if (y_grid.size() < 2) throw DomainError("spectral_gap_fit: need at least two heights");
  const auto [lo, hi] = std::minmax_element(y_grid.begin(), y_grid.end());
  if (!(*lo > 0.0) || *hi >= 1.0) throw DomainError("spectral_gap_fit: heights must lie in (0, 1)");
  if (*hi / *lo < 8.0 - 1e-9) throw DomainError("spectral_gap_fit: grid must span at least 3 dyadic decades");
  DecayReport report;
  report.direction = DecayDirection::ToZero;
  bool all_zero = true;
  for (double y : y_grid) {
    const std::size_t n = spectral_gap_quadrature(y);
    const auto coeffs = horocycle_fourier_coeffs(phi, y, n);
    const auto m_max = static_cast<std::size_t>(std::ceil(1.0 / y));
    double sup = 0.0;
    for (std::size_t m = 1; m <= m_max; ++m) {
      sup = std::max({sup, std::abs(coeffs[m]), std::abs(coeffs[n - m])});
    }
    if (sup > 1e-13) all_zero = false;
    report.rows.push_back({y, sup, 0.0, sup});
  }
  report.metadata["test"] = phi.literal();
  if (all_zero) {
    std::sort(report.rows.begin(), report.rows.end(),
              [](const DecayRow& a, const DecayRow& b) { return a.param < b.param; });
    report.status = ReportStatus::Degenerate;
    report.flags.push_back("degenerate_series");
    return report;
  }
  fit_report(report);
  return report;
}

double truncation_tail_mass(const EisensteinParams& p, double y, double sigma) {
  if (!(sigma > 1.0)) throw DomainError("truncation_tail_mass: sigma must exceed 1");
  if (!(y > 0.0 && y < 0.5)) throw DomainError("truncation_tail_mass: y must lie in (0, 1/2)");
  const auto first = static_cast<long>(std::floor(std::pow(y, -sigma))) + 1;
  const auto horizon = static_cast<long>(std::floor(special::kKBesselUnderflow / (kTwoPi * y)));
  if (first > horizon) return 0.0;
  const auto h = hecke_h_table(horizon, p.t());
  const double factor = 2.0 * std::abs(p.whittaker_factor()) * std::sqrt(y);
  double tail = 0.0;
  for (long m = horizon; m >= first; --m) {  // small terms first
    tail += std::abs(h[static_cast<std::size_t>(m)]) * std::abs(p.kbessel()(kTwoPi * m * y));
  }
  return factor * tail;
}

// ---- Twisted sums ------------------------------------------------------------------------

void TwistedSumSpec::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("TwistedSumSpec: delta must lie in (0, 1]");
  if (t == 0.0 || !std::isfinite(t)) throw DomainError("TwistedSumSpec: t must be a nonzero real");
  if (!std::isfinite(alpha)) throw DomainError("TwistedSumSpec: alpha must be finite");
}

Complex twisted_hecke_sum(const TwistedSumSpec& spec, double y, const EisensteinParams& p) {
  spec.validate();
  if (!(y > 0.0 && y < 0.5)) throw DomainError("twisted_hecke_sum: y must lie in (0, 1/2)");
  if (p.t() != spec.t) throw DomainError("twisted_hecke_sum: parameter mismatch in t");
  const auto horizon = static_cast<long>(std::floor(special::kKBesselUnderflow / (kTwoPi * y)));
  const auto h = hecke_h_table(horizon, spec.t);
  const double ex = spec.exponent();
  const double frac = spec.alpha - std::floor(spec.alpha);
  double sum = 0.0;
  for (long m = horizon; m >= 1; --m) {
    const double u = static_cast<double>(m) * y;
    const double w = std::sqrt(u) * p.kbessel()(kTwoPi * u);
    // e(m alpha) + e(-m alpha), with m alpha reduced exactly enough for m <= 1e7
    const double phase = std::fmod(static_cast<double>(m) * frac, 1.0);
    sum += h[static_cast<std::size_t>(m)] * std::pow(static_cast<double>(m), -ex) * w * 2.0 *
           std::cos(kTwoPi * phase);
  }
  return sum / p.zeta_1p2it();
}

Complex twisted_hecke_sum(const TwistedSumSpec& spec, double y) {
  spec.validate();
  return twisted_hecke_sum(spec, y, *eisenstein_params(spec.t));
}

DecayReport twisted_sum_fit(const TwistedSumSpec& spec, std::span<const double> y_grid) {
  spec.validate();
  const auto params = eisenstein_params(spec.t);
  DecayReport report;
  report.direction = DecayDirection::ToZero;
  const auto values = parallel_map(y_grid.size(), [&](std::size_t i) {
    return twisted_hecke_sum(spec, y_grid[i], *params);
  });
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double a = std::abs(values[i]);
    report.rows.push_back({y_grid[i], a, 0.0, a});
  }
  fit_report(report);
  return report;
}

}  // namespace horolab::automorphic
