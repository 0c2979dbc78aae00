#include "horolab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "horolab/automorphic.hpp"
#include "horolab/decay.hpp"
#include "horolab/diophantine.hpp"
#include "horolab/experiments.hpp"
#include "horolab/measures.hpp"
#include "horolab/modular.hpp"
#include "horolab/oscillatory.hpp"
#include "horolab/parallel.hpp"

namespace horolab::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC-4180-style table; every row has the header's arity.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw Error("csv: row arity differs from header");
    line(fields);
  }
  const std::string& text() const { return text_; }

 private:
  void line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      const std::string& f = fields[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        text_ += f;
      } else {
        text_ += '"';
        for (char c : f) {
          if (c == '"') text_ += '"';
          text_ += c;
        }
        text_ += '"';
      }
    }
    text_ += "\r\n";
  }

  std::size_t width_;
  std::string text_;
};

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct Outcome {
  std::string csv;
  Json exponent = nullptr, stderr_value = nullptr, r2 = nullptr;
  std::string status = "ok";
  Json details = Json::object();
};

void fill_fit(Outcome& o, const DecayReport& r) {
  o.status = to_string(r.status);
  if (r.status != ReportStatus::Degenerate) {
    o.exponent = json_number(r.exponent);
    o.stderr_value = json_number(r.exponent_stderr);
    o.r2 = json_number(r.r2);
  }
  o.details["flags"] = r.flags;
  o.details["residual_se"] = json_number(r.residual_se);
  Json meta = Json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  o.details["metadata"] = meta;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& production, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(production, "'" + s + "' is not a number");
}

/// `start:stop:step`, inclusive of stop up to rounding.
std::vector<double> parse_linear_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ParseError("xi-range", "expected start:stop:step, got '" + text + "'");
  const double a = parse_number("xi-range", parts[0]);
  const double b = parse_number("xi-range", parts[1]);
  const double h = parse_number("xi-range", parts[2]);
  if (!(h > 0.0) || !(b >= a)) throw ParseError("xi-range", "need step > 0 and stop >= start");
  const double n = std::floor((b - a) / h + 1e-9);
  if (n > 1e7) throw BudgetError("xi-range: more than 1e7 points");
  std::vector<double> out;
  for (long k = 0; k <= static_cast<long>(n); ++k) out.push_back(a + h * static_cast<double>(k));
  return out;
}

/// `first:last:count`, geometric.
std::vector<double> parse_geometric_range(const std::string& production, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ParseError(production, "expected first:last:count, got '" + text + "'");
  const double a = parse_number(production, parts[0]);
  const double b = parse_number(production, parts[1]);
  const double n = parse_number(production, parts[2]);
  if (!(a > 0.0 && b > a) || n < 2 || n != std::floor(n)) {
    throw ParseError(production, "need 0 < first < last and an integer count >= 2");
  }
  const int count = static_cast<int>(n);
  return geometric_grid(a, std::pow(b / a, 1.0 / (count - 1)), count);
}

/// Reads `key=value` lines into `--key value` tokens; `#` starts a comment.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config", path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value == "true") {
      tokens.push_back("--" + key);
    } else if (value != "false") {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

// ---- Subcommands ---------------------------------------------------------------

struct Common {
  std::string csv_path, json_path, config_path;
};

struct FourierArgs {
  std::string measure, xi = "0:100:1";
  double tail_tol = measures::kDefaultTailTol;
};

Outcome run_fourier(const FourierArgs& a) {
  const auto m = measures::parse_measure(a.measure);
  Csv csv({"xi", "re", "im", "abs"});
  for (double xi : parse_linear_range(a.xi)) {
    const Complex v = measures::fourier_transform(m, xi, a.tail_tol);
    csv.row({num(xi), num(v.real()), num(v.imag()), num(std::abs(v))});
  }
  Outcome o;
  o.csv = csv.text();
  o.details["measure"] = m.to_string();
  return o;
}

struct DimArgs {
  std::string measure;
  long xmin = 10, xmax = 1'000'000;
  int points = 25, theta_grid = measures::kDefaultThetaGrid;
  bool star = false;
};

Outcome run_dim(const DimArgs& a) {
  const auto m = measures::parse_measure(a.measure);
  const auto grid = measures::geometric_X_grid(a.xmin, a.xmax, a.points);
  const auto est = measures::estimate_dim_l1(m, grid, a.star, a.theta_grid);
  Csv csv({"X", "S"});
  for (std::size_t i = 0; i < est.X.size(); ++i) csv.row({std::to_string(est.X[i]), num(est.S[i])});
  Outcome o;
  o.csv = csv.text();
  if (est.degenerate) {
    o.status = to_string(ReportStatus::Degenerate);
  } else {
    const std::vector<double> xs(est.X.begin(), est.X.end());
    const std::size_t half = xs.size() / 2;
    const LogLogFit tail =
        fit_loglog(std::span<const double>(xs).subspan(half), std::span<const double>(est.S).subspan(half));
    o.exponent = est.slope;
    o.stderr_value = est.slope_stderr;
    o.r2 = json_number(tail.r2);
  }
  o.details["measure"] = m.to_string();
  o.details["dimension"] = est.dimension;
  o.details["whole_grid_dimension"] = est.whole_dimension;
  o.details["whole_grid_slope"] = est.whole_slope;
  o.details["whole_grid_stderr"] = est.whole_slope_stderr;
  o.details["star"] = est.star;
  if (est.star) o.details["theta_grid_error"] = est.theta_grid_error;
  o.details["spectral_threshold"] = measures::kSpectralThreshold;
  if (const auto* mu = std::get_if<measures::FractalMeasure>(&m.node())) {
    o.details["similarity_dimension"] = mu->similarity_dimension();
    if (mu->progression_step()) {
      const double bound = measures::cvy_lower_bound(*mu);
      o.details["cvy_bound"] = bound;
      o.details["cvy_exceeds_threshold"] = bound > measures::kSpectralThreshold;
    }
  }
  return o;
}

struct EquidistArgs {
  std::string measure = "leb", test = "eisenstein:t=1", ygrid = "0.25:0.5:15", method = "montecarlo";
  double x0 = 0.0, tol = 1e-6, sigma = 1.2;
  long q = 1;
  std::size_t budget = 1'000'000;
  std::uint64_t seed = 1;
  int depth = 0, envelope_points = 4;

  experiments::ExperimentConfig config() const {
    experiments::ExperimentConfig c;
    c.measure = measure;
    c.test = test;
    c.grid = experiments::YGrid::parse(ygrid);
    c.x0 = x0;
    c.q = q;
    c.mu.method = modular::parse_method(method);
    c.mu.budget = budget;
    c.mu.tol = tol;
    c.mu.seed = seed;
    c.mu.depth = depth;
    c.sigma = sigma;
    c.envelope_points = envelope_points;
    return c;
  }
};

Outcome run_equidist(const EquidistArgs& a) {
  const auto res = experiments::run_equidistribution(a.config());
  Csv csv({"y", "re", "im", "abs_error", "envelope", "error_bar", "cusp_fraction"});
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    const auto& v = res.values[i];
    // report rows are sorted by y while values follow the decreasing grid
    const DecayRow& r = res.report.rows[res.values.size() - 1 - i];
    csv.row({num(v.y), num(v.value.real()), num(v.value.imag()), num(r.raw), num(r.error), num(r.error_bar),
             num(v.cusp_fraction)});
  }
  Outcome o;
  o.csv = csv.text();
  fill_fit(o, res.report);
  o.details["reference_re"] = res.reference.real();
  o.details["reference_im"] = res.reference.imag();
  o.details["reference_error"] = res.reference_error;
  return o;
}

Outcome run_basis(const EquidistArgs& a) {
  const auto res = experiments::run_basis_identity_check(a.config());
  Csv csv({"y", "measured_re", "measured_im", "series_re", "series_im", "discrepancy", "error_bar", "terms"});
  for (const auto& r : res.rows) {
    csv.row({num(r.y), num(r.measured.real()), num(r.measured.imag()), num(r.series.real()), num(r.series.imag()),
             num(r.discrepancy), num(r.measured_error), std::to_string(r.terms)});
  }
  Outcome o;
  o.csv = csv.text();
  o.details["max_discrepancy"] = res.max_discrepancy;
  o.details["envelope_constant"] = res.envelope_constant;
  return o;
}

struct SpectralArgs {
  std::string test = "eisenstein:t=1", ygrid = "0.125:0.5:10";
};

Outcome run_spectral(const SpectralArgs& a) {
  const auto phi = modular::parse_test_function(a.test);
  const auto grid = experiments::YGrid::parse(a.ygrid).values();
  const auto report = automorphic::spectral_gap_fit(*phi, grid);
  Csv csv({"y", "sup"});
  for (const auto& r : report.rows) csv.row({num(r.param), num(r.error)});
  Outcome o;
  o.csv = csv.text();
  fill_fit(o, report);
  return o;
}

struct TwistedArgs {
  double t = 1.0, delta = 0.3, alpha = 0.0;
  std::string regime = "one_plus_delta", ygrid = "0.25:0.5:12";
};

Outcome run_twisted(const TwistedArgs& a) {
  automorphic::TwistedSumSpec spec;
  spec.t = a.t;
  spec.delta = a.delta;
  spec.alpha = a.alpha;
  if (a.regime == "one_plus_delta") {
    spec.regime = automorphic::TwistedSumSpec::Regime::OnePlusDelta;
  } else if (a.regime == "half_plus_delta") {
    spec.regime = automorphic::TwistedSumSpec::Regime::HalfPlusDelta;
  } else {
    throw ParseError("regime", "expected one_plus_delta or half_plus_delta, got '" + a.regime + "'");
  }
  const auto grid = experiments::YGrid::parse(a.ygrid).values();
  const auto report = automorphic::twisted_sum_fit(spec, grid);
  Csv csv({"y", "re", "im", "abs"});
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    const Complex v = automorphic::twisted_hecke_sum(spec, *it);
    csv.row({num(*it), num(v.real()), num(v.imag()), num(std::abs(v))});
  }
  Outcome o;
  o.csv = csv.text();
  fill_fit(o, report);
  return o;
}

struct KhintchineArgs {
  std::string measure = "leb", psi = "pow:1";
  long Q = 10'000;
  std::size_t samples = 10'000;
  std::uint64_t seed = 1;
};

Outcome run_khintchine(const KhintchineArgs& a) {
  const auto m = measures::parse_measure(a.measure);
  const auto psi = diophantine::ApproximationFunction::parse(a.psi);
  const auto prof = diophantine::khintchine_profile(m, psi, a.Q, a.samples, a.seed);
  Csv csv({"q", "hit_rate", "two_psi"});
  for (std::size_t i = 0; i < prof.hit_rate.size(); ++i) {
    csv.row({std::to_string(i + 1), num(prof.hit_rate[i]), num(prof.two_psi[i])});
  }
  Outcome o;
  o.csv = csv.text();
  o.details["measure"] = m.to_string();
  o.details["psi"] = psi.literal();
  o.details["mean_count"] = prof.mean_count;
  o.details["mean_count_stderr"] = prof.mean_count_stderr;
  o.details["two_sum_psi"] = prof.comparison;
  o.details["sum_min_one_two_psi"] = prof.comparison_capped;
  o.details["divergent"] = prof.divergent;
  Json cps = Json::array();
  for (std::size_t i = 0; i < prof.checkpoints.size(); ++i) {
    cps.push_back({{"Q", prof.checkpoints[i]},
                   {"mean_count", prof.checkpoint_mean[i]},
                   {"stderr", prof.checkpoint_stderr[i]}});
  }
  o.details["checkpoints"] = cps;
  return o;
}

struct StationaryArgs {
  std::string phase, window = "coswin:0,1", xi_grid = "10:100000:17";
  double tol = 1e-12;
  int envelope_points = 4;
};

Outcome run_stationary(const StationaryArgs& a) {
  const auto f = oscillatory::parse_phase(a.phase);
  const auto w = oscillatory::parse_window(a.window);
  const auto grid = parse_geometric_range("xi-grid", a.xi_grid);
  const auto data = oscillatory::find_stationary_points(f, w);
  const auto fit = oscillatory::exponent_fit_oscillatory(f, w, grid, a.tol, a.envelope_points);
  Csv csv({"xi", "re", "im", "abs", "leading_abs"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.row({num(grid[i]), num(fit.values[i].real()), num(fit.values[i].imag()), num(std::abs(fit.values[i])),
             num(fit.leading_abs[i])});
  }
  Outcome o;
  o.csv = csv.text();
  fill_fit(o, fit.report);
  Json pts = Json::array();
  for (const auto& p : data.points) pts.push_back({{"x", p.x}, {"k", p.k}});
  o.details["stationary_points"] = pts;
  o.details["max_order"] = data.max_order;
  if (data.max_order > 0) o.details["predicted_exponent"] = 1.0 / data.max_order;
  return o;
}

// ---- Driver ------------------------------------------------------------------------

Json config_echo(const CLI::App& sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "csv" || name == "json") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      cfg[name] = opt->results().back();
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

int emit(const std::string& command, const CLI::App& sub, const Common& common, std::uint64_t seed, bool has_seed,
         const Outcome& o, std::ostream& out, std::ostream& err) {
  Json j;
  j["command"] = command;
  j["config"] = config_echo(sub);
  j["seed"] = has_seed ? Json(seed) : Json(nullptr);
  j["exponent"] = o.exponent;
  j["stderr"] = o.stderr_value;
  j["r2"] = o.r2;
  j["status"] = o.status;
  j["details"] = o.details;
  const std::string json_text = j.dump(2) + "\n";

  if (common.csv_path.empty()) {
    out << o.csv;
  } else {
    std::ofstream f(common.csv_path, std::ios::binary);
    if (!f) throw Error("cannot write CSV file '" + common.csv_path + "'");
    f << o.csv;
  }
  if (!common.json_path.empty()) {
    std::ofstream f(common.json_path, std::ios::binary);
    if (!f) throw Error("cannot write JSON file '" + common.json_path + "'");
    f << json_text;
  } else {
    (common.csv_path.empty() ? err : out) << json_text;
  }
  return o.status == "ok" ? kExitOk : kExitInconclusive;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"horolab: horocycle equidistribution and Fourier decay laboratory", "horolab"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads; 0 uses every core (results do not depend on it)");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--csv", common.csv_path, "CSV output file (default stdout)");
    sub->add_option("--json", common.json_path, "JSON summary file");
    sub->add_option("--config", common.config_path, "key=value file with option defaults");
  };

  std::function<Outcome()> action;
  std::uint64_t seed = 0;
  bool has_seed = false;

  FourierArgs fa;
  auto* fourier = app.add_subcommand("fourier", "Fourier transform of a measure on a linear xi range");
  fourier->add_option("--measure", fa.measure, "measure literal")->required();
  fourier->add_option("--xi", fa.xi, "start:stop:step");
  fourier->add_option("--tail-tol", fa.tail_tol, "product tail tolerance");
  add_common(fourier);
  fourier->callback([&] { action = [&] { return run_fourier(fa); }; });

  DimArgs da;
  auto* dim = app.add_subcommand("dim", "L1 Fourier dimension estimate and spectral bound");
  dim->add_option("--measure", da.measure, "measure literal")->required();
  dim->add_option("--xmin", da.xmin, "smallest partial-sum cutoff");
  dim->add_option("--xmax", da.xmax, "largest partial-sum cutoff");
  dim->add_option("--points", da.points, "geometric grid size");
  dim->add_option("--theta-grid", da.theta_grid, "shifts per unit in star mode");
  dim->add_flag("--star", da.star, "maximize over shifts theta");
  add_common(dim);
  dim->callback([&] { action = [&] { return run_dim(da); }; });

  EquidistArgs ea;
  auto add_equidist = [&](CLI::App* sub) {
    sub->add_option("--measure", ea.measure, "measure literal");
    sub->add_option("--test", ea.test, "test function literal");
    sub->add_option("--ygrid", ea.ygrid, "y_max:ratio:count");
    sub->add_option("--x0", ea.x0, "base point");
    sub->add_option("--q", ea.q, "denominator of the base point");
    sub->add_option("--method", ea.method, "montecarlo or cylinder");
    sub->add_option("--budget", ea.budget, "samples or maximal atoms");
    sub->add_option("--tol", ea.tol, "cylinder target accuracy");
    sub->add_option("--seed", ea.seed, "random seed");
    sub->add_option("--depth", ea.depth, "digits per fractal sample (0: full precision)");
    add_common(sub);
  };
  auto* equidist = app.add_subcommand("equidist", "equidistribution error of horocycle pushforwards");
  add_equidist(equidist);
  equidist->add_option("--envelope-points", ea.envelope_points, "heights per envelope window");
  equidist->callback([&] {
    seed = ea.seed;
    has_seed = true;
    action = [&] { return run_equidist(ea); };
  });
  auto* basis = app.add_subcommand("basis-check", "Fourier-basis identity for Eisenstein observables");
  add_equidist(basis);
  basis->add_option("--sigma", ea.sigma, "truncation |m| <= Y^-sigma");
  basis->callback([&] {
    seed = ea.seed;
    has_seed = true;
    action = [&] { return run_basis(ea); };
  });

  SpectralArgs sa;
  auto* spectral = app.add_subcommand("spectral-gap", "sup of horocycle Fourier coefficients against y");
  spectral->add_option("--test", sa.test, "test function literal");
  spectral->add_option("--ygrid", sa.ygrid, "y_max:ratio:count");
  add_common(spectral);
  spectral->callback([&] { action = [&] { return run_spectral(sa); }; });

  TwistedArgs ta;
  auto* twisted = app.add_subcommand("twisted", "twisted Hecke sums against y");
  twisted->add_option("--t", ta.t, "spectral parameter");
  twisted->add_option("--delta", ta.delta, "exponent offset in (0, 1]");
  twisted->add_option("--alpha", ta.alpha, "twist");
  twisted->add_option("--regime", ta.regime, "one_plus_delta or half_plus_delta");
  twisted->add_option("--ygrid", ta.ygrid, "y_max:ratio:count");
  add_common(twisted);
  twisted->callback([&] { action = [&] { return run_twisted(ta); }; });

  KhintchineArgs ka;
  auto* khintchine = app.add_subcommand("khintchine", "Monte Carlo profile of approximation sets");
  khintchine->add_option("--measure", ka.measure, "measure literal");
  khintchine->add_option("--psi", ka.psi, "pow:<tau>, qlogq or const:<c>");
  khintchine->add_option("--Q", ka.Q, "largest denominator");
  khintchine->add_option("--samples", ka.samples, "Monte Carlo samples");
  khintchine->add_option("--seed", ka.seed, "random seed");
  add_common(khintchine);
  khintchine->callback([&] {
    seed = ka.seed;
    has_seed = true;
    action = [&] { return run_khintchine(ka); };
  });

  StationaryArgs sta;
  auto* stationary = app.add_subcommand("stationary", "oscillatory integrals and stationary-phase decay");
  stationary->add_option("--phase", sta.phase, "poly:c0,c1,...")->required();
  stationary->add_option("--window", sta.window, "coswin:c,r or bump:c,r");
  stationary->add_option("--xi-grid", sta.xi_grid, "first:last:count (geometric)");
  stationary->add_option("--tol", sta.tol, "quadrature tolerance");
  stationary->add_option("--envelope-points", sta.envelope_points, "frequencies per envelope window");
  add_common(stationary);
  stationary->callback([&] { action = [&] { return run_stationary(sta); }; });

  // Config files are expanded into flags placed before the command line, so
  // explicit flags win.
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    for (std::size_t i = args.size(); i-- > 1;) {
      if (args[i] != "--config") continue;
      const auto tokens = config_tokens(args[i - 1]);
      // args is reversed: the tokens go right after the subcommand name
      auto pos = args.end();
      while (pos != args.begin() && app.get_subcommand_no_throw(*(pos - 1)) == nullptr) --pos;
      if (pos == args.begin()) break;
      args.insert(pos - 1, tokens.rbegin(), tokens.rend());
      break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  worker_threads() = threads;
  try {
    const Outcome o = action();
    return emit(sub->get_name(), *sub, common, seed, has_seed, o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace horolab::cli
