#include "horolab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "horolab/automorphic.hpp"
#include "horolab/measures.hpp"
#include "horolab/rng.hpp"

namespace horolab::experiments {

namespace {

constexpr std::uint64_t kReferenceStream = 0x5245;  // "RE"

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---- Configuration ------------------------------------------------------------

void YGrid::validate() const {
  if (!(y_max > 0.0 && y_max <= 1.0)) throw DomainError("y-grid: y_max must lie in (0, 1]");
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("y-grid: ratio must lie in (0, 1) so the grid decreases");
  if (count < 2) throw DomainError("y-grid: count must be >= 2");
  if (!(y_max * std::pow(ratio, count - 1) > 0.0)) throw DomainError("y-grid: smallest height underflows");
}

std::vector<double> YGrid::values() const {
  validate();
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(y_max * std::pow(ratio, k));
  return out;
}

YGrid YGrid::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw ParseError("ygrid", "expected y_max:ratio:count, got '" + text + "'");
  YGrid g;
  try {
    std::size_t used = 0;
    g.y_max = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("y_max");
    g.ratio = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("ratio");
    g.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::logic_error&) {
    throw ParseError("ygrid", "non-numeric field in '" + text + "'");
  }
  g.validate();
  return g;
}

void ExperimentConfig::validate() const {
  grid.validate();
  if (q < 1) throw DomainError("config: q must be >= 1");
  if (!std::isfinite(x0)) throw DomainError("config: x0 must be finite");
  if (mu.budget < 1) throw DomainError("config: budget must be positive");
  if (!(mu.tol > 0.0)) throw DomainError("config: tol must be positive");
  if (!(sigma > 1.0)) throw DomainError("config: sigma must exceed 1");
  if (envelope_points < 1) throw DomainError("config: envelope_points must be >= 1");
  if (reference_factor < 1) throw DomainError("config: reference_factor must be >= 1");
}

// ---- Equidistribution -------------------------------------------------------------

EquidistributionResult run_equidistribution(const ExperimentConfig& cfg) {
  cfg.validate();
  const measures::MeasureExpr m = measures::parse_measure(cfg.measure);
  const modular::TestFunctionPtr phi = modular::parse_test_function(cfg.test);
  const std::vector<double> grid = cfg.grid.values();

  EquidistributionResult out;
  if (const auto mean = phi->mean()) {
    out.reference = *mean;
  } else {
    const modular::Estimate ref =
        modular::mX_integral(*phi, cfg.mu.budget * cfg.reference_factor, derive_seed(cfg.mu.seed, kReferenceStream));
    out.reference = ref.value;
    out.reference_error = ref.error;
    out.reference_exact = false;
  }

  // Every height of every envelope window, evaluated in one pass.
  std::vector<double> heights;
  std::vector<std::vector<std::size_t>> window(grid.size());
  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int j = 0; j <= cfg.envelope_points; ++j) {
      const double h = std::min(1.0, grid[i] * std::pow(kEnvelopeSpan, static_cast<double>(j) / cfg.envelope_points));
      auto [it, inserted] = index.emplace(h, heights.size());
      if (inserted) heights.push_back(h);
      window[i].push_back(it->second);
    }
  }
  const modular::HorocycleConfig hc{cfg.x0, cfg.q, grid.front()};
  const auto values = modular::mu_y_values(m, *phi, hc, heights, cfg.mu);

  DecayReport& report = out.report;
  report.direction = DecayDirection::ToZero;
  std::size_t noisy = 0;
  double cusp = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const modular::MuYValue& at = values[window[i].front()];
    out.values.push_back(at);
    double env = -1.0, env_bar = 0.0;
    for (std::size_t k : window[i]) {
      const double err = std::abs(values[k].value - out.reference);
      if (err > env) {
        env = err;
        env_bar = values[k].error + out.reference_error;
      }
    }
    if (env_bar >= env) ++noisy;
    if (2 * i >= grid.size()) cusp = std::max(cusp, at.cusp_fraction);
    report.rows.push_back({grid[i], env, env_bar, std::abs(at.value - out.reference)});
  }

  report.metadata["measure"] = m.to_string();
  report.metadata["test"] = phi->literal();
  report.metadata["method"] = modular::to_string(cfg.mu.method);
  report.metadata["x0"] = format_double(cfg.x0);
  report.metadata["q"] = std::to_string(cfg.q);
  report.metadata["reference"] = out.reference_exact ? "exact" : "monte_carlo";

  fit_report(report);
  if (cusp > 0.5) report.flags.push_back("escape_to_cusp");
  if (2 * noisy > grid.size()) report.flags.push_back("noise_dominated");
  if (report.status == ReportStatus::Ok) {
    const bool no_decay = !(report.exponent - 2.0 * report.exponent_stderr > 0.0);
    if (no_decay) report.flags.push_back("no_significant_decay");
    if (no_decay || 2 * noisy > grid.size() || cusp > 0.5) report.status = ReportStatus::Inconclusive;
  }
  return out;
}

// ---- Basis identity ----------------------------------------------------------------

BasisCheckReport run_basis_identity_check(const ExperimentConfig& cfg) {
  cfg.validate();
  const measures::MeasureExpr m = measures::parse_measure(cfg.measure);
  const modular::TestFunctionPtr phi = modular::parse_test_function(cfg.test);
  const auto* eis = dynamic_cast<const automorphic::EisensteinTest*>(phi.get());
  if (eis == nullptr) throw DomainError("basis check: the test function must be an Eisenstein series");
  const automorphic::EisensteinParams& p = eis->params();
  const std::vector<double> grid = cfg.grid.values();
  const modular::HorocycleConfig hc{cfg.x0, cfg.q, grid.front()};
  const auto measured = modular::mu_y_values(m, *phi, hc, grid, cfg.mu);
  const double q = static_cast<double>(cfg.q);

  BasisCheckReport out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double Y = grid[i] / q;
    const auto terms = static_cast<long>(std::floor(std::pow(Y, -cfg.sigma)));
    const auto h = automorphic::hecke_h_table(std::max(1L, terms), p.t());
    Complex sum = automorphic::constant_term(Y, p);
    const Complex factor = p.whittaker_factor() * std::sqrt(Y);
    for (long k = terms; k >= 1; --k) {  // small terms first
      const double kd = static_cast<double>(k);
      const Complex b = factor * h[static_cast<std::size_t>(k)] * p.kbessel()(kTwoPi * kd * Y);
      if (b == 0.0) continue;
      sum += b * (e(kd * cfg.x0) * measures::fourier_transform(m, kd / q) +
                  e(-kd * cfg.x0) * measures::fourier_transform(m, -kd / q));
    }
    BasisRow row;
    row.y = grid[i];
    row.measured = measured[i].value;
    row.measured_error = measured[i].error;
    row.series = eis->scale() * sum;
    row.discrepancy = std::abs(row.measured - row.series);
    row.terms = terms;
    out.max_discrepancy = std::max(out.max_discrepancy, row.discrepancy);
    out.envelope_constant = std::max(out.envelope_constant, row.discrepancy / std::sqrt(Y));
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace horolab::experiments
