#pragma once

// End-to-end drivers: equidistribution of fractal pushforwards along
// translated horocycles, and the Fourier-basis identity for Eisenstein
// observables.

#include <cstddef>
#include <string>
#include <vector>

#include "horolab/common.hpp"
#include "horolab/decay.hpp"
#include "horolab/modular.hpp"

namespace horolab::experiments {

/// Heights y_max * ratio^k, k = 0..count-1.
struct YGrid {
  double y_max = 0.25;
  double ratio = 0.5;
  int count = 15;

  void validate() const;
  std::vector<double> values() const;
  /// `y_max:ratio:count`
  static YGrid parse(const std::string& text);
};

struct ExperimentConfig {
  std::string measure = "leb";
  std::string test = "eisenstein:t=1";
  YGrid grid;
  double x0 = 0.0;
  long q = 1;
  modular::MuYOptions mu;
  double sigma = 1.2;        // truncation |m| <= Y^-sigma in the basis check
  int envelope_points = 4;   // heights y * 8^(j/points), j = 0..points
  std::size_t reference_factor = 10;  // Monte Carlo reference budget multiple

  void validate() const;
};

/// Factor spanned by the envelope window above each grid height.
inline constexpr double kEnvelopeSpan = 8.0;

struct EquidistributionResult {
  DecayReport report;  // rows: y, envelope error, its error bar, |mu_y - ref|
  std::vector<modular::MuYValue> values;  // one per grid height, grid order
  Complex reference = 0.0;
  double reference_error = 0.0;
  bool reference_exact = true;
};

/// |mu_y(phi) - m_X(phi)| over the grid, fitted against y. The fit uses the
/// envelope max over heights [y, 8y] so that oscillating errors (for instance
/// the constant term of an Eisenstein series) decay monotonically.
EquidistributionResult run_equidistribution(const ExperimentConfig& cfg);

struct BasisRow {
  double y = 0.0;          // horocycle parameter; the height is y / q
  Complex measured = 0.0;
  double measured_error = 0.0;
  Complex series = 0.0;
  double discrepancy = 0.0;
  long terms = 0;          // largest |m| kept
};

struct BasisCheckReport {
  std::vector<BasisRow> rows;  // grid order
  double max_discrepancy = 0.0;
  /// max over rows of discrepancy / sqrt(y / q).
  double envelope_constant = 0.0;
};

/// Compares mu_y(E) with constant_term(Y) + sum_{1<=|m|<=Y^-sigma}
/// b_m(Y) e(m x0) mu^(m/q), Y = y/q. Requires an Eisenstein test literal.
BasisCheckReport run_basis_identity_check(const ExperimentConfig& cfg);

}  // namespace horolab::experiments
