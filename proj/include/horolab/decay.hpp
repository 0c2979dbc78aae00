#pragma once

// Power-law decay fitting shared by every sweep in the lab: dimension
// estimates, spectral-gap and twisted-sum sweeps, stationary-phase envelopes
// and the equidistribution driver all reduce to a least-squares line in
// log-log coordinates.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace horolab {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;           // NaN when the response is constant
  double residual_se = 0.0;  // residual standard error in log units
  std::size_t points = 0;
  bool degenerate = false;   // response constant: slope 0, r2 undefined
};

/// Least-squares fit of log(y) = intercept + slope * log(x).
/// Throws DegenerateFitError for fewer than two points, repeated abscissae or
/// non-positive values.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Geometric window {base * span^(j/points) : j = 0..points}.
std::vector<double> geometric_window(double base, double span, int points);

/// Geometric grid {first * ratio^k : k = 0..count-1}.
std::vector<double> geometric_grid(double first, double ratio, int count);

enum class DecayDirection {
  ToZero,      // error ~ param^eta as param -> 0 (heights y)
  ToInfinity,  // error ~ param^(-eta) as param -> infinity (frequencies xi)
};

enum class ReportStatus { Ok, Inconclusive, Degenerate };

const char* to_string(ReportStatus s);

struct DecayRow {
  double param = 0.0;
  double error = 0.0;      // value entering the fit (envelope when windowed)
  double error_bar = 0.0;  // statistical or quadrature error of `error`
  double raw = 0.0;        // value at the grid point itself
};

struct DecayReport {
  std::vector<DecayRow> rows;  // sorted by param
  DecayDirection direction = DecayDirection::ToZero;
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double r2 = 0.0;
  double residual_se = 0.0;
  ReportStatus status = ReportStatus::Ok;
  std::vector<std::string> flags;
  std::map<std::string, std::string> metadata;

  bool has_flag(const std::string& f) const;
};

/// Sorts rows, fits the `error` column and fills exponent/stderr/r2. Rows
/// with zero error make the report Degenerate instead of throwing.
void fit_report(DecayReport& report);

}  // namespace horolab
