#pragma once

// Continued fractions, Dirichlet approximation and Monte Carlo profiles of
// the approximation sets A_q = {x : dist(qx, Z) < psi(q)} under a measure.

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "horolab/measures.hpp"

namespace horolab::diophantine {

class ApproximationFunction {
 public:
  enum class Family { Power, QLogQ, Constant, Table };

  static ApproximationFunction power(double tau);
  static ApproximationFunction qlogq();
  static ApproximationFunction constant(double c);
  /// values[k] is psi(k + 1).
  static ApproximationFunction table(std::vector<double> values);

  /// `pow:<tau>`, `qlogq`, `const:<c>`.
  static ApproximationFunction parse(const std::string& text);

  double operator()(long q) const;
  Family family() const { return family_; }
  /// True when sum psi(q) diverges (unknown tables are judged by their tail).
  bool divergent() const;
  std::string literal() const;

 private:
  ApproximationFunction(Family f, double param) : family_(f), param_(param) {}
  void check_monotone() const;

  Family family_;
  double param_;
  std::vector<double> table_;
};

struct RationalApprox {
  long p = 0;
  long q = 1;
  double quality = 0.0;  // |alpha - p/q|
};

/// Convergents with q <= Q in increasing q. Rational alpha (up to 1e-15)
/// stops at its last convergent, whose quality is 0.
std::vector<RationalApprox> convergents(double alpha, long Q);
/// Exact continued fraction of num/den.
std::vector<RationalApprox> convergents_rational(long num, long den, long Q);

/// p/q with 1 <= q <= Q and |alpha - p/q| <= 1/(qQ).
RationalApprox dirichlet_approx(double alpha, long Q);

/// Exact check of |alpha - p/q| <= bound_num / (bound_den) in rationals.
bool exact_quality_at_most(double alpha, long p, long q, long bound_num, long bound_den);

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // standard error
};

/// Digits drawn per fractal sample.
inline constexpr int kSampleDepth = 40;

/// dist(qx, Z) < psi(q), evaluated in double precision.
inline bool hits(double x, long q, double psi) {
  const double v = static_cast<double>(q) * x;
  return std::abs(v - std::nearbyint(v)) < psi;
}

Estimate measure_of_Aq(const measures::MeasureExpr& m, long q, const ApproximationFunction& psi, std::size_t N,
                       std::uint64_t seed);

struct KhintchineProfile {
  long Q = 0;
  std::size_t samples = 0;
  std::vector<double> hit_rate;  // index q - 1
  std::vector<double> two_psi;   // 2 psi(q)
  double mean_count = 0.0;       // mean N_x(Q)
  double mean_count_stderr = 0.0;
  double comparison = 0.0;         // 2 sum_{q <= Q} psi(q)
  double comparison_capped = 0.0;  // sum_{q <= Q} min(1, 2 psi(q)), the Lebesgue expectation
  bool divergent = true;
  /// Mean and stderr of N_x(Q') at Q' = 10, 100, ..., and Q.
  std::vector<long> checkpoints;
  std::vector<double> checkpoint_mean;
  std::vector<double> checkpoint_stderr;

  double mean_count_at(long q_max) const;
};

KhintchineProfile khintchine_profile(const measures::MeasureExpr& m, const ApproximationFunction& psi, long Q,
                                     std::size_t N, std::uint64_t seed);

/// sum_{q=2}^{Q} psi(q).
double khintchine_sum(const ApproximationFunction& psi, long Q);

}  // namespace horolab::diophantine
