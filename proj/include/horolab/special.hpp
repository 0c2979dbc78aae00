#pragma once

// Special functions needed on the unitary Eisenstein spectrum: complex Gamma
// (Lanczos), zeta on Re(s) >= 1 (Euler-Maclaurin), the completed zeta
// function, and K_{it}(x) by double-exponential quadrature.

#include <array>
#include <memory>
#include <vector>

#include "horolab/common.hpp"

namespace horolab::special {

/// log Gamma(z) for Re(z) > 0. The imaginary part is a branch of arg Gamma,
/// not necessarily the continuous one; exponentiate before comparing.
Complex log_gamma(Complex z);
Complex gamma(Complex z);

struct ZetaOptions {
  int terms = 64;       // direct terms n < N
  int corrections = 12; // Bernoulli corrections
};

inline constexpr double kMaxZetaHeight = 60.0;

/// zeta(s) for Re(s) >= 1, |Im(s)| <= 60, away from the pole.
Complex zeta_1line(Complex s, const ZetaOptions& opts = {});

/// Completed zeta xi(u) = pi^(-u/2) Gamma(u/2) zeta(u), Re(u) >= 1.
Complex completed_zeta(Complex u);

struct KBesselResult {
  double value = 0.0;
  bool underflow = false;  // x > 700: value is exactly 0
};

inline constexpr double kKBesselUnderflow = 700.0;
inline constexpr double kKBesselStep = 1.0 / 64.0;

inline constexpr double kMaxKBesselOrder = 30.0;

/// K_{it}(x) = \int_0^inf exp(-x cosh u) cos(t u) du, x > 0, |t| <= 30.
/// The error is absolute, about 1e-16 on the scale of K_0(x); for large t
/// the value itself is of size exp(-pi t / 2).
KBesselResult bessel_K_imag(double t, double x, double step = kKBesselStep);

/// exp(x) K_{it}(x), same quadrature without the overall exponential.
double bessel_K_imag_scaled(double t, double x, double step = kKBesselStep);

/// Piecewise Chebyshev interpolant of K_{it} for a fixed t, built from the
/// quadrature above. Covers [kTableMin, 700]; in log x below 5 and in
/// exp(x) K(x) above. Evaluation is a few dozen flops.
class KBesselTable {
 public:
  static constexpr double kTableMin = 1e-3;
  static constexpr int kDegree = 16;

  explicit KBesselTable(double t);

  double t() const { return t_; }
  /// K_{it}(x); falls back to quadrature below kTableMin, 0 above 700.
  double operator()(double x) const;
  /// exp(x) K_{it}(x) for x >= 5.
  double scaled(double x) const;

 private:
  using Coeffs = std::array<double, kDegree + 1>;
  static double clenshaw(const Coeffs& c, double s);

  double t_;
  std::vector<Coeffs> small_;  // u = log x in [log kTableMin, log 5], width kSmallWidth
  std::vector<Coeffs> large_;  // x in [5, 701], unit width, scaled values
  double log_min_;
};

}  // namespace horolab::special
