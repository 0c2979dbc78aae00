#pragma once

// Oscillatory integrals I(xi) = \int e(xi f(x)) w(x) dx for polynomial phases
// f and smooth windows w, certified stationary points of f, and the leading
// stationary-phase term.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "horolab/common.hpp"
#include "horolab/decay.hpp"

namespace horolab::oscillatory {

class PhasePolynomial {
 public:
  /// coeffs[k] multiplies x^k; trailing zeros are dropped.
  explicit PhasePolynomial(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double operator()(double x) const { return derivative(x, 0); }
  /// k-th derivative at x.
  double derivative(double x, int k) const;
  PhasePolynomial shifted(double c) const;  // f + c
  std::string literal() const;

 private:
  std::vector<double> coeffs_;
};

/// `poly:c0,c1,c2,...`
PhasePolynomial parse_phase(const std::string& text);

class Window {
 public:
  enum class Family { RaisedCosine, Bump };

  Window(Family family, double center, double radius);

  Family family() const { return family_; }
  double center() const { return center_; }
  double radius() const { return radius_; }
  double lo() const { return center_ - radius_; }
  double hi() const { return center_ + radius_; }
  double operator()(double x) const;
  std::string literal() const;

 private:
  Family family_;
  double center_, radius_;
  double norm_;  // 1 / \int of the unnormalized profile
};

/// `coswin:center,radius` or `bump:center,radius`.
Window parse_window(const std::string& text);

struct StationaryPoint {
  double x = 0.0;
  int k = 2;              // f' vanishes to order k-1
  double f_value = 0.0;   // f(x)
  double fk_value = 0.0;  // f^(k)(x)
};

struct StationaryData {
  std::vector<StationaryPoint> points;  // increasing x
  int max_order = 0;                    // 0 without stationary points
};

inline constexpr double kBoundaryTol = 1e-9;

/// Real roots of f' in the window support with multiplicities, certified by
/// exact square-free factorization and Sturm sequences. Throws DomainError
/// when a root lies within kBoundaryTol * radius of the support boundary.
StationaryData find_stationary_points(const PhasePolynomial& f, const Window& w);

inline constexpr double kMaxFrequency = 1e6;
inline constexpr int kNodesPerPanel = 20;
inline constexpr int kNodesPerOscillation = 12;

struct IntegralValue {
  Complex value = 0.0;
  double error = 0.0;  // half-step refinement estimate
  std::size_t panels = 0;
};

IntegralValue oscillatory_integral(const PhasePolynomial& f, const Window& w, double xi, double tol = 1e-12);

struct LeadingTerm {
  Complex value = 0.0;
  std::vector<Complex> coefficients;  // a_{i,0}, one per stationary point
};

/// sum_i e(xi f(x_i)) a_{i,0} xi^(-1/k_i).
LeadingTerm stationary_phase_leading(const PhasePolynomial& f, const Window& w, double xi);

struct OscillatoryFit {
  DecayReport report;                 // rows: xi, envelope, quadrature error, |I(xi)|
  std::vector<Complex> values;        // I(xi) at the grid points
  std::vector<double> leading_abs;    // |leading term| at the grid points
};

/// Fits the envelope max_{xi' in [xi, r xi)} |I(xi')| against xi^-beta, where r
/// is the grid ratio and the window has `window_points` samples.
OscillatoryFit exponent_fit_oscillatory(const PhasePolynomial& f, const Window& w, std::span<const double> xi_grid,
                                        double tol = 1e-12, int window_points = 4);

}  // namespace horolab::oscillatory
