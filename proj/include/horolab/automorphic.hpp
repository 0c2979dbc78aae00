#pragma once

// Eisenstein series E(z, 1/2 + it) for SL2(Z) and the diagnostics built on
// its Fourier expansion
//
//   E(x+iy) = y^s + c(t) y^(1-s) + sum_{m != 0} b_m(y) e(mx),
//   b_m(y)  = (2 / xi(1+2it)) |m|^{it} sigma_{-2it}(|m|) sqrt(y) K_{it}(2 pi |m| y),
//
// with s = 1/2 + it, xi(u) = pi^(-u/2) Gamma(u/2) zeta(u) and
// c(t) = xi(1-2it)/xi(1+2it). The Hecke eigenvalues are
// lambda(m) = m^{-it} tau_{2it}(m) / zeta(1+2it).

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "horolab/common.hpp"
#include "horolab/decay.hpp"
#include "horolab/modular.hpp"
#include "horolab/special.hpp"

namespace horolab::automorphic {

/// sum_{d | m} d^z; exact for integer z >= 0 within double range.
Complex divisor_tau(long m, Complex z);

/// h(n) = n^{it} sigma_{-2it}(n) = sum_{d | n} (n/d^2)^{it}, a real number.
double hecke_h(long n, double t);

/// h(1..n_max) by a multiplicative sieve; index 0 is unused.
std::vector<double> hecke_h_table(long n_max, double t);

class EisensteinParams {
 public:
  explicit EisensteinParams(double t, int M = 16);

  double t() const { return t_; }
  double nu() const { return 0.25 + t_ * t_; }
  int M() const { return M_; }
  Complex s() const { return {0.5, t_}; }
  Complex zeta_1p2it() const { return zeta_; }
  /// xi(1 + 2it)
  Complex xi_1p2it() const { return xi_; }
  /// c(t) = xi(1-2it) / xi(1+2it), unimodular.
  Complex c() const { return c_; }
  /// omega = xi(1+2it)/|xi(1+2it)|; omega * E is real.
  Complex omega() const { return omega_; }
  /// 2 / xi(1+2it), the common factor of the nonconstant coefficients.
  Complex whittaker_factor() const { return 2.0 / xi_; }
  const special::KBesselTable& kbessel() const { return *table_; }
  /// a_n = (2/xi(1+2it)) h(n) for n = 1..M.
  const std::vector<Complex>& series() const { return series_; }

 private:
  double t_;
  int M_;
  Complex zeta_, xi_, c_, omega_;
  std::vector<Complex> series_;
  std::shared_ptr<const special::KBesselTable> table_;
};

using EisensteinParamsPtr = std::shared_ptr<const EisensteinParams>;

/// Shared, lazily built parameters for t (tables are expensive to build).
EisensteinParamsPtr eisenstein_params(double t);

/// Truncated series at a reduced point.
Complex eisenstein_value(const modular::ModularPoint& z, const EisensteinParams& p);
/// Series at reduced coordinates without the reducedness check.
Complex eisenstein_reduced(double x, double y, const EisensteinParams& p);

/// y^s + c(t) y^(1-s).
Complex constant_term(double y, const EisensteinParams& p);

/// lambda(m) = m^{-it} tau_{2it}(m) / zeta(1+2it).
Complex hecke_eis(long m, const EisensteinParams& p);

/// Analytic coefficient of e(mx) in E(x+iy); m = 0 gives the constant term.
Complex series_coefficient(long m, double y, const EisensteinParams& p);

/// Observable E(., 1/2+it). Symmetrized mode evaluates Re(omega E), the real
/// form of the series; raw mode evaluates the complex E.
class EisensteinTest final : public modular::TestFunction {
 public:
  EisensteinTest(EisensteinParamsPtr params, bool symmetrized);

  Complex at(double x, double y) const override;
  double lipschitz(double max_height) const override;
  std::optional<Complex> mean() const override { return Complex{0.0, 0.0}; }
  std::string literal() const override;

  const EisensteinParams& params() const { return *params_; }
  bool symmetrized() const { return symmetrized_; }
  /// Factor relating this observable's Fourier coefficients to those of E.
  Complex scale() const { return symmetrized_ ? params_->omega() : Complex{1.0, 0.0}; }

 private:
  EisensteinParamsPtr params_;
  bool symmetrized_;
  double lip_base_;  // hyperbolic gradient bound of the nonconstant part
};

modular::TestFunctionPtr make_eisenstein_test(double t, bool symmetrized = true);

// ---- Horocycle Fourier coefficients ---------------------------------------------

/// (1/N) sum_j phi(j/N + iy) e(-m j/N); N a power of two >= 4|m|.
Complex horocycle_fourier_coeff(const modular::TestFunction& phi, long m, double y, std::size_t n_quad);

/// All coefficients from one FFT; entry k holds the coefficient of index
/// k for k < N/2 and k - N otherwise.
std::vector<Complex> horocycle_fourier_coeffs(const modular::TestFunction& phi, double y, std::size_t n_quad);

/// Quadrature size used by the spectral-gap sweep at height y.
std::size_t spectral_gap_quadrature(double y);

/// sup over 1 <= |m| <= ceil(1/y) of |horocycle_fourier_coeff| for each y,
/// fitted against y.
DecayReport spectral_gap_fit(const modular::TestFunction& phi, std::span<const double> y_grid);

/// Sum over |m| > y^-sigma of |b_m(y)| up to the K-Bessel underflow horizon.
double truncation_tail_mass(const EisensteinParams& p, double y, double sigma);

// ---- Twisted Hecke sums --------------------------------------------------------------

struct TwistedSumSpec {
  enum class Regime { HalfPlusDelta, OnePlusDelta };
  double t = 1.0;
  double delta = 0.3;
  double alpha = 0.0;
  Regime regime = Regime::OnePlusDelta;

  void validate() const;
  double exponent() const { return (regime == Regime::HalfPlusDelta ? 0.5 : 1.0) + delta; }
};

/// sum_{m != 0} lambda(|m|) |m|^{-e} W(|m|y) e(m alpha), W(u) = sqrt(u) K_{it}(2 pi u).
Complex twisted_hecke_sum(const TwistedSumSpec& spec, double y);
Complex twisted_hecke_sum(const TwistedSumSpec& spec, double y, const EisensteinParams& p);

/// |twisted sum| over a y-grid, fitted against y.
DecayReport twisted_sum_fit(const TwistedSumSpec& spec, std::span<const double> y_grid);

}  // namespace horolab::automorphic
