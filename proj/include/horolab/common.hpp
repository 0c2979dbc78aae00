#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace horolab {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// e(x) = exp(2 pi i x). The argument is reduced mod 1 first so that large
/// real arguments keep full relative phase accuracy.
inline Complex e(double x) {
  const double frac = x - std::nearbyint(x);
  return {std::cos(kTwoPi * frac), std::sin(kTwoPi * frac)};
}

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Precondition or domain violation (bad parameters, unreduced input, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A literal (measure, test function, phase, psi) failed to parse.
class ParseError : public Error {
 public:
  ParseError(const std::string& production, const std::string& detail)
      : Error("parse error in <" + production + ">: " + detail), production_(production) {}
  const std::string& production() const { return production_; }

 private:
  std::string production_;
};

/// A computation would exceed its configured work budget.
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& msg) : Error(msg) {}
};

/// A fit was requested on data that carries no slope information.
class DegenerateFitError : public Error {
 public:
  explicit DegenerateFitError(const std::string& msg) : Error(msg) {}
};

}  // namespace horolab
