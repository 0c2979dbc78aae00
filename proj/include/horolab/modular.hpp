#pragma once

// The modular surface SL2(Z)\H: reduction to the standard fundamental domain,
// points on translated horocycles, test functions, and integrals against the
// normalized hyperbolic measure and against fractal pushforwards along a
// horocycle.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "horolab/common.hpp"
#include "horolab/measures.hpp"

namespace horolab::modular {

inline constexpr double kReductionTol = 1e-12;
inline constexpr long kReductionGuard = 10'000;

/// One generator step: T^power (z -> z + power) or S (z -> -1/z).
struct Letter {
  enum class Kind { T, S } kind = Kind::T;
  long power = 0;

  bool operator==(const Letter&) const = default;
};

struct ModularPoint {
  double x = 0.0;
  double y = 1.0;
  bool reduced = false;
  /// Generators applied to the original point, in order.
  std::vector<Letter> word;
};

/// Integer matrix of a word, acting by Moebius transformations.
struct Matrix2 {
  long long a = 1, b = 0, c = 0, d = 1;
};
Matrix2 word_matrix(std::span<const Letter> word);

/// Applies the letters in order.
ModularPoint apply_word(const ModularPoint& z, std::span<const Letter> word);

/// Standard reduction with the applied word recorded. Ties: x >= 0 on
/// |x| = 1/2, x <= 0 on the unit arc.
ModularPoint reduce(const ModularPoint& z);

struct ReducedXY {
  double x;
  double y;
};
/// Same map without recording the word (hot path).
ReducedXY reduce_xy(double x, double y);

bool is_reduced(double x, double y);

struct HorocycleConfig {
  double x0 = 0.0;
  long q = 1;
  double y = 1.0;

  void validate() const;
  /// Height of the translated horocycle, y / q.
  double height() const { return y / static_cast<double>(q); }
};

/// (x0 + x/q, y/q), unreduced.
ModularPoint horocycle_point(double x, const HorocycleConfig& cfg);

// ---- Test functions ---------------------------------------------------------

/// K-invariant observable on the modular surface, evaluated on reduced
/// coordinates.
class TestFunction {
 public:
  virtual ~TestFunction() = default;
  /// Value at a reduced point.
  virtual Complex at(double x, double y) const = 0;
  /// Lipschitz constant for the hyperbolic metric on the part of the domain
  /// below height max_height. Infinity if not Lipschitz.
  virtual double lipschitz(double max_height) const = 0;
  /// Exact mean against m_X when known.
  virtual std::optional<Complex> mean() const { return std::nullopt; }
  virtual std::string literal() const = 0;

  /// Value at an arbitrary point of H.
  Complex operator()(double x, double y) const {
    const ReducedXY r = reduce_xy(x, y);
    return at(r.x, r.y);
  }
};

using TestFunctionPtr = std::shared_ptr<const TestFunction>;

class ConstantTest final : public TestFunction {
 public:
  explicit ConstantTest(Complex value) : value_(value) {}
  Complex at(double, double) const override { return value_; }
  double lipschitz(double) const override { return 0.0; }
  std::optional<Complex> mean() const override { return value_; }
  std::string literal() const override;

 private:
  Complex value_;
};

/// exp(1 - 1/(1-u^2)) in u = (2y - y0 - y1)/(y1 - y0), peak 1 at the midpoint.
class BumpTest final : public TestFunction {
 public:
  BumpTest(double y0, double y1);
  Complex at(double x, double y) const override;
  double lipschitz(double max_height) const override;
  std::optional<Complex> mean() const override { return mean_; }
  std::string literal() const override;

  double profile(double y) const;

 private:
  double y0_, y1_;
  double lipschitz_;
  Complex mean_;
};

/// 1 if the reduced height exceeds c.
class IndicatorTest final : public TestFunction {
 public:
  explicit IndicatorTest(double c);
  Complex at(double, double y) const override { return y > c_ ? 1.0 : 0.0; }
  double lipschitz(double) const override;
  std::optional<Complex> mean() const override { return mean_; }
  std::string literal() const override;

 private:
  double c_;
  Complex mean_;
};

/// Parses `eisenstein:t=<t>[,part=sym|raw]`, `bump:y0=<a>,y1=<b>`,
/// `indicator:ygt=<c>` and `const:<c>`.
TestFunctionPtr parse_test_function(const std::string& text);

/// m_X-mass of {y > c} in the fundamental domain.
double fundamental_domain_tail(double c);
/// Width of the fundamental domain at height y.
double fundamental_domain_width(double y);

// ---- Integrals --------------------------------------------------------------

struct Estimate {
  Complex value = 0.0;
  double error = 0.0;  // standard error or deterministic bound
};

inline constexpr std::size_t kChunk = 1u << 16;

/// Monte Carlo mean of phi against m_X with the exact fundamental-domain
/// sampler; stderr combines real and imaginary parts.
Estimate mX_integral(const TestFunction& phi, std::size_t N, std::uint64_t seed);

/// Draw from m_X: theta uniform on [-pi/6, pi/6], x = sin(theta),
/// y = cos(theta)/(1-u).
ReducedXY sample_mX(double theta_unit, double u);

enum class Method { Cylinder, MonteCarlo };
Method parse_method(const std::string& text);
const char* to_string(Method m);

struct MuYOptions {
  Method method = Method::MonteCarlo;
  std::size_t budget = 1'000'000;  // samples, or maximal atoms for cylinder sums
  double tol = 1e-6;               // cylinder target accuracy
  std::uint64_t seed = 1;
  int depth = 0;                   // digits per fractal sample; 0 means full precision
};

struct MuYValue {
  double y = 0.0;          // horocycle parameter (before division by q)
  Complex value = 0.0;
  double error = 0.0;      // stderr (Monte Carlo) or Lipschitz + refinement bound
  std::size_t points = 0;  // samples or atoms
  double cusp_fraction = 0.0;  // mass at reduced height above (y/q)^(-1/2)
};

/// mu_y(phi) for several heights; Monte Carlo reuses one set of x-samples
/// for all heights.
std::vector<MuYValue> mu_y_values(const measures::MeasureExpr& m, const TestFunction& phi,
                                  const HorocycleConfig& cfg, std::span<const double> heights,
                                  const MuYOptions& opts);

MuYValue mu_y_value(const measures::MeasureExpr& m, const TestFunction& phi,
                    const HorocycleConfig& cfg, const MuYOptions& opts);

}  // namespace horolab::modular
