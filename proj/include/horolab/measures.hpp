#pragma once

// Fractal probability measures on the line: missing-digit (homogeneous IFS)
// measures, Lebesgue measure on [0,1], point masses, and their convolutions.
//
// Conventions: the Fourier transform is mu^(xi) = \int e(xi x) dmu(x) with
// e(x) = exp(2 pi i x). A FractalMeasure with base b, digits D, weights lambda
// and shift x0 is the law of x0 + sum_{j>=1} d_j b^{-j} with i.i.d. digits
// d_j ~ lambda, so that
//
//   mu^(xi) = e(xi x0) prod_{j>=1} g(xi / b^j),   g(xi) = sum_i lambda_i e(d_i xi).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "horolab/common.hpp"

namespace horolab::measures {

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr int kDefaultThetaGrid = 64;

class FractalMeasure {
 public:
  /// Natural (uniform-weight) missing-digit measure.
  FractalMeasure(int base, std::vector<int> digits, double shift = 0.0);
  FractalMeasure(int base, std::vector<int> digits, std::vector<double> weights, double shift);

  int base() const { return base_; }
  const std::vector<int>& digits() const { return digits_; }
  const std::vector<double>& weights() const { return weights_; }
  double shift() const { return shift_; }
  std::size_t size() const { return digits_.size(); }
  bool uniform_weights() const { return uniform_; }
  /// Common difference when the digits form an arithmetic progression
  /// (a single digit counts as one with step 1).
  std::optional<int> progression_step() const { return step_; }

  FractalMeasure shifted(double x0) const;
  /// log l / log b, the similarity dimension of the attractor.
  double similarity_dimension() const;

 private:
  void validate() const;

  int base_;
  std::vector<int> digits_;
  std::vector<double> weights_;
  double shift_;
  bool uniform_ = true;
  std::optional<int> step_;
};

struct Lebesgue {};
struct Dirac {
  double at = 0.0;
};

class MeasureExpr;

struct Convolution {
  std::shared_ptr<const MeasureExpr> lhs;
  std::shared_ptr<const MeasureExpr> rhs;
};

/// Immutable expression tree over measures; cheap to copy.
class MeasureExpr {
 public:
  using Node = std::variant<FractalMeasure, Lebesgue, Dirac, Convolution>;

  MeasureExpr(FractalMeasure m) : node_(std::make_shared<const Node>(std::move(m))) {}
  MeasureExpr(Lebesgue) : node_(std::make_shared<const Node>(Lebesgue{})) {}
  MeasureExpr(Dirac d) : node_(std::make_shared<const Node>(d)) {}

  static MeasureExpr convolve(const MeasureExpr& a, const MeasureExpr& b);
  /// mu * delta_{x0}; folds into the shift field of a fractal leaf.
  MeasureExpr shifted(double x0) const;

  const Node& node() const { return *node_; }
  std::string to_string() const;

 private:
  explicit MeasureExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses `cantor:<b>:<d1>,<d2>,...`, `cantor:<b>:<lo>..<hi>`, `leb`,
/// `dirac:<x>`, parentheses, infix `*` (convolution) and suffix `+<x0>`.
MeasureExpr parse_measure(const std::string& text);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval support_hull(const MeasureExpr& m);

// ---- Fourier analysis -----------------------------------------------------

Complex symbol_g(const FractalMeasure& mu, double xi);
/// |g(xi)|, cheaper than the complex value for uniform progressions.
double symbol_g_abs(const FractalMeasure& mu, double xi);

/// Number of product factors kept for |xi| at the given tail tolerance.
int product_depth(const FractalMeasure& mu, double xi, double tail_tol);

Complex fourier_transform(const MeasureExpr& m, double xi, double tail_tol = kDefaultTailTol);
double fourier_abs(const MeasureExpr& m, double xi, double tail_tol = kDefaultTailTol);

// ---- Sampling -------------------------------------------------------------

/// count i.i.d. draws; fractal leaves are expanded to `depth` digits.
/// Deterministic given seed and independent of the worker thread count.
std::vector<double> sample(const MeasureExpr& m, int depth, std::size_t count, std::uint64_t seed);

/// Digits needed before b^-depth drops below double resolution on [0,1].
int precision_depth(const MeasureExpr& m);

// ---- Discretization (cylinder sums) ----------------------------------------

struct Atom {
  double x = 0.0;
  double weight = 0.0;
};

struct DiscretizeSpec {
  double resolution = 1e-3;       // fractal leaves: cylinder diameter b^-L <= resolution
  std::size_t lebesgue_cells = 1024;
  std::size_t max_atoms = 1u << 22;
};

/// Weighted point set: cylinder midpoints for fractal leaves, cell midpoints
/// for Lebesgue, the atom itself for Dirac, and sums over products for
/// convolutions. Throws BudgetError past max_atoms.
std::vector<Atom> discretize(const MeasureExpr& m, const DiscretizeSpec& spec);

/// Depth L = ceil(log_b(1/resolution)), at least 1.
int cylinder_depth(int base, double resolution);

// ---- Fourier l1-dimension ---------------------------------------------------

/// plain: sum_{|m|<=X} |mu^(m)|; star: max over theta = k/theta_grid of
/// sum_{|m|<=X} |mu^(m + theta)|.
double l1_partial_sum(const MeasureExpr& m, long X, bool star, int theta_grid = kDefaultThetaGrid);

/// Partial sums at every X of an increasing grid in one pass.
std::vector<double> l1_partial_sums(const MeasureExpr& m, std::span<const long> X_grid, bool star,
                                    int theta_grid = kDefaultThetaGrid);

struct DimensionEstimate {
  std::vector<long> X;
  std::vector<double> S;
  bool star = false;
  // Fit over the upper half of the grid (reported dimension).
  double slope = 0.0;
  double dimension = 1.0;
  double slope_stderr = 0.0;
  // Fit over the whole grid.
  double whole_slope = 0.0;
  double whole_dimension = 1.0;
  double whole_slope_stderr = 0.0;
  bool degenerate = false;  // all S(X) equal
  double theta_grid_error = 0.0;  // star mode: Lipschitz bound of the theta discretization
};

DimensionEstimate estimate_dim_l1(const MeasureExpr& m, std::span<const long> X_grid, bool star,
                                  int theta_grid = kDefaultThetaGrid);

/// Geometric integer grid of `count` points from X_min to X_max (deduplicated).
std::vector<long> geometric_X_grid(long X_min, long X_max, int count);

/// log l / log b - log(4 + log(2l)) / log b.
double cvy_lower_bound(long b, long l);
/// Same bound for a concrete measure; refuses non-progression digit sets
/// unless allow_non_progression is set.
double cvy_lower_bound(const FractalMeasure& mu, bool allow_non_progression = false);

inline constexpr double kSpectralThreshold = 39.0 / 64.0;

/// Smallest b >= 3 with s - log(4+log 2b)/log b > 39/64 and b - b^s >= 2.
long b_of_s(double s, long ceiling = 1'000'000'000L);

}  // namespace horolab::measures
