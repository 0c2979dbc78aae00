#include "horolab/measures.hpp"

#include <algorithm>
#include <cctype>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "horolab/decay.hpp"
#include "horolab/parallel.hpp"
#include "horolab/rng.hpp"

namespace horolab::measures {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// ---- FractalMeasure ---------------------------------------------------------

FractalMeasure::FractalMeasure(int base, std::vector<int> digits, double shift)
    : FractalMeasure(base, digits,
                     std::vector<double>(digits.size(), digits.empty() ? 0.0 : 1.0 / static_cast<double>(digits.size())),
                     shift) {
  uniform_ = true;
}

FractalMeasure::FractalMeasure(int base, std::vector<int> digits, std::vector<double> weights, double shift)
    : base_(base), digits_(std::move(digits)), weights_(std::move(weights)), shift_(shift) {
  validate();
  uniform_ = std::all_of(weights_.begin(), weights_.end(),
                         [&](double w) { return w == weights_.front(); });
  if (digits_.size() == 1) {
    step_ = 1;
  } else {
    const int d = digits_[1] - digits_[0];
    bool ap = true;
    for (std::size_t i = 2; i < digits_.size(); ++i) ap = ap && (digits_[i] - digits_[i - 1] == d);
    if (ap) step_ = d;
  }
}

void FractalMeasure::validate() const {
  if (base_ < 2) throw DomainError("FractalMeasure: base must be >= 2");
  if (digits_.empty()) throw DomainError("FractalMeasure: digit set must be non-empty");
  if (digits_.size() != weights_.size()) throw DomainError("FractalMeasure: one weight per digit");
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (digits_[i] < 0 || digits_[i] >= base_) throw DomainError("FractalMeasure: digit out of range [0, b-1]");
    if (i > 0 && digits_[i] <= digits_[i - 1]) {
      throw DomainError("FractalMeasure: digits must be strictly increasing");
    }
    if (!(weights_[i] > 0.0)) throw DomainError("FractalMeasure: weights must be positive");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("FractalMeasure: weights must sum to 1");
  if (!std::isfinite(shift_)) throw DomainError("FractalMeasure: shift must be finite");
}

FractalMeasure FractalMeasure::shifted(double x0) const {
  FractalMeasure out = *this;
  out.shift_ = shift_ + x0;
  return out;
}

double FractalMeasure::similarity_dimension() const {
  return std::log(static_cast<double>(digits_.size())) / std::log(static_cast<double>(base_));
}

// ---- MeasureExpr --------------------------------------------------------------

MeasureExpr MeasureExpr::convolve(const MeasureExpr& a, const MeasureExpr& b) {
  return MeasureExpr(std::make_shared<const Node>(
      Convolution{std::make_shared<const MeasureExpr>(a), std::make_shared<const MeasureExpr>(b)}));
}

MeasureExpr MeasureExpr::shifted(double x0) const {
  if (const auto* f = std::get_if<FractalMeasure>(node_.get())) return MeasureExpr(f->shifted(x0));
  if (const auto* d = std::get_if<Dirac>(node_.get())) return MeasureExpr(Dirac{d->at + x0});
  return convolve(*this, MeasureExpr(Dirac{x0}));
}

std::string MeasureExpr::to_string() const {
  return std::visit(
      Overloaded{
          [](const FractalMeasure& f) {
            std::string s = "cantor:" + std::to_string(f.base()) + ":";
            const auto& d = f.digits();
            if (f.progression_step() == 1 && d.size() > 2) {
              s += std::to_string(d.front()) + ".." + std::to_string(d.back());
            } else {
              for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
            }
            if (f.shift() != 0.0) s += "+" + format_double(f.shift());
            return s;
          },
          [](const Lebesgue&) { return std::string("leb"); },
          [](const Dirac& d) { return "dirac:" + format_double(d.at); },
          [](const Convolution& c) { return "(" + c.lhs->to_string() + ")*(" + c.rhs->to_string() + ")"; },
      },
      *node_);
}

// ---- Parsing --------------------------------------------------------------------
//
//   expr   := term ('*' term)*
//   term   := atom ('+' number)*
//   atom   := 'cantor:' int ':' digits | 'leb' | 'dirac:' number | '(' expr ')'
//   digits := int '..' int | int (',' int)*

namespace {

class MeasureParser {
 public:
  explicit MeasureParser(std::string text) : s_(std::move(text)) {
    s_.erase(std::remove_if(s_.begin(), s_.end(), [](unsigned char c) { return std::isspace(c); }), s_.end());
  }

  MeasureExpr parse() {
    if (s_.empty()) throw ParseError("expr", "empty measure literal");
    MeasureExpr e = expr();
    if (pos_ != s_.size()) fail("expr", "unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& production, const std::string& what) const {
    throw ParseError(production, what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }

  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept(const std::string& word) {
    if (s_.compare(pos_, word.size(), word) == 0) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  MeasureExpr expr() {
    MeasureExpr acc = term();
    while (accept('*')) acc = MeasureExpr::convolve(acc, term());
    return acc;
  }

  MeasureExpr term() {
    MeasureExpr a = atom();
    while (accept('+')) a = a.shifted(number("shift"));
    return a;
  }

  MeasureExpr atom() {
    if (accept('(')) {
      MeasureExpr e = expr();
      if (!accept(')')) fail("atom", "expected ')'");
      return e;
    }
    if (accept("cantor:")) {
      const long b = integer("cantor-base");
      if (!accept(':')) fail("cantor", "expected ':' after base");
      std::vector<int> digits = digit_list();
      if (b < 2 || b > 1'000'000) fail("cantor-base", "base must be in [2, 10^6]");
      try {
        return MeasureExpr(FractalMeasure(static_cast<int>(b), std::move(digits)));
      } catch (const DomainError& e) {
        fail("digits", e.what());
      }
    }
    if (accept("leb")) return MeasureExpr(Lebesgue{});
    if (accept("dirac:")) return MeasureExpr(Dirac{number("dirac-point")});
    fail("atom", "expected 'cantor:', 'leb', 'dirac:' or '('");
  }

  std::vector<int> digit_list() {
    std::vector<int> out;
    const long first = integer("digits");
    if (accept("..")) {
      const long last = integer("digit-range");
      if (last < first) fail("digit-range", "empty range");
      for (long d = first; d <= last; ++d) out.push_back(static_cast<int>(d));
      return out;
    }
    out.push_back(static_cast<int>(first));
    while (accept(',')) out.push_back(static_cast<int>(integer("digits")));
    return out;
  }

  long integer(const std::string& production) {
    long v = 0;
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr == begin) fail(production, "expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  double number(const std::string& production) {
    // strtod would swallow a following "+x0" only through an exponent, which
    // is the intended reading of e.g. "1e+3".
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail(production, "expected real number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

MeasureExpr parse_measure(const std::string& text) { return MeasureParser(text).parse(); }

Interval support_hull(const MeasureExpr& m) {
  return std::visit(
      Overloaded{
          [](const FractalMeasure& f) {
            const double b1 = static_cast<double>(f.base() - 1);
            return Interval{f.shift() + f.digits().front() / b1, f.shift() + f.digits().back() / b1};
          },
          [](const Lebesgue&) { return Interval{0.0, 1.0}; },
          [](const Dirac& d) { return Interval{d.at, d.at}; },
          [](const Convolution& c) {
            const Interval a = support_hull(*c.lhs), b = support_hull(*c.rhs);
            return Interval{a.lo + b.lo, a.hi + b.hi};
          },
      },
      m.node());
}

// ---- Fourier analysis ---------------------------------------------------------------

namespace {

/// sum_{k<l} e(k theta) / l, computed from theta reduced mod 1 (the sum is
/// 1-periodic, and the reduction keeps the Dirichlet-kernel ratio accurate).
Complex progression_mean(int l, double theta) {
  const double r = theta - std::nearbyint(theta);
  if (r == 0.0) return {1.0, 0.0};
  const double ratio = std::sin(kPi * l * r) / (static_cast<double>(l) * std::sin(kPi * r));
  return ratio * e(0.5 * (l - 1) * r);
}

double progression_mean_abs(int l, double theta) {
  const double r = theta - std::nearbyint(theta);
  if (r == 0.0) return 1.0;
  return std::abs(std::sin(kPi * l * r) / (static_cast<double>(l) * std::sin(kPi * r)));
}

}  // namespace

Complex symbol_g(const FractalMeasure& mu, double xi) {
  const auto& d = mu.digits();
  if (mu.uniform_weights() && mu.progression_step()) {
    const int l = static_cast<int>(d.size());
    return e(d.front() * xi) * progression_mean(l, *mu.progression_step() * xi);
  }
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < d.size(); ++i) acc += mu.weights()[i] * e(d[i] * xi);
  return acc;
}

double symbol_g_abs(const FractalMeasure& mu, double xi) {
  if (mu.uniform_weights() && mu.progression_step()) {
    return progression_mean_abs(static_cast<int>(mu.size()), *mu.progression_step() * xi);
  }
  return std::abs(symbol_g(mu, xi));
}

int product_depth(const FractalMeasure& mu, double xi, double tail_tol) {
  if (!(tail_tol > 0.0)) throw DomainError("fourier_transform: tail_tol must be positive");
  if (xi == 0.0) return 0;
  const double b = mu.base();
  const double J = std::ceil(std::log(kTwoPi * b * std::abs(xi) / tail_tol) / std::log(b)) + 1.0;
  return std::max(1, static_cast<int>(J));
}

namespace {

Complex fractal_transform(const FractalMeasure& mu, double xi, double tail_tol) {
  const int J = product_depth(mu, xi, tail_tol);
  Complex acc = e(xi * mu.shift());
  double arg = xi;
  for (int j = 0; j < J; ++j) {
    arg /= mu.base();
    acc *= symbol_g(mu, arg);
  }
  return acc;
}

double fractal_abs(const FractalMeasure& mu, double xi, double tail_tol) {
  const int J = product_depth(mu, xi, tail_tol);
  double acc = 1.0;
  double arg = xi;
  for (int j = 0; j < J && acc != 0.0; ++j) {
    arg /= mu.base();
    acc *= symbol_g_abs(mu, arg);
  }
  return acc;
}

Complex lebesgue_transform(double xi) {
  if (xi == 0.0) return {1.0, 0.0};
  return e(0.5 * xi) * (std::sin(kPi * xi) / (kPi * xi));
}

}  // namespace

Complex fourier_transform(const MeasureExpr& m, double xi, double tail_tol) {
  if (!(tail_tol > 0.0)) throw DomainError("fourier_transform: tail_tol must be positive");
  return std::visit(
      Overloaded{
          [&](const FractalMeasure& f) { return fractal_transform(f, xi, tail_tol); },
          [&](const Lebesgue&) { return lebesgue_transform(xi); },
          [&](const Dirac& d) { return e(xi * d.at); },
          [&](const Convolution& c) {
            return fourier_transform(*c.lhs, xi, tail_tol) * fourier_transform(*c.rhs, xi, tail_tol);
          },
      },
      m.node());
}

double fourier_abs(const MeasureExpr& m, double xi, double tail_tol) {
  if (!(tail_tol > 0.0)) throw DomainError("fourier_abs: tail_tol must be positive");
  return std::visit(
      Overloaded{
          [&](const FractalMeasure& f) { return fractal_abs(f, xi, tail_tol); },
          [&](const Lebesgue&) { return xi == 0.0 ? 1.0 : std::abs(std::sin(kPi * xi) / (kPi * xi)); },
          [&](const Dirac&) { return 1.0; },
          [&](const Convolution& c) { return fourier_abs(*c.lhs, xi, tail_tol) * fourier_abs(*c.rhs, xi, tail_tol); },
      },
      m.node());
}

// ---- Sampling ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kSampleChunk = 1u << 16;

class DigitSampler {
 public:
  explicit DigitSampler(const FractalMeasure& mu) : mu_(mu) {
    if (!mu.uniform_weights()) {
      cumulative_.resize(mu.size());
      std::partial_sum(mu.weights().begin(), mu.weights().end(), cumulative_.begin());
      cumulative_.back() = 1.0;
    }
  }

  int draw(Rng& rng) const {
    if (cumulative_.empty()) return mu_.digits()[rng.below(mu_.size())];
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return mu_.digits()[static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(mu_.size()) - 1))];
  }

 private:
  const FractalMeasure& mu_;
  std::vector<double> cumulative_;
};

double draw_one(const MeasureExpr& m, Rng& rng, int depth, std::vector<int>& scratch) {
  return std::visit(
      Overloaded{
          [&](const FractalMeasure& f) {
            DigitSampler sampler(f);
            scratch.resize(static_cast<std::size_t>(depth));
            for (int j = 0; j < depth; ++j) scratch[static_cast<std::size_t>(j)] = sampler.draw(rng);
            // Horner from the deepest digit keeps the rounding error at one ulp.
            double acc = 0.0;
            for (int j = depth - 1; j >= 0; --j) acc = (acc + scratch[static_cast<std::size_t>(j)]) / f.base();
            return f.shift() + acc;
          },
          [&](const Lebesgue&) { return rng.uniform(); },
          [&](const Dirac& d) { return d.at; },
          [&](const Convolution& c) {
            const double a = draw_one(*c.lhs, rng, depth, scratch);
            const double b = draw_one(*c.rhs, rng, depth, scratch);
            return a + b;
          },
      },
      m.node());
}

void check_depth(const MeasureExpr& m, int depth) {
  std::visit(Overloaded{
                 [&](const FractalMeasure& f) {
                   if (depth * std::log(static_cast<double>(f.base())) > -std::log(DBL_MIN)) {
                     throw DomainError("sample: b^-depth underflows double precision (depth " +
                                       std::to_string(depth) + ", base " + std::to_string(f.base()) + ")");
                   }
                 },
                 [](const Lebesgue&) {},
                 [](const Dirac&) {},
                 [&](const Convolution& c) {
                   check_depth(*c.lhs, depth);
                   check_depth(*c.rhs, depth);
                 },
             },
             m.node());
}

}  // namespace

std::vector<double> sample(const MeasureExpr& m, int depth, std::size_t count, std::uint64_t seed) {
  if (depth < 1) throw DomainError("sample: depth must be >= 1");
  if (count < 1) throw DomainError("sample: count must be >= 1");
  check_depth(m, depth);
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  auto parts = parallel_map(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t begin = c * kSampleChunk;
    const std::size_t end = std::min(count, begin + kSampleChunk);
    std::vector<double> out;
    out.reserve(end - begin);
    std::vector<int> scratch;
    for (std::size_t i = begin; i < end; ++i) out.push_back(draw_one(m, rng, depth, scratch));
    return out;
  });
  std::vector<double> all;
  all.reserve(count);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

int precision_depth(const MeasureExpr& m) {
  return std::visit(
      Overloaded{
          [](const FractalMeasure& f) {
            return static_cast<int>(std::ceil(60.0 * std::log(2.0) / std::log(static_cast<double>(f.base()))));
          },
          [](const Lebesgue&) { return 1; },
          [](const Dirac&) { return 1; },
          [](const Convolution& c) { return std::max(precision_depth(*c.lhs), precision_depth(*c.rhs)); },
      },
      m.node());
}

// ---- Discretization ------------------------------------------------------------------------

int cylinder_depth(int base, double resolution) {
  if (!(resolution > 0.0)) throw DomainError("cylinder_depth: resolution must be positive");
  const double L = std::ceil(-std::log(resolution) / std::log(static_cast<double>(base)) - 1e-12);
  return std::max(1, static_cast<int>(L));
}

namespace {

std::vector<Atom> fractal_atoms(const FractalMeasure& f, const DiscretizeSpec& spec) {
  const int L = cylinder_depth(f.base(), spec.resolution);
  const double count = std::pow(static_cast<double>(f.size()), L);
  if (count > static_cast<double>(spec.max_atoms)) {
    throw BudgetError("cylinder enumeration needs " + format_double(count) + " atoms (l^L with l=" +
                      std::to_string(f.size()) + ", L=" + std::to_string(L) + "), budget " +
                      std::to_string(spec.max_atoms) + "; use the montecarlo method instead");
  }
  std::vector<Atom> atoms{{0.0, 1.0}};
  const double b = f.base();
  double scale = 1.0;
  for (int j = 0; j < L; ++j) {
    scale /= b;
    std::vector<Atom> next;
    next.reserve(atoms.size() * f.size());
    for (const Atom& a : atoms) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        next.push_back({a.x + f.digits()[i] * scale, a.weight * f.weights()[i]});
      }
    }
    atoms.swap(next);
  }
  for (Atom& a : atoms) a.x += f.shift() + 0.5 * scale;
  return atoms;
}

}  // namespace

std::vector<Atom> discretize(const MeasureExpr& m, const DiscretizeSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const FractalMeasure& f) { return fractal_atoms(f, spec); },
          [&](const Lebesgue&) {
            const std::size_t n = std::max<std::size_t>(1, spec.lebesgue_cells);
            if (n > spec.max_atoms) throw BudgetError("Lebesgue discretization exceeds the atom budget");
            std::vector<Atom> atoms(n);
            for (std::size_t i = 0; i < n; ++i) {
              atoms[i] = {(static_cast<double>(i) + 0.5) / static_cast<double>(n), 1.0 / static_cast<double>(n)};
            }
            return atoms;
          },
          [&](const Dirac& d) { return std::vector<Atom>{{d.at, 1.0}}; },
          [&](const Convolution& c) {
            const auto a = discretize(*c.lhs, spec);
            const auto b = discretize(*c.rhs, spec);
            if (static_cast<double>(a.size()) * static_cast<double>(b.size()) > static_cast<double>(spec.max_atoms)) {
              throw BudgetError("convolution discretization exceeds the atom budget; use the montecarlo method");
            }
            std::vector<Atom> out;
            out.reserve(a.size() * b.size());
            for (const Atom& u : a)
              for (const Atom& v : b) out.push_back({u.x + v.x, u.weight * v.weight});
            return out;
          },
      },
      m.node());
}

// ---- l1 sums and dimension ----------------------------------------------------------------------

std::vector<double> l1_partial_sums(const MeasureExpr& m, std::span<const long> X_grid, bool star, int theta_grid) {
  if (X_grid.empty()) return {};
  for (std::size_t i = 0; i < X_grid.size(); ++i) {
    if (X_grid[i] < 1) throw DomainError("l1_partial_sum: X must be >= 1");
    if (i > 0 && X_grid[i] < X_grid[i - 1]) throw DomainError("l1_partial_sum: X grid must be non-decreasing");
  }
  if (star && theta_grid < 1) throw DomainError("l1_partial_sum: theta_grid must be >= 1");
  const int thetas = star ? theta_grid : 1;
  const long X_max = X_grid.back();

  // One pass per theta; sums are accumulated in a fixed order so that every
  // prefix, and therefore S(X), is non-decreasing in X.
  auto per_theta = parallel_map(static_cast<std::size_t>(thetas), [&](std::size_t k) {
    const double theta = static_cast<double>(k) / thetas;
    std::vector<double> out(X_grid.size());
    double acc = fourier_abs(m, theta);
    std::size_t g = 0;
    for (long n = 1; n <= X_max && g < X_grid.size(); ++n) {
      while (g < X_grid.size() && X_grid[g] < n) out[g++] = acc;
      const double up = fourier_abs(m, static_cast<double>(n) + theta);
      acc += up;
      acc += theta == 0.0 ? up : fourier_abs(m, -static_cast<double>(n) + theta);
    }
    while (g < X_grid.size()) out[g++] = acc;
    return out;
  });
  std::vector<double> S(X_grid.size(), 0.0);
  for (const auto& row : per_theta)
    for (std::size_t i = 0; i < S.size(); ++i) S[i] = std::max(S[i], row[i]);
  return S;
}

double l1_partial_sum(const MeasureExpr& m, long X, bool star, int theta_grid) {
  const long grid[1] = {X};
  return l1_partial_sums(m, grid, star, theta_grid).front();
}

std::vector<long> geometric_X_grid(long X_min, long X_max, int count) {
  if (X_min < 1 || X_max < X_min || count < 2) throw DomainError("geometric_X_grid: invalid range");
  std::vector<long> out;
  const double ratio = std::pow(static_cast<double>(X_max) / X_min, 1.0 / (count - 1));
  for (int k = 0; k < count; ++k) {
    const long v = k == count - 1 ? X_max : std::lround(X_min * std::pow(ratio, k));
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  return out;
}

DimensionEstimate estimate_dim_l1(const MeasureExpr& m, std::span<const long> X_grid, bool star, int theta_grid) {
  if (X_grid.size() < 4) throw DomainError("estimate_dim_l1: need at least 4 grid points");
  if (static_cast<double>(X_grid.back()) < 100.0 * static_cast<double>(X_grid.front())) {
    throw DomainError("estimate_dim_l1: grid must span at least two decades");
  }
  DimensionEstimate est;
  est.X.assign(X_grid.begin(), X_grid.end());
  est.star = star;
  est.S = l1_partial_sums(m, X_grid, star, theta_grid);

  std::vector<double> xs(est.X.begin(), est.X.end());
  if (std::all_of(est.S.begin(), est.S.end(), [&](double s) { return s == est.S.front(); })) {
    est.degenerate = true;
    est.slope = est.whole_slope = 0.0;
    est.dimension = est.whole_dimension = 1.0;
  } else {
    const LogLogFit whole = fit_loglog(xs, est.S);
    const std::size_t half = xs.size() / 2;
    const LogLogFit tail = fit_loglog(std::span<const double>(xs).subspan(half),
                                      std::span<const double>(est.S).subspan(half));
    est.whole_slope = whole.slope;
    est.whole_slope_stderr = whole.slope_stderr;
    est.whole_dimension = 1.0 - whole.slope;
    est.slope = tail.slope;
    est.slope_stderr = tail.slope_stderr;
    est.dimension = 1.0 - tail.slope;
  }
  if (star) {
    const Interval hull = support_hull(m);
    const double radius = std::max({1.0, std::abs(hull.lo), std::abs(hull.hi)});
    est.theta_grid_error = kTwoPi * radius * static_cast<double>(X_grid.back()) / theta_grid;
  }
  return est;
}

// ---- CVY bound and b(s) ---------------------------------------------------------------------------

double cvy_lower_bound(long b, long l) {
  if (l < 2 || l > b) throw DomainError("cvy_lower_bound: need 2 <= l <= b");
  const double lb = std::log(static_cast<double>(b));
  return std::log(static_cast<double>(l)) / lb - std::log(4.0 + std::log(2.0 * l)) / lb;
}

double cvy_lower_bound(const FractalMeasure& mu, bool allow_non_progression) {
  if (!mu.progression_step() && !allow_non_progression) {
    throw DomainError("cvy_lower_bound: digit set is not an arithmetic progression (pass the override to force)");
  }
  return cvy_lower_bound(mu.base(), static_cast<long>(mu.size()));
}

namespace {

bool b_of_s_holds(double s, long b) {
  const double bd = static_cast<double>(b);
  const double lb = std::log(bd);
  return s - std::log(4.0 + std::log(2.0 * bd)) / lb > kSpectralThreshold && bd - std::pow(bd, s) >= 2.0;
}

}  // namespace

long b_of_s(double s, long ceiling) {
  if (!(s > kSpectralThreshold && s < 1.0)) throw DomainError("b_of_s: s must lie in (39/64, 1)");
  // Both conditions are monotone in b for b >= 3 (log(4+log 2b)/log b is
  // decreasing, b - b^s increasing), so the first admissible b is found by
  // galloping then bisection.
  long lo = 2;  // predicate false (or below range)
  long hi = 3;
  while (!b_of_s_holds(s, hi)) {
    lo = hi;
    if (hi >= ceiling) throw DomainError("b_of_s: no admissible b below the ceiling");
    hi = std::min(ceiling, hi * 2);
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (b_of_s_holds(s, mid) ? hi : lo) = mid;
  }
  if (!b_of_s_holds(s, hi) || (hi > 3 && b_of_s_holds(s, hi - 1))) {
    throw Error("b_of_s: postcondition check failed");
  }
  return hi;
}

}  // namespace horolab::measures
