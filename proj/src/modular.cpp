#include "horolab/modular.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "horolab/automorphic.hpp"
#include "horolab/parallel.hpp"
#include "horolab/rng.hpp"

namespace horolab::modular {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kSqrt3Over2 = 0.86602540378443864676;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double integrate(const auto& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

// ---- Reduction --------------------------------------------------------------

Matrix2 word_matrix(std::span<const Letter> word) {
  Matrix2 m;
  for (const Letter& l : word) {
    // left-multiply by the generator
    if (l.kind == Letter::Kind::T) {
      m = {m.a + l.power * m.c, m.b + l.power * m.d, m.c, m.d};
    } else {
      m = {-m.c, -m.d, m.a, m.b};
    }
  }
  return m;
}

ModularPoint apply_word(const ModularPoint& z, std::span<const Letter> word) {
  ModularPoint out{z.x, z.y, false, {}};
  for (const Letter& l : word) {
    if (l.kind == Letter::Kind::T) {
      out.x += static_cast<double>(l.power);
    } else {
      const double r2 = out.x * out.x + out.y * out.y;
      out.x = -out.x / r2;
      out.y = out.y / r2;
    }
  }
  return out;
}

namespace {

template <class Record>
ReducedXY reduce_impl(double x, double y, Record&& record) {
  if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
    throw DomainError("reduce: requires finite x and y > 0");
  }
  for (long step = 0; step < kReductionGuard; ++step) {
    const double k = std::nearbyint(x);
    if (k != 0.0) {
      x -= k;
      record(Letter{Letter::Kind::T, -static_cast<long>(k)});
    }
    if (x < -0.5 + kReductionTol) {
      x += 1.0;
      record(Letter{Letter::Kind::T, 1});
    }
    const double r2 = x * x + y * y;
    if (r2 < 1.0 - kReductionTol) {
      x = -x / r2;
      y = y / r2;
      record(Letter{Letter::Kind::S, 0});
      continue;
    }
    if (r2 <= 1.0 + kReductionTol && x > 0.0 && x < 0.5 - kReductionTol) {
      // on the arc, S acts as x -> -x
      x = -x / r2;
      y = y / r2;
      record(Letter{Letter::Kind::S, 0});
    }
    return {x, y};
  }
  throw DomainError("reduce: no convergence after " + std::to_string(kReductionGuard) +
                    " steps (numerically degenerate input)");
}

}  // namespace

ModularPoint reduce(const ModularPoint& z) {
  ModularPoint out;
  out.word = z.word;
  const ReducedXY r = reduce_impl(z.x, z.y, [&](const Letter& l) { out.word.push_back(l); });
  out.x = r.x;
  out.y = r.y;
  out.reduced = true;
  return out;
}

ReducedXY reduce_xy(double x, double y) {
  return reduce_impl(x, y, [](const Letter&) {});
}

bool is_reduced(double x, double y) {
  return y > 0.0 && std::abs(x) <= 0.5 + kReductionTol && x * x + y * y >= 1.0 - kReductionTol;
}

void HorocycleConfig::validate() const {
  if (q < 1) throw DomainError("HorocycleConfig: q must be >= 1");
  if (!(y > 0.0 && y <= 1.0)) throw DomainError("HorocycleConfig: y must lie in (0, 1]");
  if (!std::isfinite(x0)) throw DomainError("HorocycleConfig: x0 must be finite");
}

ModularPoint horocycle_point(double x, const HorocycleConfig& cfg) {
  cfg.validate();
  return {cfg.x0 + x / static_cast<double>(cfg.q), cfg.y / static_cast<double>(cfg.q), false, {}};
}

// ---- Fundamental domain geometry ---------------------------------------------

double fundamental_domain_width(double y) {
  if (y >= 1.0) return 1.0;
  if (y <= kSqrt3Over2) return 0.0;
  return std::max(0.0, 1.0 - 2.0 * std::sqrt(1.0 - y * y));
}

double fundamental_domain_tail(double c) {
  if (c >= 1.0) return 3.0 / (kPi * c);
  const double lo = std::max(c, kSqrt3Over2);
  const double arc = integrate([](double y) { return fundamental_domain_width(y) / (y * y); }, lo, 1.0);
  return 3.0 / kPi * (1.0 + arc);
}

// ---- Test functions -------------------------------------------------------------

std::string ConstantTest::literal() const { return "const:" + fmt(value_.real()); }

BumpTest::BumpTest(double y0, double y1) : y0_(y0), y1_(y1) {
  if (!(y0 > 0.0) || !(y1 > y0) || !std::isfinite(y1)) {
    throw DomainError("bump: need 0 < y0 < y1");
  }
  // Hyperbolic gradient of the height profile is y * |profile'(y)|.
  constexpr int kGrid = 8192;
  const double h = (y1_ - y0_) / kGrid;
  double lip = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double a = y0_ + i * h, b = a + h;
    lip = std::max(lip, b * std::abs(profile(b) - profile(a)) / h);
  }
  lipschitz_ = 1.05 * lip;
  std::vector<double> cuts{y0_, y1_};
  for (double c : {kSqrt3Over2, 1.0}) {
    if (c > y0_ && c < y1_) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    m += integrate([&](double y) { return profile(y) * fundamental_domain_width(y) / (y * y); }, cuts[i],
                   cuts[i + 1]);
  }
  mean_ = 3.0 / kPi * m;
}

double BumpTest::profile(double y) const {
  if (y <= y0_ || y >= y1_) return 0.0;
  const double u = (2.0 * y - y0_ - y1_) / (y1_ - y0_);
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

Complex BumpTest::at(double, double y) const { return profile(y); }

double BumpTest::lipschitz(double) const { return lipschitz_; }

std::string BumpTest::literal() const { return "bump:y0=" + fmt(y0_) + ",y1=" + fmt(y1_); }

IndicatorTest::IndicatorTest(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("indicator: need c > 0");
  mean_ = fundamental_domain_tail(c);
}

double IndicatorTest::lipschitz(double) const { return std::numeric_limits<double>::infinity(); }

std::string IndicatorTest::literal() const { return "indicator:ygt=" + fmt(c_); }

namespace {

double parse_real(const std::string& production, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(production, "expected a real number, got '" + s + "'");
  }
  return v;
}

std::map<std::string, std::string> parse_keyvals(const std::string& production, const std::string& body) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError(production, "expected key=value, got '" + item + "'");
    }
    if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
      throw ParseError(production, "duplicate key '" + item.substr(0, eq) + "'");
    }
    pos = comma + 1;
  }
  return out;
}

std::string take(std::map<std::string, std::string>& kv, const std::string& production, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ParseError(production, "missing key '" + key + "'");
  std::string v = it->second;
  kv.erase(it);
  return v;
}

void expect_empty(const std::map<std::string, std::string>& kv, const std::string& production) {
  if (!kv.empty()) throw ParseError(production, "unknown key '" + kv.begin()->first + "'");
}

}  // namespace

TestFunctionPtr parse_test_function(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  if (head == "eisenstein") {
    auto kv = parse_keyvals("eisenstein", body);
    const double t = parse_real("eisenstein", take(kv, "eisenstein", "t"));
    bool symmetrized = true;
    if (auto it = kv.find("part"); it != kv.end()) {
      if (it->second == "raw") {
        symmetrized = false;
      } else if (it->second != "sym") {
        throw ParseError("eisenstein", "part must be 'sym' or 'raw'");
      }
      kv.erase(it);
    }
    expect_empty(kv, "eisenstein");
    if (t == 0.0) throw ParseError("eisenstein", "t must be nonzero");
    return automorphic::make_eisenstein_test(t, symmetrized);
  }
  if (head == "bump") {
    auto kv = parse_keyvals("bump", body);
    const double y0 = parse_real("bump", take(kv, "bump", "y0"));
    const double y1 = parse_real("bump", take(kv, "bump", "y1"));
    expect_empty(kv, "bump");
    if (!(y0 > 0.0 && y1 > y0)) throw ParseError("bump", "need 0 < y0 < y1");
    return std::make_shared<BumpTest>(y0, y1);
  }
  if (head == "indicator") {
    auto kv = parse_keyvals("indicator", body);
    const double c = parse_real("indicator", take(kv, "indicator", "ygt"));
    expect_empty(kv, "indicator");
    if (!(c > 0.0)) throw ParseError("indicator", "need ygt > 0");
    return std::make_shared<IndicatorTest>(c);
  }
  if (head == "const") {
    return std::make_shared<ConstantTest>(parse_real("const", body));
  }
  throw ParseError("test", "unknown test function '" + head + "' (expected eisenstein, bump, indicator or const)");
}

// ---- m_X integral -------------------------------------------------------------------

ReducedXY sample_mX(double theta_unit, double u) {
  const double theta = (theta_unit - 0.5) * (kPi / 3.0);
  return {std::sin(theta), std::cos(theta) / (1.0 - u)};
}

namespace {

struct Moments {
  double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
  std::size_t cusp = 0;

  void add(Complex v) {
    re += v.real();
    im += v.imag();
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
  }
  void merge(const Moments& o) {
    re += o.re;
    im += o.im;
    re2 += o.re2;
    im2 += o.im2;
    cusp += o.cusp;
  }
  Estimate estimate(std::size_t n) const {
    const double N = static_cast<double>(n);
    const double mr = re / N, mi = im / N;
    const double var = std::max(0.0, re2 / N - mr * mr) + std::max(0.0, im2 / N - mi * mi);
    return {{mr, mi}, n > 1 ? std::sqrt(var / (N - 1.0)) : 0.0};
  }
};

}  // namespace

Estimate mX_integral(const TestFunction& phi, std::size_t N, std::uint64_t seed) {
  if (N < 1) throw DomainError("mX_integral: N must be positive");
  const std::size_t chunks = (N + kChunk - 1) / kChunk;
  const auto parts = parallel_map(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t n = std::min(N, (c + 1) * kChunk) - c * kChunk;
    Moments m;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform();
      const double u = rng.uniform();
      const ReducedXY z = sample_mX(a, u);
      m.add(phi.at(z.x, z.y));
    }
    return m;
  });
  Moments total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate(N);
}

// ---- mu_y --------------------------------------------------------------------------------

Method parse_method(const std::string& text) {
  if (text == "cylinder") return Method::Cylinder;
  if (text == "montecarlo" || text == "mc") return Method::MonteCarlo;
  throw ParseError("method", "expected 'cylinder' or 'montecarlo', got '" + text + "'");
}

const char* to_string(Method m) { return m == Method::Cylinder ? "cylinder" : "montecarlo"; }

namespace {

struct LeafInfo {
  bool lebesgue = false;
  bool fractal = false;
};

LeafInfo leaves(const measures::MeasureExpr& m) {
  return std::visit(Overloaded{
                        [](const measures::FractalMeasure&) { return LeafInfo{false, true}; },
                        [](const measures::Lebesgue&) { return LeafInfo{true, false}; },
                        [](const measures::Dirac&) { return LeafInfo{}; },
                        [](const measures::Convolution& c) {
                          const LeafInfo a = leaves(*c.lhs), b = leaves(*c.rhs);
                          return LeafInfo{a.lebesgue || b.lebesgue, a.fractal || b.fractal};
                        },
                    },
                    m.node());
}

// Sum over fractal leaves of the cylinder diameter at the given resolution.
double fractal_diameter(const measures::MeasureExpr& m, double resolution) {
  return std::visit(Overloaded{
                        [&](const measures::FractalMeasure& f) {
                          return std::pow(static_cast<double>(f.base()),
                                          -measures::cylinder_depth(f.base(), resolution));
                        },
                        [](const measures::Lebesgue&) { return 0.0; },
                        [](const measures::Dirac&) { return 0.0; },
                        [&](const measures::Convolution& c) {
                          return fractal_diameter(*c.lhs, resolution) + fractal_diameter(*c.rhs, resolution);
                        },
                    },
                    m.node());
}

struct AtomSum {
  Complex value = 0.0;
  double cusp = 0.0;
};

AtomSum sum_atoms(const std::vector<measures::Atom>& atoms, const TestFunction& phi, const HorocycleConfig& cfg) {
  const double Y = cfg.height();
  const double cusp_height = 1.0 / std::sqrt(Y);
  const double inv_q = 1.0 / static_cast<double>(cfg.q);
  const std::size_t chunks = (atoms.size() + kChunk - 1) / kChunk;
  const auto parts = parallel_map(chunks, [&](std::size_t c) {
    AtomSum s;
    const std::size_t end = std::min(atoms.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const ReducedXY z = reduce_xy(cfg.x0 + atoms[i].x * inv_q, Y);
      s.value += atoms[i].weight * phi.at(z.x, z.y);
      if (z.y > cusp_height) s.cusp += atoms[i].weight;
    }
    return s;
  });
  AtomSum total;
  for (const auto& p : parts) {
    total.value += p.value;
    total.cusp += p.cusp;
  }
  return total;
}

MuYValue cylinder_value(const measures::MeasureExpr& m, const TestFunction& phi, HorocycleConfig cfg,
                        const MuYOptions& opts) {
  cfg.validate();
  const LeafInfo info = leaves(m);
  const double Y = cfg.height();
  const double lip = phi.lipschitz(std::max(1.0, 1.0 / Y));
  measures::DiscretizeSpec spec;
  spec.max_atoms = opts.budget;
  spec.resolution = 1.0;
  if (info.fractal) {
    if (!std::isfinite(lip)) {
      throw BudgetError("cylinder method needs a Lipschitz test function; use the montecarlo method");
    }
    if (lip > 0.0) spec.resolution = std::min(1.0, cfg.y * opts.tol / (lip * static_cast<double>(cfg.q)));
  }
  std::size_t cells = 256;
  while (static_cast<double>(cells) < 4.0 / Y) cells *= 2;
  spec.lebesgue_cells = cells;

  auto atoms = measures::discretize(m, spec);
  AtomSum sum = sum_atoms(atoms, phi, cfg);
  double refinement = 0.0;
  if (info.lebesgue) {
    for (;;) {
      spec.lebesgue_cells *= 2;
      atoms = measures::discretize(m, spec);
      const AtomSum finer = sum_atoms(atoms, phi, cfg);
      refinement = std::abs(finer.value - sum.value);
      sum = finer;
      if (refinement <= 0.5 * opts.tol) break;
    }
  }
  const double lip_error = info.fractal && lip > 0.0 ? lip * fractal_diameter(m, spec.resolution) / (2.0 * cfg.y) : 0.0;
  MuYValue out;
  out.y = cfg.y;
  out.value = sum.value;
  out.error = lip_error + refinement;
  out.points = atoms.size();
  out.cusp_fraction = sum.cusp;
  return out;
}

}  // namespace

std::vector<MuYValue> mu_y_values(const measures::MeasureExpr& m, const TestFunction& phi, const HorocycleConfig& cfg,
                                  std::span<const double> heights, const MuYOptions& opts) {
  cfg.validate();
  if (opts.budget < 1) throw DomainError("mu_y_value: budget must be >= 1");
  std::vector<MuYValue> out;
  out.reserve(heights.size());
  const LeafInfo info = leaves(m);
  // Purely atomic measures are summed exactly whatever the method.
  if (opts.method == Method::Cylinder || (!info.fractal && !info.lebesgue)) {
    for (double y : heights) {
      HorocycleConfig c = cfg;
      c.y = y;
      out.push_back(cylinder_value(m, phi, c, opts));
    }
    return out;
  }

  std::vector<HorocycleConfig> cfgs;
  for (double y : heights) {
    HorocycleConfig c = cfg;
    c.y = y;
    c.validate();
    cfgs.push_back(c);
  }
  const int depth = opts.depth > 0 ? opts.depth : measures::precision_depth(m);
  const std::size_t N = opts.budget;
  const std::vector<double> xs = measures::sample(m, depth, N, opts.seed);
  const double inv_q = 1.0 / static_cast<double>(cfg.q);
  const std::size_t chunks = (N + kChunk - 1) / kChunk;
  const auto parts = parallel_map(chunks, [&](std::size_t c) {
    std::vector<Moments> mom(cfgs.size());
    const std::size_t end = std::min(N, (c + 1) * kChunk);
    for (std::size_t h = 0; h < cfgs.size(); ++h) {
      const double Y = cfgs[h].height();
      const double cusp_height = 1.0 / std::sqrt(Y);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        const ReducedXY z = reduce_xy(cfg.x0 + xs[i] * inv_q, Y);
        mom[h].add(phi.at(z.x, z.y));
        if (z.y > cusp_height) ++mom[h].cusp;
      }
    }
    return mom;
  });
  for (std::size_t h = 0; h < cfgs.size(); ++h) {
    Moments total;
    for (const auto& p : parts) total.merge(p[h]);
    const Estimate e = total.estimate(N);
    MuYValue v;
    v.y = cfgs[h].y;
    v.value = e.value;
    v.error = e.error;
    v.points = N;
    v.cusp_fraction = static_cast<double>(total.cusp) / static_cast<double>(N);
    out.push_back(v);
  }
  return out;
}

MuYValue mu_y_value(const measures::MeasureExpr& m, const TestFunction& phi, const HorocycleConfig& cfg,
                    const MuYOptions& opts) {
  const double h[1] = {cfg.y};
  return mu_y_values(m, phi, cfg, h, opts).front();
}

}  // namespace horolab::modular
