#include "horolab/oscillatory.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <sstream>

#include "horolab/parallel.hpp"

namespace horolab::oscillatory {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<double> parse_list(const std::string& production, const std::string& body) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string item = body.substr(pos, comma - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw ParseError(production, "expected a real number, got '" + item + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

// ---- exact polynomials over Q, coefficients low to high ----

using Poly = std::vector<mpq_class>;

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

int deg(const Poly& p) { return static_cast<int>(p.size()) - 1; }

Poly deriv(const Poly& p) {
  Poly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<long>(k));
  trim(d);
  return d;
}

Poly sub(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

// quotient and remainder of a / b, b nonzero
std::pair<Poly, Poly> divmod(Poly a, const Poly& b) {
  trim(a);
  if (deg(a) < deg(b)) return {{}, a};
  Poly q(static_cast<std::size_t>(deg(a) - deg(b) + 1));
  while (!a.empty() && deg(a) >= deg(b)) {
    const int shift = deg(a) - deg(b);
    const mpq_class c = a.back() / b.back();
    q[static_cast<std::size_t>(shift)] = c;
    for (std::size_t i = 0; i < b.size(); ++i) a[i + static_cast<std::size_t>(shift)] -= c * b[i];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return {q, a};
}

Poly monic(Poly p) {
  trim(p);
  if (p.empty()) return p;
  const mpq_class lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

Poly gcd(Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

mpq_class eval(const Poly& p, const mpq_class& x) {
  mpq_class acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Square-free decomposition p = prod g_i^i (Yun).
std::vector<std::pair<Poly, int>> square_free(const Poly& p) {
  std::vector<std::pair<Poly, int>> out;
  const Poly dp = deriv(p);
  const Poly a0 = gcd(p, dp);
  Poly b = divmod(p, a0).first;
  Poly c = divmod(dp, a0).first;
  Poly d = sub(c, deriv(b));
  for (int i = 1; deg(b) >= 1; ++i) {
    const Poly a = gcd(b, d);
    if (deg(a) >= 1) out.emplace_back(a, i);
    b = divmod(b, a).first;
    c = divmod(d, a).first;
    d = sub(c, deriv(b));
  }
  return out;
}

class Sturm {
 public:
  explicit Sturm(const Poly& g) {
    seq_.push_back(g);
    seq_.push_back(deriv(g));
    while (!seq_.back().empty() && deg(seq_.back()) >= 1) {
      Poly r = divmod(seq_[seq_.size() - 2], seq_.back()).second;
      for (auto& c : r) c = -c;
      if (r.empty()) break;
      seq_.push_back(std::move(r));
    }
  }
  int changes(const mpq_class& x) const {
    int count = 0, last = 0;
    for (const Poly& p : seq_) {
      const int s = sgn(eval(p, x));
      if (s == 0) continue;
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  }
  // distinct roots in (lo, hi]
  int roots(const mpq_class& lo, const mpq_class& hi) const { return changes(lo) - changes(hi); }

 private:
  std::vector<Poly> seq_;
};

void isolate(const Sturm& s, const Poly& g, mpq_class lo, mpq_class hi, int count, std::vector<double>& out) {
  if (count == 0) return;
  if (count == 1) {
    if (eval(g, hi) == 0) {
      out.push_back(hi.get_d());
      return;
    }
    for (int it = 0; it < 400; ++it) {
      const double l = lo.get_d(), h = hi.get_d();
      if (h - l <= 1e-17 * std::max(1.0, std::abs(l))) break;
      mpq_class mid = (lo + hi) / 2;
      if (eval(g, mid) == 0) {
        out.push_back(mid.get_d());
        return;
      }
      if (s.roots(lo, mid) == 1) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.push_back(mpq_class((lo + hi) / 2).get_d());
    return;
  }
  const mpq_class mid = (lo + hi) / 2;
  const int left = s.roots(lo, mid);
  isolate(s, g, lo, mid, left, out);
  isolate(s, g, mid, hi, count - left, out);
}

double unnormalized_bump_integral() {
  static const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double u) { return std::abs(u) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - u * u)); }, -1.0, 1.0, 20, 1e-15);
  return value;
}

}  // namespace

// ---- Phase and window -------------------------------------------------------------

PhasePolynomial::PhasePolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw DomainError("PhasePolynomial: coefficients must be finite");
  }
  if (coeffs_.size() < 2) throw DomainError("PhasePolynomial: phase must be non-constant");
}

double PhasePolynomial::derivative(double x, int k) const {
  double acc = 0.0;
  for (int n = degree(); n >= k; --n) {
    double c = coeffs_[static_cast<std::size_t>(n)];
    for (int j = 0; j < k; ++j) c *= static_cast<double>(n - j);
    acc = acc * x + c;
  }
  return acc;
}

PhasePolynomial PhasePolynomial::shifted(double c) const {
  auto v = coeffs_;
  v[0] += c;
  return PhasePolynomial(std::move(v));
}

std::string PhasePolynomial::literal() const {
  std::string s = "poly:";
  for (std::size_t i = 0; i < coeffs_.size(); ++i) s += (i ? "," : "") + fmt(coeffs_[i]);
  return s;
}

PhasePolynomial parse_phase(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || text.substr(0, colon) != "poly") {
    throw ParseError("phase", "expected poly:c0,c1,...");
  }
  auto coeffs = parse_list("poly", text.substr(colon + 1));
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() < 2) throw ParseError("poly", "phase must have degree >= 1");
  return PhasePolynomial(std::move(coeffs));
}

Window::Window(Family family, double center, double radius) : family_(family), center_(center), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(center)) {
    throw DomainError("Window: need finite center and positive radius");
  }
  norm_ = family == Family::RaisedCosine ? 1.0 / (2.0 * radius) : 1.0 / (radius * unnormalized_bump_integral());
}

double Window::operator()(double x) const {
  const double u = (x - center_) / radius_;
  if (std::abs(u) >= 1.0) return 0.0;
  if (family_ == Family::RaisedCosine) return norm_ * (1.0 + std::cos(kPi * u));
  return norm_ * std::exp(-1.0 / (1.0 - u * u));
}

std::string Window::literal() const {
  return std::string(family_ == Family::RaisedCosine ? "coswin:" : "bump:") + fmt(center_) + "," + fmt(radius_);
}

Window parse_window(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon == std::string::npos || (head != "coswin" && head != "bump")) {
    throw ParseError("window", "expected coswin:center,radius or bump:center,radius");
  }
  const auto v = parse_list(head, text.substr(colon + 1));
  if (v.size() != 2) throw ParseError(head, "expected exactly two numbers: center,radius");
  if (!(v[1] > 0.0)) throw ParseError(head, "radius must be positive");
  return Window(head == "coswin" ? Window::Family::RaisedCosine : Window::Family::Bump, v[0], v[1]);
}

// ---- Stationary points --------------------------------------------------------------

StationaryData find_stationary_points(const PhasePolynomial& f, const Window& w) {
  Poly p;
  for (double c : f.coeffs()) p.emplace_back(c);
  const Poly dp = deriv(p);
  StationaryData data;
  if (deg(dp) < 1) return data;  // linear phase

  const double margin = kBoundaryTol * w.radius();
  const mpq_class lo(w.lo() - 2.0 * margin), hi(w.hi() + 2.0 * margin);
  for (const auto& [g, mult] : square_free(dp)) {
    const Sturm sturm(g);
    std::vector<double> roots;
    if (eval(g, lo) == 0) roots.push_back(lo.get_d());
    isolate(sturm, g, lo, hi, sturm.roots(lo, hi), roots);
    for (double x : roots) {
      if (x < w.lo() - margin || x > w.hi() + margin) continue;
      if (x <= w.lo() + margin || x >= w.hi() - margin) {
        throw DomainError("find_stationary_points: stationary point " + fmt(x) +
                          " lies at the boundary of the window support");
      }
      const int k = mult + 1;
      data.points.push_back({x, k, f(x), f.derivative(x, k)});
    }
  }
  std::sort(data.points.begin(), data.points.end(),
            [](const StationaryPoint& a, const StationaryPoint& b) { return a.x < b.x; });
  for (const auto& pt : data.points) data.max_order = std::max(data.max_order, pt.k);
  return data;
}

// ---- Quadrature ------------------------------------------------------------------------

namespace {

using Rule = boost::math::quadrature::gauss<double, kNodesPerPanel>;

Complex panel(const PhasePolynomial& f, const Window& w, double xi, double a, double b) {
  const auto& x = Rule::abscissa();
  const auto& wt = Rule::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Complex s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (const double sign : {-1.0, 1.0}) {
      const double t = c + sign * h * x[i];
      s += wt[i] * w(t) * e(xi * f(t));
    }
  }
  return h * s;
}

struct PanelResult {
  Complex value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

PanelResult adaptive(const PhasePolynomial& f, const Window& w, double xi, double a, double b, Complex whole,
                     double tol, double floor_density, int depth) {
  const double m = 0.5 * (a + b);
  const Complex left = panel(f, w, xi, a, m), right = panel(f, w, xi, m, b);
  const double diff = std::abs(left + right - whole);
  if (diff <= std::max(tol, floor_density * (b - a)) || depth >= 12) return {left + right, diff, 2};
  const PanelResult l = adaptive(f, w, xi, a, m, left, 0.5 * tol, floor_density, depth + 1);
  const PanelResult r = adaptive(f, w, xi, m, b, right, 0.5 * tol, floor_density, depth + 1);
  return {l.value + r.value, l.error + r.error, l.panels + r.panels};
}

double max_abs_derivative(const PhasePolynomial& f, double a, double b) {
  constexpr int kSamples = 4096;
  double m = 0.0;
  for (int i = 0; i <= kSamples; ++i) m = std::max(m, std::abs(f.derivative(a + (b - a) * i / kSamples, 1)));
  // a sampled maximum can miss between samples by at most max|f''| h
  double m2 = 0.0;
  for (int i = 0; i <= kSamples; ++i) m2 = std::max(m2, std::abs(f.derivative(a + (b - a) * i / kSamples, 2)));
  return m + m2 * (b - a) / kSamples;
}

}  // namespace

IntegralValue oscillatory_integral(const PhasePolynomial& f, const Window& w, double xi, double tol) {
  if (!(tol > 0.0)) throw DomainError("oscillatory_integral: tol must be positive");
  if (!std::isfinite(xi) || std::abs(xi) > kMaxFrequency) {
    throw BudgetError("oscillatory_integral: |xi| exceeds the configured maximum 1e6");
  }
  const double a = w.lo(), b = w.hi();
  const double oscillations = std::abs(xi) * max_abs_derivative(f, a, b) * (b - a);
  const double per_panel = static_cast<double>(kNodesPerPanel) / kNodesPerOscillation;
  const auto n = static_cast<std::size_t>(std::max(4.0, std::ceil(oscillations / per_panel)));
  const double h = (b - a) / static_cast<double>(n);
  // The phase xi f(x) carries a rounding error of about eps |xi f|; refinement
  // differences below that floor only see rounding.
  double w_max = 0.0, f_max = 0.0;
  for (int i = 0; i <= 64; ++i) {
    const double x = a + (b - a) * i / 64.0;
    w_max = std::max(w_max, w(x));
    f_max = std::max(f_max, std::abs(f(x)));
  }
  const double floor_density = 64.0 * 2.2e-16 * (1.0 + std::abs(xi) * f_max) * w_max;
  const double panel_tol = tol / static_cast<double>(n);
  const auto parts = parallel_map(n, [&](std::size_t i) {
    const double lo = a + h * static_cast<double>(i);
    const double hi = i + 1 == n ? b : lo + h;
    return adaptive(f, w, xi, lo, hi, panel(f, w, xi, lo, hi), panel_tol, floor_density, 0);
  });
  IntegralValue out;
  for (const auto& p : parts) {
    out.value += p.value;
    out.error += p.error;
    out.panels += p.panels;
  }
  return out;
}

LeadingTerm stationary_phase_leading(const PhasePolynomial& f, const Window& w, double xi) {
  if (!(xi >= 1.0)) throw DomainError("stationary_phase_leading: requires xi >= 1");
  const StationaryData data = find_stationary_points(f, w);
  LeadingTerm out;
  for (const auto& pt : data.points) {
    const int k = pt.k;
    const double kd = static_cast<double>(k);
    const double A = pt.fk_value / std::tgamma(kd + 1.0);
    const double base = std::tgamma(1.0 + 1.0 / kd) * std::pow(kTwoPi * std::abs(A), -1.0 / kd);
    Complex model;
    if (k % 2 == 0) {
      model = 2.0 * base * e((A > 0 ? 1.0 : -1.0) / (4.0 * kd));
    } else {
      model = 2.0 * base * std::cos(kPi / (2.0 * kd));
    }
    const Complex a0 = w(pt.x) * model;
    out.coefficients.push_back(a0);
    out.value += e(xi * pt.f_value) * a0 * std::pow(xi, -1.0 / kd);
  }
  return out;
}

OscillatoryFit exponent_fit_oscillatory(const PhasePolynomial& f, const Window& w, std::span<const double> xi_grid,
                                        double tol, int window_points) {
  if (xi_grid.size() < 3) throw DomainError("exponent_fit_oscillatory: need at least three frequencies");
  if (window_points < 1) throw DomainError("exponent_fit_oscillatory: window_points must be >= 1");
  const auto [lo, hi] = std::minmax_element(xi_grid.begin(), xi_grid.end());
  if (!(*lo > 0.0) || *hi / *lo < 100.0 * (1.0 - 1e-12)) {
    throw DomainError("exponent_fit_oscillatory: grid must be positive and span at least two decades");
  }
  const double ratio = xi_grid[1] / xi_grid[0];
  if (!(ratio > 1.0)) throw DomainError("exponent_fit_oscillatory: grid must be increasing");
  const bool stationary = find_stationary_points(f, w).max_order > 0;

  OscillatoryFit fit;
  fit.report.direction = DecayDirection::ToInfinity;
  for (double xi : xi_grid) {
    auto window = geometric_window(xi, ratio, window_points);
    window.pop_back();  // [xi, ratio * xi)
    double env = 0.0, env_err = 0.0;
    Complex at_xi = 0.0;
    for (std::size_t j = 0; j < window.size(); ++j) {
      const IntegralValue v = oscillatory_integral(f, w, window[j], tol);
      if (j == 0) at_xi = v.value;
      if (std::abs(v.value) >= env) {
        env = std::abs(v.value);
        env_err = v.error;
      }
    }
    fit.values.push_back(at_xi);
    fit.leading_abs.push_back(stationary && xi >= 1.0 ? std::abs(stationary_phase_leading(f, w, xi).value) : 0.0);
    fit.report.rows.push_back({xi, env, env_err, std::abs(at_xi)});
  }
  fit.report.metadata["phase"] = f.literal();
  fit.report.metadata["window"] = w.literal();
  fit_report(fit.report);
  if (fit.report.status != ReportStatus::Degenerate && fit.report.exponent > 2.0) {
    fit.report.flags.push_back("superpolynomial");
  }
  return fit;
}

}  // namespace horolab::oscillatory
