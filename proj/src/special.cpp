#include "horolab/special.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace horolab::special {

namespace {

constexpr double kLanczos[14] = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

// B_{2k} / (2k)!
constexpr double kBernoulliOverFactorial[] = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1.1240007277776077e21,
    -236364091.0 / 2730.0 / 6.2044840173323941e23,
    8553103.0 / 6.0 / 4.0329146112660565e26,
    -23749461029.0 / 870.0 / 3.0488834461171386e29,
};
constexpr int kMaxCorrections = 14;

constexpr double kTruncationExponent = 41.5;  // exp(-41.5) < 1e-18

// Chebyshev nodes of the first kind on [-1, 1].
double cheb_node(int k, int n) { return std::cos(kPi * (k + 0.5) / n); }

template <class F>
std::array<double, KBesselTable::kDegree + 1> cheb_fit(F&& f, double lo, double hi) {
  constexpr int n = KBesselTable::kDegree + 1;
  std::array<double, n> vals{};
  for (int k = 0; k < n; ++k) {
    vals[k] = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * cheb_node(k, n));
  }
  std::array<double, n> c{};
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += vals[k] * std::cos(kPi * j * (k + 0.5) / n);
    c[j] = 2.0 * s / n;
  }
  c[0] *= 0.5;
  return c;
}

constexpr double kSmallWidth = 0.1;
constexpr double kSplit = 5.0;

}  // namespace

Complex log_gamma(Complex z) {
  if (!(z.real() > 0.0)) throw DomainError("log_gamma: requires Re(z) > 0");
  Complex y = z;
  Complex tmp = z + 5.24218750000000000;
  tmp = (z + 0.5) * std::log(tmp) - tmp;
  Complex ser = 0.999999999999997092;
  for (double c : kLanczos) {
    y += 1.0;
    ser += c / y;
  }
  return tmp + std::log(2.5066282746310005 * ser / z);
}

Complex gamma(Complex z) { return std::exp(log_gamma(z)); }

Complex zeta_1line(Complex s, const ZetaOptions& opts) {
  if (s.real() < 1.0 - 1e-12) throw DomainError("zeta_1line: requires Re(s) >= 1");
  if (std::abs(s - 1.0) < 1e-6) throw DomainError("zeta_1line: too close to the pole at s = 1");
  if (std::abs(s.imag()) > kMaxZetaHeight) throw DomainError("zeta_1line: requires |Im(s)| <= 60");
  if (opts.terms < 8 || opts.corrections < 1 || opts.corrections > kMaxCorrections) {
    throw DomainError("zeta_1line: need terms >= 8 and 1 <= corrections <= " +
                      std::to_string(kMaxCorrections));
  }
  const int N = opts.terms;
  Complex sum = 0.0;
  for (int n = N - 1; n >= 1; --n) sum += std::exp(-s * std::log(static_cast<double>(n)));
  const double logN = std::log(static_cast<double>(N));
  const Complex Ns = std::exp(-s * logN);  // N^{-s}
  sum += Ns * static_cast<double>(N) / (s - 1.0) + 0.5 * Ns;
  // sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
  Complex rising = s;  // s(s+1)...(s+2k-2)
  Complex power = Ns / static_cast<double>(N);
  for (int k = 1; k <= opts.corrections; ++k) {
    sum += kBernoulliOverFactorial[k - 1] * rising * power;
    rising *= (s + static_cast<double>(2 * k - 1)) * (s + static_cast<double>(2 * k));
    power /= static_cast<double>(N) * N;
  }
  return sum;
}

Complex completed_zeta(Complex u) {
  return std::exp(-0.5 * u * std::log(kPi) + log_gamma(0.5 * u)) * zeta_1line(u);
}

double bessel_K_imag_scaled(double t, double x, double step) {
  if (!(x > 0.0)) throw DomainError("bessel_K_imag: requires x > 0");
  if (!(step > 0.0)) throw DomainError("bessel_K_imag: requires a positive step");
  if (!(std::abs(t) <= kMaxKBesselOrder)) throw DomainError("bessel_K_imag: requires |t| <= 30");
  // x (cosh u - 1) = 41.5 marks the truncation point.
  const double u_max = std::acosh(1.0 + kTruncationExponent / x);
  const double v_max = std::asinh(u_max);
  // Keep the phase t*sinh(v) below two radians per step.
  const double slope = std::abs(t) * std::sqrt(1.0 + u_max * u_max);
  while (slope * step > 2.0) step *= 0.5;
  const long n = static_cast<long>(std::ceil(v_max / step));
  auto f = [&](double v) {
    const double u = std::sinh(v);
    const double h = std::sinh(0.5 * u);
    return std::exp(-2.0 * x * h * h) * std::cos(t * u) * std::cosh(v);
  };
  double sum = 0.5 * f(0.0);
  for (long k = 1; k <= n; ++k) sum += f(static_cast<double>(k) * step);
  return step * sum;
}

KBesselResult bessel_K_imag(double t, double x, double step) {
  if (!(x > 0.0)) throw DomainError("bessel_K_imag: requires x > 0");
  if (x > kKBesselUnderflow) return {0.0, true};
  return {std::exp(-x) * bessel_K_imag_scaled(t, x, step), false};
}

KBesselTable::KBesselTable(double t) : t_(t), log_min_(std::log(kTableMin)) {
  const double log_split = std::log(kSplit);
  const int n_small = static_cast<int>(std::ceil((log_split - log_min_) / kSmallWidth));
  small_.reserve(static_cast<std::size_t>(n_small));
  for (int i = 0; i < n_small; ++i) {
    const double lo = log_min_ + i * kSmallWidth;
    small_.push_back(cheb_fit(
        [&](double u) { return bessel_K_imag(t_, std::exp(u)).value; }, lo, lo + kSmallWidth));
  }
  const int n_large = static_cast<int>(kKBesselUnderflow - kSplit) + 1;
  large_.reserve(static_cast<std::size_t>(n_large));
  for (int i = 0; i < n_large; ++i) {
    const double lo = kSplit + i;
    large_.push_back(cheb_fit([&](double x) { return bessel_K_imag_scaled(t_, x); }, lo, lo + 1.0));
  }
}

double KBesselTable::clenshaw(const Coeffs& c, double s) {
  double b1 = 0.0, b2 = 0.0;
  for (int j = kDegree; j >= 1; --j) {
    const double b0 = 2.0 * s * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return s * b1 - b2 + c[0];
}

double KBesselTable::scaled(double x) const {
  if (x < kSplit) return std::exp(x) * (*this)(x);
  const double off = x - kSplit;
  auto i = static_cast<std::size_t>(off);
  if (i >= large_.size()) return bessel_K_imag_scaled(t_, x);
  return clenshaw(large_[i], 2.0 * (off - static_cast<double>(i)) - 1.0);
}

double KBesselTable::operator()(double x) const {
  if (!(x > 0.0)) throw DomainError("KBesselTable: requires x > 0");
  if (x > kKBesselUnderflow) return 0.0;
  if (x < kTableMin) return bessel_K_imag(t_, x).value;
  if (x >= kSplit) return std::exp(-x) * scaled(x);
  const double off = (std::log(x) - log_min_) / kSmallWidth;
  auto i = std::min(static_cast<std::size_t>(off), small_.size() - 1);
  return clenshaw(small_[i], 2.0 * (off - static_cast<double>(i)) - 1.0);
}

}  // namespace horolab::special
