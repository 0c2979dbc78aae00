#include "horolab/diophantine.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "horolab/common.hpp"
#include "horolab/parallel.hpp"

namespace horolab::diophantine {

namespace {

using f128 = __float128;
__extension__ using i128 = __int128;

double parse_positive(const std::string& production, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(production, "expected a real number, got '" + s + "'");
  }
  if (!(v > 0.0)) throw ParseError(production, "value must be positive");
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

f128 floor128(f128 x) {
  // exact for |x| < 2^62, which bounds every partial quotient we accept
  auto i = static_cast<long long>(x);
  if (static_cast<f128>(i) > x) --i;
  return static_cast<f128>(i);
}

f128 abs128(f128 x) { return x < 0 ? -x : x; }

}  // namespace

// ---- ApproximationFunction ------------------------------------------------------

ApproximationFunction ApproximationFunction::power(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("pow: tau must be positive");
  return {Family::Power, tau};
}

ApproximationFunction ApproximationFunction::qlogq() { return {Family::QLogQ, 0.0}; }

ApproximationFunction ApproximationFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("const: value must be positive");
  return {Family::Constant, c};
}

ApproximationFunction ApproximationFunction::table(std::vector<double> values) {
  if (values.empty()) throw DomainError("table: needs at least one value");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("table: values must be positive");
  }
  ApproximationFunction f(Family::Table, 0.0);
  f.table_ = std::move(values);
  f.check_monotone();
  return f;
}

ApproximationFunction ApproximationFunction::parse(const std::string& text) {
  if (text == "qlogq") return qlogq();
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  if (head == "pow") return power(parse_positive("pow", body));
  if (head == "const") return constant(parse_positive("const", body));
  throw ParseError("psi", "unknown approximation function '" + text + "' (expected pow:<tau>, qlogq or const:<c>)");
}

double ApproximationFunction::operator()(long q) const {
  if (q < 1) throw DomainError("psi: q must be >= 1");
  switch (family_) {
    case Family::Power: return std::pow(static_cast<double>(q), -param_);
    case Family::QLogQ: {
      if (q == 1) return 1.0;
      const double dq = static_cast<double>(q);
      return 1.0 / (dq * std::log(dq));
    }
    case Family::Constant: return param_;
    case Family::Table: {
      const auto i = static_cast<std::size_t>(q - 1);
      return i < table_.size() ? table_[i] : table_.back();
    }
  }
  return 0.0;
}

void ApproximationFunction::check_monotone() const {
  long last = 2;
  double prev = (*this)(2);
  for (long q = 3; q <= 1'000'000'000L; q = q < 1000 ? q + 1 : q + q / 7) {
    const double v = (*this)(q);
    if (v > prev * (1.0 + 1e-14)) {
      throw DomainError("psi must be non-increasing on q >= 2 (fails between " + std::to_string(last) + " and " +
                        std::to_string(q) + ")");
    }
    prev = v;
    last = q;
  }
}

bool ApproximationFunction::divergent() const {
  switch (family_) {
    case Family::Power: return param_ <= 1.0;
    case Family::QLogQ: return true;
    case Family::Constant: return true;
    case Family::Table: return false;  // finitely supported beyond its constant tail
  }
  return true;
}

std::string ApproximationFunction::literal() const {
  switch (family_) {
    case Family::Power: return "pow:" + fmt(param_);
    case Family::QLogQ: return "qlogq";
    case Family::Constant: return "const:" + fmt(param_);
    case Family::Table: return "table";
  }
  return "";
}

// ---- Continued fractions -------------------------------------------------------------

std::vector<RationalApprox> convergents(double alpha, long Q) {
  if (Q < 1) throw DomainError("convergents: Q must be >= 1");
  if (!std::isfinite(alpha)) throw DomainError("convergents: alpha must be finite");
  const f128 a = alpha;
  std::vector<RationalApprox> out;
  long p2 = 0, q2 = 1, p1 = 1, q1 = 0;  // p_{k-2}, q_{k-2}, p_{k-1}, q_{k-1}
  f128 x = a;
  for (int step = 0; step < 200; ++step) {
    const f128 fl = floor128(x);
    const auto ak = static_cast<long long>(fl);
    const i128 p = static_cast<i128>(ak) * p1 + p2;
    const i128 q = static_cast<i128>(ak) * q1 + q2;
    if (q > Q) break;
    const f128 err = static_cast<f128>(q) * a - static_cast<f128>(p);
    const bool exact = abs128(err) < static_cast<f128>(1e-15);
    out.push_back({static_cast<long>(p), static_cast<long>(q),
                   exact ? 0.0 : static_cast<double>(abs128(err) / static_cast<f128>(q))});
    if (exact) break;
    p2 = p1;
    q2 = q1;
    p1 = static_cast<long>(p);
    q1 = static_cast<long>(q);
    const f128 frac = x - fl;
    if (frac == 0) break;
    x = 1 / frac;
    if (x > static_cast<f128>(4.0e18)) break;  // next quotient overflows, so q_next > Q
  }
  return out;
}

std::vector<RationalApprox> convergents_rational(long num, long den, long Q) {
  if (Q < 1) throw DomainError("convergents: Q must be >= 1");
  if (den == 0) throw DomainError("convergents: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::vector<RationalApprox> out;
  long p2 = 0, q2 = 1, p1 = 1, q1 = 0;
  long n = num, d = den;
  while (d != 0) {
    long ak = n / d;
    if ((n % d != 0) && ((n < 0) != (d < 0))) --ak;  // floor division
    const long r = n - ak * d;
    const long p = ak * p1 + p2;
    const long q = ak * q1 + q2;
    if (q > Q) break;
    const i128 diff = static_cast<i128>(num) * q - static_cast<i128>(p) * den;
    const double quality = static_cast<double>(diff < 0 ? -diff : diff) / (static_cast<double>(den) * q);
    out.push_back({p, q, quality});
    p2 = p1;
    q2 = q1;
    p1 = p;
    q1 = q;
    n = d;
    d = r;
  }
  return out;
}

RationalApprox dirichlet_approx(double alpha, long Q) {
  const auto cv = convergents(alpha, Q);
  if (cv.empty()) throw DomainError("dirichlet_approx: no convergent found");
  return cv.back();
}

bool exact_quality_at_most(double alpha, long p, long q, long bound_num, long bound_den) {
  const mpq_class a(alpha);
  mpq_class approx(p, q);
  approx.canonicalize();
  mpq_class diff = a - approx;
  if (diff < 0) diff = -diff;
  mpq_class bound(bound_num, bound_den);
  bound.canonicalize();
  return diff <= bound;
}

// ---- Approximation-set profiles ------------------------------------------------------------

Estimate measure_of_Aq(const measures::MeasureExpr& m, long q, const ApproximationFunction& psi, std::size_t N,
                       std::uint64_t seed) {
  if (q < 1) throw DomainError("measure_of_Aq: q must be >= 1");
  if (N < 1000) throw DomainError("measure_of_Aq: N must be >= 1000");
  const double r = psi(q);
  if (r > 0.5) return {1.0, 0.0};
  const auto xs = measures::sample(m, kSampleDepth, N, seed);
  std::size_t count = 0;
  for (double x : xs) count += hits(x, q, r) ? 1 : 0;
  const double n = static_cast<double>(N);
  const double p = static_cast<double>(count) / n;
  return {p, std::sqrt(p * (1.0 - p) / (n - 1.0))};
}

double KhintchineProfile::mean_count_at(long q_max) const {
  const long top = std::min<long>(q_max, static_cast<long>(hit_rate.size()));
  double s = 0.0;
  for (long q = 1; q <= top; ++q) s += hit_rate[static_cast<std::size_t>(q - 1)];
  return s;
}

KhintchineProfile khintchine_profile(const measures::MeasureExpr& m, const ApproximationFunction& psi, long Q,
                                     std::size_t N, std::uint64_t seed) {
  if (Q < 10) throw DomainError("khintchine_profile: Q must be >= 10");
  if (N < 2) throw DomainError("khintchine_profile: need at least two samples");
  KhintchineProfile prof;
  prof.Q = Q;
  prof.samples = N;
  prof.divergent = psi.divergent();
  std::vector<double> r(static_cast<std::size_t>(Q) + 1);
  for (long q = 1; q <= Q; ++q) r[static_cast<std::size_t>(q)] = psi(q);
  for (long c = 10; c < Q; c *= 10) prof.checkpoints.push_back(c);
  prof.checkpoints.push_back(Q);

  const auto xs = measures::sample(m, kSampleDepth, N, seed);
  constexpr std::size_t kProfileChunk = 4096;
  struct Partial {
    std::vector<std::uint32_t> hits;
    std::vector<double> sum, sum2;
  };
  const std::size_t chunks = (N + kProfileChunk - 1) / kProfileChunk;
  const std::size_t nc = prof.checkpoints.size();
  const auto parts = parallel_map(chunks, [&](std::size_t c) {
    Partial part{std::vector<std::uint32_t>(static_cast<std::size_t>(Q) + 1, 0), std::vector<double>(nc, 0.0),
                 std::vector<double>(nc, 0.0)};
    const std::size_t end = std::min(N, (c + 1) * kProfileChunk);
    for (std::size_t i = c * kProfileChunk; i < end; ++i) {
      const double x = xs[i];
      long count = 0;
      std::size_t next = 0;
      for (long q = 1; q <= Q; ++q) {
        if (hits(x, q, r[static_cast<std::size_t>(q)])) {
          ++part.hits[static_cast<std::size_t>(q)];
          ++count;
        }
        if (q == prof.checkpoints[next]) {
          part.sum[next] += static_cast<double>(count);
          part.sum2[next] += static_cast<double>(count) * static_cast<double>(count);
          ++next;
        }
      }
    }
    return part;
  });

  std::vector<std::uint64_t> total(static_cast<std::size_t>(Q) + 1, 0);
  std::vector<double> sum(nc, 0.0), sum2(nc, 0.0);
  for (const auto& p : parts) {
    for (std::size_t q = 1; q <= static_cast<std::size_t>(Q); ++q) total[q] += p.hits[q];
    for (std::size_t k = 0; k < nc; ++k) {
      sum[k] += p.sum[k];
      sum2[k] += p.sum2[k];
    }
  }
  const double n = static_cast<double>(N);
  for (long q = 1; q <= Q; ++q) {
    const auto i = static_cast<std::size_t>(q);
    prof.hit_rate.push_back(static_cast<double>(total[i]) / n);
    prof.two_psi.push_back(2.0 * r[i]);
    prof.comparison += 2.0 * r[i];
    prof.comparison_capped += std::min(1.0, 2.0 * r[i]);
  }
  for (std::size_t k = 0; k < nc; ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(0.0, sum2[k] / n - mean * mean) * n / (n - 1.0);
    prof.checkpoint_mean.push_back(mean);
    prof.checkpoint_stderr.push_back(std::sqrt(var / n));
  }
  prof.mean_count = prof.checkpoint_mean.back();
  prof.mean_count_stderr = prof.checkpoint_stderr.back();
  return prof;
}

double khintchine_sum(const ApproximationFunction& psi, long Q) {
  if (Q < 2) throw DomainError("khintchine_sum: Q must be >= 2");
  // smallest terms first, with compensation
  double s = 0.0, comp = 0.0;
  for (long q = Q; q >= 2; --q) {
    const double v = psi(q);
    const double t = s + v;
    comp += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + comp;
}

}  // namespace horolab::diophantine
