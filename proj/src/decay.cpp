#include "horolab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "horolab/common.hpp"

namespace horolab {

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("fit_loglog: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateFitError("fit_loglog: need at least two points");

  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DegenerateFitError("fit_loglog: non-positive or non-finite value");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw DegenerateFitError("fit_loglog: abscissae coincide");

  LogLogFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  const double dof = n > 2 ? static_cast<double>(n - 2) : 1.0;
  fit.residual_se = std::sqrt(sse / dof);
  fit.slope_stderr = n > 2 ? std::sqrt(sse / dof / sxx) : 0.0;
  if (syy <= 0.0) {
    fit.degenerate = true;
    fit.slope = 0.0;
    fit.r2 = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.r2 = 1.0 - sse / syy;
  }
  return fit;
}

std::vector<double> geometric_window(double base, double span, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points) + 1);
  out.push_back(base);
  for (int j = 1; j <= points; ++j) {
    out.push_back(base * std::pow(span, static_cast<double>(j) / points));
  }
  return out;
}

std::vector<double> geometric_grid(double first, double ratio, int count) {
  if (count < 1 || !(first > 0.0) || !(ratio > 0.0)) {
    throw DomainError("geometric_grid: need count >= 1 and positive first/ratio");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  double v = first;
  for (int k = 0; k < count; ++k) {
    out.push_back(v);
    v *= ratio;
  }
  return out;
}

const char* to_string(ReportStatus s) {
  switch (s) {
    case ReportStatus::Ok: return "ok";
    case ReportStatus::Inconclusive: return "inconclusive";
    case ReportStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

bool DecayReport::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void fit_report(DecayReport& report) {
  std::sort(report.rows.begin(), report.rows.end(),
            [](const DecayRow& a, const DecayRow& b) { return a.param < b.param; });
  std::vector<double> xs, ys;
  for (const auto& r : report.rows) {
    if (!(r.error > 0.0)) {
      report.status = ReportStatus::Degenerate;
      report.flags.push_back("zero_error");
      report.exponent = report.exponent_stderr = 0.0;
      report.r2 = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    xs.push_back(r.param);
    ys.push_back(r.error);
  }
  const LogLogFit fit = fit_loglog(xs, ys);
  report.exponent = report.direction == DecayDirection::ToZero ? fit.slope : -fit.slope;
  report.exponent_stderr = fit.slope_stderr;
  report.r2 = fit.r2;
  report.residual_se = fit.residual_se;
  if (fit.degenerate) {
    report.status = ReportStatus::Degenerate;
    report.flags.push_back("constant_series");
  }
}

}  // namespace horolab
