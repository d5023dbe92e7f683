#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

#include "cle/error.hpp"

namespace cle::stats {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // from the residual-scaled covariance
  double intercept_se = 0.0;
  double r2 = 1.0;
  std::size_t points = 0;
};

/// Two-sided 95% Student-t multiplier for `dof` degrees of freedom.
inline double t975(std::size_t dof) {
  if (dof == 0) return std::numeric_limits<double>::infinity();
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

/// Weighted least squares y ≈ intercept + slope·x. Empty `w` means unit weights.
/// The covariance is scaled by the weighted residual variance, so an exact
/// line yields zero standard errors.
inline LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> w = {}) {
  const std::size_t n = x.size();
  if (y.size() != n || (!w.empty() && w.size() != n))
    throw NumericalError("line fit: mismatched input lengths");
  if (n < 2) throw NumericalError("line fit: need at least two points");

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += wi * dx * dx;
    sxy += wi * dx * dy;
    syy += wi * dy * dy;
  }
  if (!(sxx > 0)) throw NumericalError("line fit: abscissae are degenerate");

  LineFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += wi * r * r;
  }
  fit.r2 = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  if (n > 2) {
    const double s2 = ssr / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  }
  return fit;
}

/// Binomial standard error of a proportion.
inline double binomial_stderr(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace cle::stats
