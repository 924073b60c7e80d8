#pragma once

#include <cstddef>
#include <vector>

namespace chppi {

// Smooth distribution estimate used to map raw magnitudes onto [0,1].
//
// Primary path: the log-density is a natural cubic spline over knots placed
// at data quantiles; coefficients come from concave maximum likelihood
// (Newton with line search) and knots are pruned greedily while AIC
// improves. The CDF is the normalized integral of the fitted density over
// the padded data range, so it is strictly increasing there and clamps to 0
// and 1 outside.
//
// When that fit is impossible (zero spread) or diverges, a Gaussian-kernel
// smoothed empirical CDF takes over and the estimate is flagged.
class SmoothCdf {
 public:
  double operator()(double x) const;

  bool fallback() const { return fallback_; }
  int knots() const { return knot_count_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

 private:
  friend SmoothCdf fit_smooth_cdf(const std::vector<double>& x, int max_knots);

  bool fallback_ = false;
  int knot_count_ = 0;
  double lo_ = 0.0, hi_ = 1.0;

  // spline path: cumulative mass on a uniform grid over [lo_, hi_]
  std::vector<double> grid_cdf_;

  // kernel path
  std::vector<double> data_;
  double bandwidth_ = 1.0;
};

// Fits on a sample of at least 10 values. Throws domain_error on smaller
// samples or non-finite input.
SmoothCdf fit_smooth_cdf(const std::vector<double>& x, int max_knots = 5);

}  // namespace chppi
