#include "chppi/smooth_cdf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "chppi/error.hpp"
#include "chppi/stats.hpp"

namespace chppi {

namespace {

constexpr int kGrid = 513;

// Natural cubic spline basis on knots in [0,1]; linear tails, constant term
// absorbed by density normalization. Dimension is knots-1.
struct SplineBasis {
  std::vector<double> knots;

  int dim() const { return static_cast<int>(knots.size()) - 1; }

  void eval(double x, Eigen::VectorXd& out) const {
    const int k = static_cast<int>(knots.size());
    const double tk = knots[static_cast<std::size_t>(k - 1)];
    auto truncated = [&](int i) {
      double a = std::max(x - knots[static_cast<std::size_t>(i)], 0.0);
      double b = std::max(x - tk, 0.0);
      return (a * a * a - b * b * b) / (tk - knots[static_cast<std::size_t>(i)]);
    };
    out.resize(dim());
    out(0) = x;
    if (k < 3) return;
    const double dlast = truncated(k - 2);
    for (int i = 0; i + 2 < k; ++i) out(i + 1) = truncated(i) - dlast;
  }
};

struct FitOutcome {
  bool ok = false;
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta;
  std::vector<double> grid_cdf;
};

// Maximum-likelihood fit of a log-spline density on [0,1] data. Concave
// objective; Newton with a halving line search and a small ridge on the
// Hessian.
FitOutcome fit_density(const std::vector<double>& u, const SplineBasis& basis) {
  FitOutcome out;
  const int p = basis.dim();
  const std::size_t n = u.size();

  Eigen::MatrixXd bgrid(kGrid, p);
  Eigen::VectorXd tmp;
  for (int g = 0; g < kGrid; ++g) {
    double x = static_cast<double>(g) / (kGrid - 1);
    basis.eval(x, tmp);
    bgrid.row(g) = tmp.transpose();
  }
  // trapezoid weights on the uniform grid
  Eigen::VectorXd w = Eigen::VectorXd::Ones(kGrid);
  w(0) = w(kGrid - 1) = 0.5;
  w *= 1.0 / (kGrid - 1);

  Eigen::VectorXd bsum = Eigen::VectorXd::Zero(p);
  for (double x : u) {
    basis.eval(x, tmp);
    bsum += tmp;
  }

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta(kGrid), q(kGrid);

  auto loglik = [&](const Eigen::VectorXd& th) {
    eta = bgrid * th;
    double m = eta.maxCoeff();
    double z = (w.array() * (eta.array() - m).exp()).sum();
    if (!(z > 0.0) || !std::isfinite(z)) return -std::numeric_limits<double>::infinity();
    return bsum.dot(th) - static_cast<double>(n) * (m + std::log(z));
  };

  double ll = loglik(theta);
  bool converged = false;
  for (int iter = 0; iter < 80; ++iter) {
    // probabilities over the grid under the current density
    eta = bgrid * theta;
    double m = eta.maxCoeff();
    q = w.array() * (eta.array() - m).exp();
    double z = q.sum();
    if (!(z > 0.0) || !std::isfinite(z)) return out;
    q /= z;
    Eigen::VectorXd mu = bgrid.transpose() * q;
    Eigen::MatrixXd centered = bgrid.rowwise() - mu.transpose();
    Eigen::MatrixXd cov = centered.transpose() * (q.asDiagonal() * centered);
    cov.diagonal().array() += 1e-9 * std::max(1.0, cov.trace());

    Eigen::VectorXd grad = bsum - static_cast<double>(n) * mu;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-8 * static_cast<double>(n)) {
      converged = true;
      break;
    }
    Eigen::VectorXd step = cov.ldlt().solve(grad / static_cast<double>(n));
    if (!step.allFinite()) return out;

    double scale = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      double cand = loglik(theta + scale * step);
      if (std::isfinite(cand) && cand >= ll - 1e-12 * std::abs(ll)) {
        theta += scale * step;
        improved = cand > ll;
        ll = cand;
        break;
      }
      scale *= 0.5;
    }
    if (!improved && grad.lpNorm<Eigen::Infinity>() <= 1e-4 * static_cast<double>(n)) {
      converged = true;
      break;
    }
    if (!improved && scale < 1e-11) break;
  }
  if (!std::isfinite(ll)) return out;
  if (!converged) {
    // accept a stalled fit only if the gradient is already small
    eta = bgrid * theta;
    double m = eta.maxCoeff();
    q = w.array() * (eta.array() - m).exp();
    q /= q.sum();
    Eigen::VectorXd mu = bgrid.transpose() * q;
    if ((bsum - static_cast<double>(n) * mu).lpNorm<Eigen::Infinity>() >
        1e-3 * static_cast<double>(n))
      return out;
  }

  // cumulative trapezoid of the fitted density, pinned to [0,1]
  eta = bgrid * theta;
  double m = eta.maxCoeff();
  std::vector<double> dens(kGrid);
  for (int g = 0; g < kGrid; ++g) dens[static_cast<std::size_t>(g)] = std::exp(eta(g) - m);
  std::vector<double> cum(kGrid, 0.0);
  for (int g = 1; g < kGrid; ++g)
    cum[static_cast<std::size_t>(g)] =
        cum[static_cast<std::size_t>(g - 1)] +
        0.5 * (dens[static_cast<std::size_t>(g - 1)] + dens[static_cast<std::size_t>(g)]);
  double total = cum.back();
  if (!(total > 0.0) || !std::isfinite(total)) return out;
  for (double& c : cum) c /= total;
  cum.front() = 0.0;
  cum.back() = 1.0;

  out.ok = true;
  out.loglik = ll;
  out.theta = theta;
  out.grid_cdf = std::move(cum);
  return out;
}

}  // namespace

SmoothCdf fit_smooth_cdf(const std::vector<double>& x, int max_knots) {
  if (x.size() < 10) raise(Errc::domain_error, "smooth cdf: need at least 10 observations");
  for (double v : x)
    if (!std::isfinite(v)) raise(Errc::domain_error, "smooth cdf: non-finite observation");
  if (max_knots < 2) max_knots = 2;

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double mn = sorted.front();
  const double mx = sorted.back();

  SmoothCdf cdf;

  auto kernel_fallback = [&]() {
    cdf.fallback_ = true;
    cdf.knot_count_ = 0;
    cdf.data_ = sorted;
    double n = static_cast<double>(sorted.size());
    double mean = 0;
    for (double v : sorted) mean += v;
    mean /= n;
    double var = 0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / n);
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0) spread = std::min(spread, iqr / 1.349);
    if (spread <= 0) spread = std::max(1e-9, 1e-6 * std::max(1.0, std::abs(mean)));
    cdf.bandwidth_ = 1.06 * spread * std::pow(n, -0.2);
    cdf.lo_ = mn;
    cdf.hi_ = mx;
    return cdf;
  };

  if (!(mx > mn)) return kernel_fallback();

  const double pad = 1e-3 * (mx - mn);
  cdf.lo_ = mn - pad;
  cdf.hi_ = mx + pad;
  const double span = cdf.hi_ - cdf.lo_;

  // all density work happens on [0,1]
  std::vector<double> u(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) u[i] = (sorted[i] - cdf.lo_) / span;

  auto knots_at = [&](int k) {
    std::vector<double> t;
    for (int i = 0; i < k; ++i)
      t.push_back(quantile_sorted(u, static_cast<double>(i) / (k - 1)));
    std::vector<double> uniq;
    for (double v : t)
      if (uniq.empty() || v - uniq.back() > 1e-6) uniq.push_back(v);
    return uniq;
  };

  std::vector<double> knots = knots_at(max_knots);
  if (knots.size() < 2) return kernel_fallback();

  FitOutcome best = fit_density(u, SplineBasis{knots});
  if (!best.ok) return kernel_fallback();
  double best_aic = -2.0 * best.loglik + 2.0 * (static_cast<double>(knots.size()) - 1.0);

  // greedy interior-knot deletion while AIC improves; the two boundary
  // knots stay
  while (knots.size() > 2) {
    double round_aic = best_aic;
    std::vector<double> round_knots;
    FitOutcome round_fit;
    for (std::size_t del = 1; del + 1 < knots.size(); ++del) {
      std::vector<double> cand = knots;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(del));
      FitOutcome f = fit_density(u, SplineBasis{cand});
      if (!f.ok) continue;
      double aic = -2.0 * f.loglik + 2.0 * (static_cast<double>(cand.size()) - 1.0);
      if (aic < round_aic) {
        round_aic = aic;
        round_knots = cand;
        round_fit = std::move(f);
      }
    }
    if (round_knots.empty()) break;
    knots = std::move(round_knots);
    best = std::move(round_fit);
    best_aic = round_aic;
  }

  cdf.knot_count_ = static_cast<int>(knots.size());
  cdf.grid_cdf_ = std::move(best.grid_cdf);
  return cdf;
}

double SmoothCdf::operator()(double x) const {
  if (fallback_) {
    double acc = 0.0;
    for (double v : data_) acc += phi((x - v) / bandwidth_);
    return acc / static_cast<double>(data_.size());
  }
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  double pos = (x - lo_) / (hi_ - lo_) * (kGrid - 1);
  int g = static_cast<int>(pos);
  if (g >= kGrid - 1) return 1.0;
  double frac = pos - g;
  double lo = grid_cdf_[static_cast<std::size_t>(g)];
  double hi = grid_cdf_[static_cast<std::size_t>(g + 1)];
  return lo + frac * (hi - lo);
}

}  // namespace chppi
