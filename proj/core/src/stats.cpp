#include "chppi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chppi/error.hpp"

namespace chppi {

std::vector<double> mean_ranks(const std::vector<double>& x) {
  std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // index tie-break keeps the sort bit-stable; equal values then share a
  // mean rank regardless of that internal order
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return a < b;
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    double mean = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> rankit(const std::vector<double>& x) {
  if (x.empty()) raise(Errc::domain_error, "rankit of an empty vector");
  std::vector<double> r = mean_ranks(x);
  double n = static_cast<double>(x.size());
  for (double& v : r) v = (v - 0.5) / n;
  return r;
}

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double phi_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) raise(Errc::domain_error, "phi_inverse requires p in (0,1)");
  // rational approximation in three regions (Acklam's coefficients)
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double z;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement against the exact CDF
  double e = phi(z) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z);
  z = z - u / (1.0 + 0.5 * z * u);
  return z;
}

double spearman_on_rankits(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) raise(Errc::domain_error, "spearman: length mismatch");
  if (x.size() < 2) raise(Errc::domain_error, "spearman: need at least 2 observations");
  std::vector<double> rx = rankit(x);
  std::vector<double> ry = rankit(y);
  double n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = rx[i] - mx;
    double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    raise(Errc::zero_variance, "spearman: constant input vector");
  return sxy / std::sqrt(sxx * syy);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) raise(Errc::domain_error, "quantile of an empty vector");
  if (!(p >= 0.0 && p <= 1.0)) raise(Errc::domain_error, "quantile level outside [0,1]");
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  double lo = std::floor(h);
  std::size_t i = static_cast<std::size_t>(lo);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i]);
}

SpcaResult spca(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index j = x.cols();
  if (n < 2 || j < 1) raise(Errc::degenerate_matrix, "spca: need >= 2 rows and >= 1 column");

  SpcaResult res;
  std::vector<std::vector<double>> cols;
  for (Eigen::Index c = 0; c < j; ++c) {
    double lo = x.col(c).minCoeff();
    double hi = x.col(c).maxCoeff();
    if (lo == hi) {
      res.warnings.push_back("spca: dropped constant column " + std::to_string(c));
      continue;
    }
    std::vector<double> col(x.col(c).data(), x.col(c).data() + n);
    cols.push_back(std::move(col));
    res.kept_columns.push_back(static_cast<int>(c));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(cols.size());
  if (m == 0) raise(Errc::degenerate_matrix, "spca: all columns constant");
  if (n <= m) raise(Errc::degenerate_matrix, "spca: fewer rows than kept columns");

  Eigen::MatrixXd z(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    std::vector<double> rk = rankit(cols[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < n; ++r) z(r, c) = phi_inverse(rk[static_cast<std::size_t>(r)]);
  }
  Eigen::RowVectorXd mean = z.colwise().mean();
  z.rowwise() -= mean;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  Eigen::MatrixXd v = svd.matrixV();

  // orient each component so its largest-magnitude loading is positive
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index imax = 0;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    if (v(imax, c) < 0) v.col(c) = -v.col(c);
  }

  res.scores = z * v;
  res.spectrum = s;
  res.components = v;
  double total = s.squaredNorm();
  if (total <= 0.0) raise(Errc::degenerate_matrix, "spca: zero spectrum");
  res.explained = s.array().square() / total;
  return res;
}

}  // namespace chppi
