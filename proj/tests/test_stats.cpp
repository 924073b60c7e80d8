#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "chppi/error.hpp"
#include "chppi/rng.hpp"
#include "chppi/smooth_cdf.hpp"
#include "chppi/stats.hpp"
#include "oracles.hpp"

using namespace chppi;

TEST_SUITE("stats") {

TEST_CASE("rankit of four distinct values") {
  std::vector<double> r = rankit({10.0, 40.0, 20.0, 30.0});
  CHECK(r[0] == 0.125);
  CHECK(r[1] == 0.875);
  CHECK(r[2] == 0.375);
  CHECK(r[3] == 0.625);
}

TEST_CASE("rankit tie rule: constant vector maps to 0.5") {
  std::vector<double> r = rankit({7, 7, 7, 7, 7});
  for (double v : r) CHECK(v == 0.5);  // mean rank 3 -> (3 - 0.5)/5
}

TEST_CASE("rankit ignores monotone re-expression of the input") {
  Rng rng(5);
  std::vector<double> x;
  for (int i = 0; i < 200; ++i) x.push_back(rng.uniform(-3, 3));
  std::vector<double> cubed = x;
  for (double& v : cubed) v = v * v * v;
  std::vector<double> a = rankit(x), b = rankit(cubed);
  CHECK(a == b);  // bitwise: ranks are identical
}

TEST_CASE("mean_ranks shares the average over tie groups") {
  std::vector<double> r = mean_ranks({3, 1, 3, 2});
  CHECK(r[0] == 3.5);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 3.5);
  CHECK(r[3] == 2.0);
}

TEST_CASE("phi_inverse center, symmetry, reference point") {
  CHECK(phi_inverse(0.5) == 0.0);
  CHECK(std::abs(phi_inverse(0.975) - 1.959964) < 1e-5);
  for (double p : {0.01, 0.1, 0.25, 0.4, 0.49})
    CHECK(std::abs(phi_inverse(p) + phi_inverse(1 - p)) < 1e-9);
  CHECK_THROWS_AS(phi_inverse(0.0), Error);
  CHECK_THROWS_AS(phi_inverse(1.0), Error);
}

TEST_CASE("phi round trip stays within 1e-9") {
  for (int i = 1; i < 1000; ++i) {
    double p = i / 1000.0;
    CHECK(std::abs(phi(phi_inverse(p)) - p) < 1e-9);
  }
  // tails
  for (double p : {1e-6, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6})
    CHECK(std::abs(phi(phi_inverse(p)) - p) < 1e-9);
}

TEST_CASE("spearman endpoints and textbook table") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> y = {2, 4, 6, 8, 10, 12};
  CHECK(spearman_on_rankits(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> ny = y;
  for (double& v : ny) v = -v;
  CHECK(spearman_on_rankits(x, ny) == doctest::Approx(-1.0).epsilon(1e-12));

  // ties on both sides against the independent mean-rank Pearson
  std::vector<double> a = {1.0, 2.0, 2.0, 3.0, 5.0, 5.0};
  std::vector<double> b = {2.5, 2.5, 1.0, 4.0, 4.0, 6.0};
  CHECK(spearman_on_rankits(a, b) == doctest::Approx(oracle::spearman(a, b)).epsilon(1e-12));

  CHECK_THROWS_AS(spearman_on_rankits({1, 1, 1}, {1, 2, 3}), Error);
}

TEST_CASE("quantile_sorted linear interpolation") {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(2.75).epsilon(1e-15));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(quantile_sorted(v, 0.75) == doctest::Approx(6.25).epsilon(1e-15));
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 8.0);
}

TEST_CASE("spca single column explains everything") {
  Rng rng(9);
  Eigen::MatrixXd x(50, 1);
  for (int i = 0; i < 50; ++i) x(i, 0) = rng.uniform(0, 1);
  SpcaResult r = spca(x);
  REQUIRE(r.explained.size() == 1);
  CHECK(r.explained(0) == 1.0);
}

TEST_CASE("spca comonotone pair collapses to one component") {
  Rng rng(13);
  Eigen::MatrixXd x(100, 2);
  for (int i = 0; i < 100; ++i) {
    double v = rng.uniform(-2, 2);
    x(i, 0) = v;
    x(i, 1) = std::exp(v);  // strictly increasing transform
  }
  SpcaResult r = spca(x);
  CHECK(std::abs(r.explained(0) - 1.0) < 1e-9);
  CHECK(std::abs(r.explained.sum() - 1.0) < 1e-12);
}

TEST_CASE("spca coordinates survive cubing a column bit for bit") {
  Rng rng(17);
  Eigen::MatrixXd x(80, 3);
  for (int i = 0; i < 80; ++i)
    for (int c = 0; c < 3; ++c) x(i, c) = rng.normal();
  SpcaResult base = spca(x);

  Eigen::MatrixXd cubed = x;
  for (int i = 0; i < 80; ++i) cubed(i, 1) = std::pow(x(i, 1), 3);
  SpcaResult after = spca(cubed);

  REQUIRE(base.scores.rows() == after.scores.rows());
  REQUIRE(base.scores.cols() == after.scores.cols());
  CHECK(std::memcmp(base.scores.data(), after.scores.data(),
                    sizeof(double) * std::size_t(base.scores.size())) == 0);
}

TEST_CASE("spca spectrum matches a dense eigensolver on the score covariance") {
  Rng rng(19);
  const int n = 200;
  Eigen::MatrixXd x(n, 3);
  for (int i = 0; i < n; ++i) {
    double f = rng.normal();
    x(i, 0) = f + 0.5 * rng.normal();
    x(i, 1) = -f + 0.7 * rng.normal();
    x(i, 2) = rng.normal();
  }
  SpcaResult r = spca(x);

  // rebuild the centered normal-score matrix independently
  Eigen::MatrixXd z(n, 3);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) col[std::size_t(i)] = x(i, c);
    std::vector<double> rk = rankit(col);
    for (int i = 0; i < n; ++i) z(i, c) = phi_inverse(rk[std::size_t(i)]);
  }
  Eigen::RowVectorXd mean = z.colwise().mean();
  z.rowwise() -= mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z.transpose() * z);
  // eigenvalues ascending; spectrum is singular values descending
  for (int c = 0; c < 3; ++c) {
    double want = std::sqrt(std::max(0.0, eig.eigenvalues()(2 - c)));
    CHECK(r.spectrum(c) == doctest::Approx(want).epsilon(1e-8));
  }

  // score columns are uncorrelated
  Eigen::MatrixXd cov = r.scores.transpose() * r.scores / double(n);
  CHECK(std::abs(cov(0, 1)) < 1e-8);
  CHECK(std::abs(cov(0, 2)) < 1e-8);
  CHECK(std::abs(cov(1, 2)) < 1e-8);

  CHECK(std::abs(r.explained.sum() - 1.0) < 1e-12);
  for (int c = 0; c < 3; ++c) {
    CHECK(r.explained(c) >= 0.0);
    CHECK(r.explained(c) <= 1.0);
  }
}

TEST_CASE("spca drops constant columns with a warning") {
  Eigen::MatrixXd x(20, 2);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i;
    x(i, 1) = 3.0;
  }
  SpcaResult r = spca(x);
  REQUIRE(r.kept_columns.size() == 1);
  CHECK(r.kept_columns[0] == 0);
  CHECK(r.warnings.size() == 1);
  Eigen::MatrixXd bad(5, 1);
  bad.setConstant(1.0);
  CHECK_THROWS_AS(spca(bad), Error);
}

TEST_CASE("smooth cdf tracks the empirical distribution of a uniform sample") {
  Rng rng(29);
  std::vector<double> x;
  for (int i = 0; i < 1000; ++i) x.push_back(rng.uniform(0, 1));
  SmoothCdf f = fit_smooth_cdf(x);
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double worst = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double ecdf = (double(i) + 0.5) / double(sorted.size());
    worst = std::max(worst, std::abs(f(sorted[i]) - ecdf));
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("smooth cdf is centered on a normal sample") {
  Rng rng(41);
  std::vector<double> x;
  for (int i = 0; i < 1000; ++i) x.push_back(rng.normal());
  SmoothCdf f = fit_smooth_cdf(x);
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  double median = quantile_sorted(sorted, 0.5);
  CHECK(f(median) >= 0.45);
  CHECK(f(median) <= 0.55);

  // Kolmogorov-Smirnov against the sample itself
  double ks = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double u = f(sorted[i]);
    ks = std::max(ks, std::abs(u - (double(i) + 1.0) / 1000.0));
    ks = std::max(ks, std::abs(u - double(i) / 1000.0));
  }
  CHECK(ks <= 0.06);
}

TEST_CASE("smooth cdf is monotone and clamps outside the support") {
  Rng rng(43);
  std::vector<double> x;
  for (int i = 0; i < 300; ++i) x.push_back(rng.normal() * 2 + 1);
  SmoothCdf f = fit_smooth_cdf(x);
  double prev = -1;
  for (int i = 0; i <= 400; ++i) {
    double q = -8 + i * 0.05;
    double v = f(q);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(f(f.support_lo() - 100) == 0.0);
  CHECK(f(f.support_hi() + 100) == 1.0);
}

TEST_CASE("smooth cdf falls back on zero spread and rejects tiny samples") {
  std::vector<double> flat(50, 3.25);
  SmoothCdf f = fit_smooth_cdf(flat);
  CHECK(f.fallback());
  CHECK(f(3.25) > 0.0);
  CHECK(f(3.25) < 1.0);
  CHECK_THROWS_AS(fit_smooth_cdf({1, 2, 3}), Error);
}

}  // TEST_SUITE
