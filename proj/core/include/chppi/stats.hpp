#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace chppi {

// Fractional ranks, 1-based, ties carry the mean of their rank range.
std::vector<double> mean_ranks(const std::vector<double>& x);

// (rank - 0.5) / n with mean ranks on ties; values land strictly inside
// (0, 1). Depends on the input only through its rank order.
std::vector<double> rankit(const std::vector<double>& x);

// Standard normal CDF and its inverse. phi_inverse is a rational
// approximation polished with one Halley step, good to ~1e-9 in probability
// after the round trip. Throws domain_error outside (0, 1).
double phi(double z);
double phi_inverse(double p);

// Pearson correlation of the rankit transforms of x and y, which equals the
// tie-corrected Spearman coefficient. Throws zero_variance when either side
// is constant.
double spearman_on_rankits(const std::vector<double>& x, const std::vector<double>& y);

// Quantile with linear interpolation between order statistics
// (h = (n-1)p + 1). Input must be sorted ascending.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct SpcaResult {
  Eigen::MatrixXd scores;        // n x m projections, component variance descending
  Eigen::VectorXd spectrum;      // singular values of the centered normal-score matrix
  Eigen::VectorXd explained;     // variance shares, sum exactly normalized to 1
  Eigen::MatrixXd components;    // kept_cols x m eigenvector matrix, columns unit norm
  std::vector<int> kept_columns; // original column indexes with variation
  std::vector<std::string> warnings;
};

// PCA on normal scores: each column is rank-transformed, mapped through the
// inverse normal CDF, centered, then decomposed by SVD. Scores depend on
// the data only through per-column rank orders. Constant columns are
// dropped with a warning; throws degenerate_matrix when nothing usable
// remains or n <= kept column count.
SpcaResult spca(const Eigen::MatrixXd& x);

}  // namespace chppi
