#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace chppi {

// Household socio-economic score from ordinal census variables: thermometer
// encoding, a narrow-bottleneck autoencoder trained to reproduce the codes,
// and the bottleneck activation as the scalar index.

struct OrdinalVariable {
  std::string name;
  int categories = 2;  // K >= 2, values run 1..K
};

struct OrdinalSchema {
  std::vector<OrdinalVariable> variables;
  // variable whose order fixes the sign of the index; -1 means the last one
  int orientation_variable = -1;

  int total_categories() const;  // sum of K
  int encoded_width() const;     // sum of K-1
  int orientation_index() const;
};

// Thermometer encoding: for variable i with value v, column k in 2..K_i is
// 1 exactly when v >= k. Throws out_of_range_category.
Eigen::MatrixXd encode_thermometer(const OrdinalSchema& schema,
                                   const std::vector<std::vector<int>>& rows);

struct AutoencoderConfig {
  int d1 = 0;  // 0 derives max(8, ceil(D/2))
  double dropout = 0.5;
  int epochs = 60;
  int batch = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

// Width-1 bottleneck autoencoder D -> d1 -> 1 -> d1 -> D, tanh hidden
// layers, logistic output. Trained with ADAM on binary cross-entropy over
// batches resampled with replacement; inverted dropout on the two wide
// hidden layers only. Single-threaded and bit-deterministic per seed.
struct AutoencoderModel {
  Eigen::MatrixXd w1, w2, w3, w4;  // stored input-dim x output-dim
  Eigen::VectorXd b1, b2, b3, b4;
  std::vector<double> epoch_loss;

  Eigen::VectorXd bottleneck(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& x) const;
};

// Throws non_finite_loss with diagnostics if the loss diverges.
AutoencoderModel train_autoencoder(const Eigen::MatrixXd& x, const AutoencoderConfig& cfg);

// Population explanation metric: mean over rows and code cells, each cell
// contributing exp(x log xhat + (1-x) log(1-xhat)) / total_categories, with
// xhat clamped to [1e-7, 1-1e-7].
double evaluate_reconstruction(const Eigen::MatrixXd& xhat, const Eigen::MatrixXd& x,
                               const OrdinalSchema& schema);
double evaluate_model(const AutoencoderModel& model, const Eigen::MatrixXd& x,
                      const OrdinalSchema& schema);

struct HouseholdScores {
  std::vector<double> s;  // [0,1], min 0 and max 1 unless constant
  bool flipped = false;   // sign was inverted to satisfy the orientation rule
};

// Bottleneck activations, sign-oriented to correlate positively with the
// schema's orientation variable, then min-max rescaled.
HouseholdScores score_households(const AutoencoderModel& model, const Eigen::MatrixXd& x,
                                 const OrdinalSchema& schema,
                                 const std::vector<std::vector<int>>& rows);

// Tukey trimean: quartile-weighted location summary with linearly
// interpolated quantiles.
double tukey_trimean(std::vector<double> values);

struct BlockSei {
  std::map<std::string, double> eta;       // block -> trimean of household scores
  std::vector<std::string> empty_blocks;   // registered blocks with no households
};

// Per-block trimean. block_of[i] names the block of household i; blocks in
// the registry with no households are flagged, not scored.
BlockSei trimean_blocks(const std::vector<double>& s, const std::vector<std::string>& block_of,
                        const std::vector<std::string>& block_registry);

}  // namespace chppi
