#include "chppi/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chppi/error.hpp"
#include "chppi/rng.hpp"
#include "chppi/stats.hpp"

namespace chppi {

namespace {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

Eigen::MatrixXd xavier(Eigen::Index in, Eigen::Index out, Rng& rng) {
  double r = std::sqrt(6.0 / static_cast<double>(in + out));
  Eigen::MatrixXd w(in, out);
  for (Eigen::Index i = 0; i < in; ++i)
    for (Eigen::Index j = 0; j < out; ++j) w(i, j) = rng.uniform(-r, r);
  return w;
}

// first-moment/second-moment state for one parameter block
struct Adam {
  Eigen::MatrixXd m, v;
  void init(Eigen::Index r, Eigen::Index c) {
    m = Eigen::MatrixXd::Zero(r, c);
    v = Eigen::MatrixXd::Zero(r, c);
  }
  template <typename W, typename G>
  void step(W& w, const G& g, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * g.reshaped(m.rows(), m.cols());
    v = b2 * v +
        (1.0 - b2) * g.reshaped(m.rows(), m.cols()).array().square().matrix();
    double c1 = 1.0 - std::pow(b1, t);
    double c2 = 1.0 - std::pow(b2, t);
    w.reshaped(m.rows(), m.cols()).array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

Eigen::MatrixXd dropout_mask(Eigen::Index r, Eigen::Index c, double p, Rng& rng) {
  double keep = 1.0 - p;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return m;
}

}  // namespace

int OrdinalSchema::total_categories() const {
  int s = 0;
  for (const OrdinalVariable& v : variables) s += v.categories;
  return s;
}

int OrdinalSchema::encoded_width() const {
  return total_categories() - static_cast<int>(variables.size());
}

int OrdinalSchema::orientation_index() const {
  if (orientation_variable >= 0) return orientation_variable;
  return static_cast<int>(variables.size()) - 1;
}

Eigen::MatrixXd encode_thermometer(const OrdinalSchema& schema,
                                   const std::vector<std::vector<int>>& rows) {
  const std::size_t nvars = schema.variables.size();
  if (nvars == 0) raise(Errc::validation, "empty ordinal schema");
  for (const OrdinalVariable& v : schema.variables)
    if (v.categories < 2)
      raise(Errc::validation, "variable " + v.name + " needs at least 2 categories");
  const int d = schema.encoded_width();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != nvars)
      raise(Errc::validation, "row " + std::to_string(r) + " has wrong variable count");
    int col = 0;
    for (std::size_t i = 0; i < nvars; ++i) {
      int v = rows[r][i];
      int k = schema.variables[i].categories;
      if (v < 1 || v > k)
        raise(Errc::out_of_range_category,
              "value " + std::to_string(v) + " outside 1.." + std::to_string(k) +
                  " for variable " + schema.variables[i].name);
      for (int cat = 2; cat <= k; ++cat)
        x(static_cast<Eigen::Index>(r), col++) = v >= cat ? 1.0 : 0.0;
    }
  }
  return x;
}

Eigen::VectorXd AutoencoderModel::bottleneck(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a1 = ((x * w1).rowwise() + b1.transpose()).array().tanh();
  Eigen::MatrixXd z = ((a1 * w2).rowwise() + b2.transpose()).array().tanh();
  return z.col(0);
}

Eigen::MatrixXd AutoencoderModel::reconstruct(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a1 = ((x * w1).rowwise() + b1.transpose()).array().tanh();
  Eigen::MatrixXd z = ((a1 * w2).rowwise() + b2.transpose()).array().tanh();
  Eigen::MatrixXd a3 = ((z * w3).rowwise() + b3.transpose()).array().tanh();
  Eigen::MatrixXd logits = (a3 * w4).rowwise() + b4.transpose();
  return (1.0 / (1.0 + (-logits.array()).exp())).matrix();
}

AutoencoderModel train_autoencoder(const Eigen::MatrixXd& x, const AutoencoderConfig& cfg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (d < 2) raise(Errc::validation, "autoencoder input needs >= 2 columns");
  if (n < cfg.batch) raise(Errc::validation, "fewer rows than the batch size");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    raise(Errc::validation, "dropout must lie in [0,1)");

  const Eigen::Index d1 =
      cfg.d1 > 0 ? cfg.d1 : std::max<Eigen::Index>(8, (d + 1) / 2);

  Rng rng(cfg.seed);
  AutoencoderModel m;
  m.w1 = xavier(d, d1, rng);
  m.b1 = Eigen::VectorXd::Zero(d1);
  m.w2 = xavier(d1, 1, rng);
  m.b2 = Eigen::VectorXd::Zero(1);
  m.w3 = xavier(1, d1, rng);
  m.b3 = Eigen::VectorXd::Zero(d1);
  m.w4 = xavier(d1, d, rng);
  m.b4 = Eigen::VectorXd::Zero(d);

  Adam aw1, ab1, aw2, ab2, aw3, ab3, aw4, ab4;
  aw1.init(d, d1);
  ab1.init(d1, 1);
  aw2.init(d1, 1);
  ab2.init(1, 1);
  aw3.init(1, d1);
  ab3.init(d1, 1);
  aw4.init(d1, d);
  ab4.init(d, 1);

  const Eigen::Index b = cfg.batch;
  const int batches_per_epoch =
      static_cast<int>((n + b - 1) / b);
  Eigen::MatrixXd xb(b, d);
  int t = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int bi = 0; bi < batches_per_epoch; ++bi) {
      for (Eigen::Index r = 0; r < b; ++r)
        xb.row(r) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));

      Eigen::MatrixXd a1 = ((xb * m.w1).rowwise() + m.b1.transpose()).array().tanh();
      Eigen::MatrixXd m1 = dropout_mask(b, d1, cfg.dropout, rng);
      Eigen::MatrixXd a1d = a1.cwiseProduct(m1);
      Eigen::MatrixXd z = ((a1d * m.w2).rowwise() + m.b2.transpose()).array().tanh();
      Eigen::MatrixXd a3 = ((z * m.w3).rowwise() + m.b3.transpose()).array().tanh();
      Eigen::MatrixXd m3 = dropout_mask(b, d1, cfg.dropout, rng);
      Eigen::MatrixXd a3d = a3.cwiseProduct(m3);
      Eigen::MatrixXd logits = (a3d * m.w4).rowwise() + m.b4.transpose();
      Eigen::ArrayXXd y = 1.0 / (1.0 + (-logits.array()).exp());

      Eigen::ArrayXXd yc = y.max(kClampLo).min(kClampHi);
      double loss = -(xb.array() * yc.log() + (1.0 - xb.array()) * (1.0 - yc).log())
                         .rowwise()
                         .sum()
                         .mean();
      if (!std::isfinite(loss))
        raise(Errc::non_finite_loss, "loss diverged at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(bi));
      epoch_loss += loss;

      // gradient of mean-per-row summed BCE wrt logits
      Eigen::MatrixXd g4 = ((y - xb.array()) / static_cast<double>(b)).matrix();
      Eigen::MatrixXd gw4 = a3d.transpose() * g4;
      Eigen::VectorXd gb4 = g4.colwise().sum();
      Eigen::MatrixXd ga3 = (g4 * m.w4.transpose()).cwiseProduct(m3);
      Eigen::MatrixXd g3 = ga3.cwiseProduct((1.0 - a3.array().square()).matrix());
      Eigen::MatrixXd gw3 = z.transpose() * g3;
      Eigen::VectorXd gb3 = g3.colwise().sum();
      Eigen::MatrixXd gz = g3 * m.w3.transpose();
      Eigen::MatrixXd g2 = gz.cwiseProduct((1.0 - z.array().square()).matrix());
      Eigen::MatrixXd gw2 = a1d.transpose() * g2;
      Eigen::VectorXd gb2 = g2.colwise().sum();
      Eigen::MatrixXd ga1 = (g2 * m.w2.transpose()).cwiseProduct(m1);
      Eigen::MatrixXd g1 = ga1.cwiseProduct((1.0 - a1.array().square()).matrix());
      Eigen::MatrixXd gw1 = xb.transpose() * g1;
      Eigen::VectorXd gb1 = g1.colwise().sum();

      ++t;
      aw1.step(m.w1, gw1, cfg.learning_rate, t);
      aw2.step(m.w2, gw2, cfg.learning_rate, t);
      aw3.step(m.w3, gw3, cfg.learning_rate, t);
      aw4.step(m.w4, gw4, cfg.learning_rate, t);
      ab1.step(m.b1, gb1, cfg.learning_rate, t);
      ab2.step(m.b2, gb2, cfg.learning_rate, t);
      ab3.step(m.b3, gb3, cfg.learning_rate, t);
      ab4.step(m.b4, gb4, cfg.learning_rate, t);
    }
    m.epoch_loss.push_back(epoch_loss / batches_per_epoch);
  }
  return m;
}

double evaluate_reconstruction(const Eigen::MatrixXd& xhat, const Eigen::MatrixXd& x,
                               const OrdinalSchema& schema) {
  if (xhat.rows() != x.rows() || xhat.cols() != x.cols())
    raise(Errc::validation, "reconstruction shape mismatch");
  if (x.cols() != schema.encoded_width())
    raise(Errc::validation, "matrix width does not match the schema");
  const double weight = 1.0 / static_cast<double>(schema.total_categories());
  Eigen::ArrayXXd yc = xhat.array().max(kClampLo).min(kClampHi);
  // exp(x log y + (1-x) log(1-y)) is y where x=1 and 1-y where x=0
  Eigen::ArrayXXd factor = x.array() * yc + (1.0 - x.array()) * (1.0 - yc);
  return factor.rowwise().sum().mean() * weight;
}

double evaluate_model(const AutoencoderModel& model, const Eigen::MatrixXd& x,
                      const OrdinalSchema& schema) {
  return evaluate_reconstruction(model.reconstruct(x), x, schema);
}

HouseholdScores score_households(const AutoencoderModel& model, const Eigen::MatrixXd& x,
                                 const OrdinalSchema& schema,
                                 const std::vector<std::vector<int>>& rows) {
  if (static_cast<Eigen::Index>(rows.size()) != x.rows())
    raise(Errc::validation, "row metadata does not match the matrix");
  Eigen::VectorXd z = model.bottleneck(x);
  std::vector<double> raw(z.data(), z.data() + z.size());

  const int anchor = schema.orientation_index();
  std::vector<double> anchor_vals(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    anchor_vals[i] = static_cast<double>(rows[i][static_cast<std::size_t>(anchor)]);

  HouseholdScores out;
  double rho = 0.0;
  bool correlated = true;
  try {
    rho = spearman_on_rankits(raw, anchor_vals);
  } catch (const Error& e) {
    if (e.code() != Errc::zero_variance) throw;
    correlated = false;  // degenerate score or anchor: keep the raw sign
  }
  if (correlated && rho < 0) {
    for (double& v : raw) v = -v;
    out.flipped = true;
  }

  double lo = *std::min_element(raw.begin(), raw.end());
  double hi = *std::max_element(raw.begin(), raw.end());
  out.s.resize(raw.size());
  if (hi > lo) {
    for (std::size_t i = 0; i < raw.size(); ++i) out.s[i] = (raw[i] - lo) / (hi - lo);
  } else {
    std::fill(out.s.begin(), out.s.end(), 0.5);
  }
  return out;
}

double tukey_trimean(std::vector<double> values) {
  if (values.empty()) raise(Errc::domain_error, "trimean of an empty set");
  std::sort(values.begin(), values.end());
  double q1 = quantile_sorted(values, 0.25);
  double q2 = quantile_sorted(values, 0.5);
  double q3 = quantile_sorted(values, 0.75);
  return 0.25 * q1 + 0.5 * q2 + 0.25 * q3;
}

BlockSei trimean_blocks(const std::vector<double>& s, const std::vector<std::string>& block_of,
                        const std::vector<std::string>& block_registry) {
  if (s.size() != block_of.size()) raise(Errc::validation, "score/block length mismatch");
  std::map<std::string, std::vector<double>> grouped;
  for (std::size_t i = 0; i < s.size(); ++i) grouped[block_of[i]].push_back(s[i]);
  BlockSei out;
  std::set<std::string> seen;
  for (auto& [block, vals] : grouped) {
    out.eta[block] = tukey_trimean(std::move(vals));
    seen.insert(block);
  }
  for (const std::string& b : block_registry)
    if (!seen.count(b)) out.empty_blocks.push_back(b);
  return out;
}

}  // namespace chppi
