#include "cwl/baselines.hpp"

#include <cmath>
#include <random>

#include "cwl/error.hpp"

namespace cwl {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// (H^T H + lambda I)^{-1} H^T T
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& h, const Eigen::MatrixXd& target, double ridge) {
  if (ridge < 0.0) throw Error("InvalidConfig", "ridge parameter must be >= 0");
  Eigen::MatrixXd gram = h.transpose() * h;
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd rhs = h.transpose() * target;
  if (ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < gram.rows()) {
      throw Error("SingularSystem", "H^T H is rank deficient (rank " + std::to_string(lu.rank()) +
                                        " of " + std::to_string(gram.rows()) + ") and ridge is 0");
    }
    return lu.solve(rhs);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw Error("SingularSystem", "ridge system not solvable");
  return ldlt.solve(rhs);
}

}  // namespace

Eigen::MatrixXd ElmModel::hidden(const Eigen::MatrixXd& x) const {
  if (x.cols() != w_in.cols()) throw Error("ShapeMismatch", "ELM input width mismatch");
  Eigen::MatrixXd z = x * w_in.transpose();
  z.rowwise() += bias.transpose();
  return sigmoid(z);
}

Eigen::MatrixXd ElmModel::scores(const Eigen::MatrixXd& x) const { return hidden(x) * beta; }

std::vector<int> ElmModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd s = scores(x);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(r, c) > s(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

ElmModel elm_init(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1) throw Error("InvalidConfig", "ELM sizes must be >= 1");
  std::mt19937_64 rng(seed);
  const double limit = std::sqrt(3.0 / static_cast<double>(input_dim));
  std::uniform_real_distribution<double> w_dist(-limit, limit);
  std::uniform_real_distribution<double> b_dist(-1.0, 1.0);
  ElmModel m;
  m.w_in.resize(hidden, input_dim);
  for (Eigen::Index r = 0; r < hidden; ++r) {
    for (Eigen::Index c = 0; c < input_dim; ++c) m.w_in(r, c) = w_dist(rng);
  }
  m.bias.resize(hidden);
  for (Eigen::Index r = 0; r < hidden; ++r) m.bias(r) = b_dist(rng);
  return m;
}

ElmModel elm_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_onehot, Eigen::Index hidden,
                 double ridge, std::uint64_t seed) {
  if (x.rows() < 1) throw Error("EmptyInput", "ELM needs at least one row");
  if (y_onehot.rows() != x.rows()) throw Error("ShapeMismatch", "X and Y differ in row count");
  ElmModel m = elm_init(x.cols(), hidden, seed);
  m.beta = ridge_solve(m.hidden(x), y_onehot, ridge);
  return m;
}

Eigen::MatrixXd ElmAutoencoderLayer::encode(const Eigen::MatrixXd& x) const {
  if (x.cols() != decode.cols()) throw Error("ShapeMismatch", "autoencoder input width mismatch");
  return sigmoid(x * decode.transpose());
}

ElmAutoencoderLayer elm_autoencoder_fit(const Eigen::MatrixXd& x, Eigen::Index dim, double ridge,
                                        std::uint64_t seed, Eigen::MatrixXd* reconstruction) {
  const ElmModel projection = elm_init(x.cols(), dim, seed);
  const Eigen::MatrixXd h = projection.hidden(x);
  ElmAutoencoderLayer layer;
  layer.decode = ridge_solve(h, x, ridge);
  if (reconstruction) *reconstruction = h * layer.decode;
  return layer;
}

Eigen::MatrixXd MelmModel::represent(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd cur = x;
  for (const auto& l : layers) cur = l.encode(cur);
  return cur;
}

std::vector<int> MelmModel::predict(const Eigen::MatrixXd& x) const {
  return classifier.predict(represent(x));
}

MelmModel melm_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_onehot,
                   const std::vector<Eigen::Index>& layer_dims, Eigen::Index hidden,
                   double ridge, std::uint64_t seed) {
  MelmModel m;
  m.layer_dims = layer_dims;
  Eigen::MatrixXd cur = x;
  for (std::size_t l = 0; l < layer_dims.size(); ++l) {
    m.layers.push_back(elm_autoencoder_fit(cur, layer_dims[l], ridge, seed + 1 + l));
    cur = m.layers.back().encode(cur);
  }
  m.classifier = elm_fit(cur, y_onehot, hidden, ridge, seed);
  return m;
}

PcaResult pca_fit_transform(const Eigen::MatrixXd& x, Eigen::Index k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw Error("KOutOfRange", "k = " + std::to_string(k) + " outside [1, " +
                                   std::to_string(std::min(n, d)) + "]");
  }
  PcaResult r;
  r.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - r.mean;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("NumericalFailure", "eigendecomposition failed");
  // Eigen sorts ascending.
  r.components.resize(k, d);
  r.explained_variance.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = d - 1 - i;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    r.components.row(i) = v.transpose();
    r.explained_variance(i) = std::max(0.0, eig.eigenvalues()(src));
  }
  const double total = std::max(0.0, eig.eigenvalues().sum());
  r.explained_variance_ratio =
      total > 0.0 ? Eigen::VectorXd(r.explained_variance / total) : Eigen::VectorXd::Zero(k);
  r.projected = centered * r.components.transpose();
  return r;
}

Eigen::MatrixXd one_hot_matrix(const std::vector<int>& labels, Eigen::Index classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw Error("InvalidLabel", "label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw Error("ShapeMismatch", "prediction count mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace cwl
