#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cwl {

// Single-hidden-layer random-feature network with a ridge least-squares
// readout. Hidden weights are drawn once and never trained.
struct ElmModel {
  Eigen::MatrixXd w_in;  // hidden x input
  Eigen::VectorXd bias;  // hidden
  Eigen::MatrixXd beta;  // hidden x classes

  Eigen::MatrixXd hidden(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

// Random hidden layer only: weights U(-sqrt(3/d), sqrt(3/d)), biases U(-1, 1).
ElmModel elm_init(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed);

// beta = (H^T H + lambda I)^{-1} H^T Y with H = sigmoid(X W^T + b).
ElmModel elm_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_onehot, Eigen::Index hidden,
                 double ridge, std::uint64_t seed);

struct ElmAutoencoderLayer {
  Eigen::MatrixXd decode;  // dim x input (least-squares reconstruction weights)

  // sigmoid(X decode^T)
  Eigen::MatrixXd encode(const Eigen::MatrixXd& x) const;
};

struct MelmModel {
  std::vector<ElmAutoencoderLayer> layers;
  std::vector<Eigen::Index> layer_dims;
  ElmModel classifier;

  Eigen::MatrixXd represent(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

// Fits one ELM autoencoder: random sigmoid projection H of x, then
// decode = (H^T H + lambda I)^{-1} H^T x. Also returns the reconstruction H*decode.
ElmAutoencoderLayer elm_autoencoder_fit(const Eigen::MatrixXd& x, Eigen::Index dim, double ridge,
                                        std::uint64_t seed,
                                        Eigen::MatrixXd* reconstruction = nullptr);

// Stacked autoencoders (layer l seeded with seed + 1 + l), then elm_fit with
// `seed` on the deepest representation. No layers reduces to elm_fit.
MelmModel melm_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_onehot,
                   const std::vector<Eigen::Index>& layer_dims, Eigen::Index hidden,
                   double ridge, std::uint64_t seed);

struct PcaResult {
  Eigen::MatrixXd components;  // k x d, orthonormal rows
  Eigen::MatrixXd projected;   // n x k
  Eigen::VectorXd explained_variance;
  Eigen::VectorXd explained_variance_ratio;
  Eigen::RowVectorXd mean;
};

// Top-k eigenvectors of the centered covariance, sorted by variance. Each
// component's largest-magnitude entry is made positive.
PcaResult pca_fit_transform(const Eigen::MatrixXd& x, Eigen::Index k);

Eigen::MatrixXd one_hot_matrix(const std::vector<int>& labels, Eigen::Index classes);
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace cwl
