#include <doctest.h>

#include <random>

#include "cwl/baselines.hpp"
#include "helpers.hpp"

using namespace cwl;
using testing::error_code_of;

namespace {

Eigen::MatrixXd uniform(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

// Three Gaussian blobs in 6-D with labels.
void blobs(Eigen::Index n, std::uint64_t seed, Eigen::MatrixXd& x, std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  x.resize(n, 6);
  labels.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    labels.push_back(c);
    for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = g(rng) + (j % 3 == c ? 2.0 : 0.0);
  }
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("ELM interpolates when rows do not exceed the hidden size") {
  const Eigen::MatrixXd x = uniform(40, 5, 1);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back((i * 7) % 4);  // arbitrary labels
  const ElmModel m = elm_fit(x, one_hot_matrix(labels, 4), 64, 1e-8, 3);
  CHECK(accuracy(m.predict(x), labels) == 1.0);
}

TEST_CASE("a growing ridge shrinks the readout to zero; the zero readout predicts a constant") {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  blobs(90, 2, x, labels);
  const Eigen::MatrixXd y = one_hot_matrix(labels, 3);
  const double hty = (elm_init(6, 32, 4).hidden(x).transpose() * y).norm();
  double prev = 1e300;
  for (double ridge : {1e3, 1e6, 1e9, 1e12}) {
    const ElmModel m = elm_fit(x, y, 32, ridge, 4);
    CHECK(m.beta.norm() <= hty / ridge);
    CHECK(m.beta.norm() < prev);
    prev = m.beta.norm();
  }
  ElmModel zero = elm_fit(x, y, 32, 1e12, 4);
  zero.beta.setZero();
  for (int v : zero.predict(x)) CHECK(v == 0);
}

TEST_CASE("the ridge readout beats random perturbations of itself") {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  blobs(120, 3, x, labels);
  const Eigen::MatrixXd y = one_hot_matrix(labels, 3);
  const ElmModel m = elm_fit(x, y, 20, 0.0, 5);
  const Eigen::MatrixXd h = m.hidden(x);
  const double best = (h * m.beta - y).norm();
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd b = m.beta;
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] += g(rng);
    CHECK(best <= (h * b - y).norm() + 1e-9);
  }
}

TEST_CASE("hidden weights are fixed by the seed and untouched by fitting") {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  blobs(60, 4, x, labels);
  const ElmModel init = elm_init(6, 16, 9);
  const ElmModel fit = elm_fit(x, one_hot_matrix(labels, 3), 16, 1e-6, 9);
  CHECK(init.w_in == fit.w_in);
  CHECK(init.bias == fit.bias);
}

TEST_CASE("rank-deficient systems without ridge are refused") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 3);
  std::vector<int> labels = {0, 1, 0, 1, 0};
  CHECK(error_code_of([&] { elm_fit(x, one_hot_matrix(labels, 2), 8, 0.0, 1); }) == "SingularSystem");
  CHECK(error_code_of([&] { elm_fit(x, one_hot_matrix(labels, 2), 8, -1.0, 1); }) == "InvalidConfig");
}

TEST_CASE("a square autoencoder reconstructs near-linear data") {
  // Small amplitudes keep the sigmoid in its linear range; the constant
  // column lets the affine hidden response span the input.
  Eigen::MatrixXd x = uniform(300, 6, 7, 0.05);
  x.col(0).setOnes();
  Eigen::MatrixXd rec;
  elm_autoencoder_fit(x, 6, 1e-12, 3, &rec);
  const double rmse = std::sqrt((rec - x).array().square().mean());
  MESSAGE("reconstruction RMSE " << rmse);
  CHECK(rmse < 1e-3);
}

TEST_CASE("MELM: deterministic, dims recorded, zero layers equals ELM") {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  blobs(150, 5, x, labels);
  const Eigen::MatrixXd y = one_hot_matrix(labels, 3);
  const MelmModel a = melm_fit(x, y, {12, 8}, 32, 1e-6, 11);
  const MelmModel b = melm_fit(x, y, {12, 8}, 32, 1e-6, 11);
  CHECK(a.predict(x) == b.predict(x));
  CHECK(a.layer_dims == std::vector<Eigen::Index>{12, 8});
  CHECK(a.represent(x).cols() == 8);
  CHECK(accuracy(a.predict(x), labels) > 0.9);

  const MelmModel flat = melm_fit(x, y, {}, 32, 1e-6, 11);
  const ElmModel elm = elm_fit(x, y, 32, 1e-6, 11);
  CHECK(flat.predict(x) == elm.predict(x));
  CHECK(flat.classifier.beta == elm.beta);
}

TEST_CASE("PCA of rank-one data keeps everything in one component") {
  Eigen::MatrixXd x(50, 3);
  for (int i = 0; i < 50; ++i) {
    const double t = i * 0.1 - 2.0;
    x.row(i) << 1 + 2 * t, -1 + t, 3 - 0.5 * t;
  }
  const PcaResult p = pca_fit_transform(x, 1);
  CHECK(p.explained_variance_ratio(0) > 0.999);
}

TEST_CASE("PCA with k = d reconstructs exactly and has orthonormal components") {
  Eigen::MatrixXd x = uniform(40, 5, 12);
  x.col(2) *= 4.0;
  x.col(4) *= 0.1;
  const PcaResult p = pca_fit_transform(x, 5);
  Eigen::MatrixXd rec = p.projected * p.components;
  rec.rowwise() += p.mean;
  CHECK((rec - x).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((p.components * p.components.transpose() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-9);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(p.explained_variance(i) >= 0.0);
    if (i > 0) CHECK(p.explained_variance(i) <= p.explained_variance(i - 1));
  }
}

TEST_CASE("PCA agrees with the singular decomposition of the centered data") {
  const Eigen::MatrixXd x = uniform(60, 4, 13) * Eigen::Vector4d(3, 1, 0.5, 2).asDiagonal();
  const PcaResult p = pca_fit_transform(x, 3);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double var = svd.singularValues()(i) * svd.singularValues()(i) / 59.0;
    CHECK(p.explained_variance(i) == doctest::Approx(var).epsilon(1e-9));
    CHECK(std::abs(std::abs(p.components.row(i).dot(svd.matrixV().col(i))) - 1.0) < 1e-9);
  }
  CHECK(error_code_of([&] { pca_fit_transform(x, 5); }) == "KOutOfRange");
  CHECK(error_code_of([&] { pca_fit_transform(x, 0); }) == "KOutOfRange");
}

}  // TEST_SUITE
