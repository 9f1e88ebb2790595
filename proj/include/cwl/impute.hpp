#pragma once

#include <cstdint>
#include <vector>

#include "cwl/signals.hpp"

namespace cwl {

struct FcmConfig {
  int n_clusters = 3;
  double fuzzifier = 2.0;
  double tol = 1e-5;
  int max_iter = 100;
  std::uint64_t seed = 0;
  int embed_dim = 8;  // delay-vector length used by impute_pupil

  void validate() const;
};

// Row-major n x d matrix with a parallel missing mask (1 = missing).
struct IncompleteMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;

  IncompleteMatrix() = default;
  IncompleteMatrix(std::size_t n, std::size_t d)
      : rows(n), cols(d), values(n * d, 0.0), missing(n * d, 0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * cols + c] != 0; }
  void validate() const;
};

struct FcmState {
  std::size_t clusters = 0;
  std::size_t dims = 0;
  std::size_t points = 0;
  double fuzzifier = 2.0;
  std::vector<double> centroids;    // clusters x dims
  std::vector<double> memberships;  // clusters x points, columns sum to 1
  double objective = 0.0;
  std::vector<double> objective_history;  // one entry per completed iteration
  std::vector<double> max_membership_change;
  int iterations = 0;
  bool converged = false;

  double centroid(std::size_t i, std::size_t j) const { return centroids[i * dims + j]; }
  double membership(std::size_t i, std::size_t k) const { return memberships[i * points + k]; }
};

// Fuzzy c-means on incomplete data with the partial-distance strategy:
// squared distances use observed components only, rescaled by d / observed.
FcmState fcm_fit_incomplete(const IncompleteMatrix& data, const FcmConfig& cfg);

// Memberships of every row of `data` against fixed centroids.
std::vector<double> fcm_memberships(const IncompleteMatrix& data,
                                    const std::vector<double>& centroids,
                                    std::size_t clusters, double fuzzifier);

// Fills missing entries with the membership-weighted centroid estimate
// sum_i u_ik^m v_ij / sum_i u_ik^m. Observed entries are copied unchanged.
IncompleteMatrix fcm_impute(const IncompleteMatrix& data, const FcmState& state);

// Delay-embeds the stream into overlapping embed_dim-vectors, fits FCM on
// every vector with at least one observed sample and imputes. Gaps longer
// than a delay vector are closed from both edges in successive passes that
// reuse the fitted centroids. Overlapping estimates of one sample are averaged.
// The fitted state is copied to *fit when given (untouched for complete input).
ChannelStream impute_pupil(const ChannelStream& x, const FcmConfig& cfg, FcmState* fit = nullptr);

}  // namespace cwl
