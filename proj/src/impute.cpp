#include "cwl/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cwl/error.hpp"

namespace cwl {

void FcmConfig::validate() const {
  if (n_clusters < 2) throw Error("InvalidConfig", "FCM needs at least 2 clusters");
  if (!(fuzzifier > 1.0)) throw Error("InvalidConfig", "FCM fuzzifier must be > 1");
  if (!(tol > 0.0)) throw Error("InvalidConfig", "FCM tolerance must be > 0");
  if (max_iter < 1) throw Error("InvalidConfig", "FCM max_iter must be >= 1");
  if (embed_dim < 1) throw Error("InvalidConfig", "delay embedding dimension must be >= 1");
}

void IncompleteMatrix::validate() const {
  if (values.size() != rows * cols || missing.size() != rows * cols) {
    throw Error("ShapeMismatch", "matrix storage does not match its shape");
  }
}

namespace {

inline double power(double x, double e) {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  return std::pow(x, e);
}

// Partial-distance squared distance between row k and centroid i.
// Returns +inf when the row has no observed component.
double partial_distance_sq(const IncompleteMatrix& data, std::size_t k, const double* centroid) {
  double sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t j = 0; j < data.cols; ++j) {
    if (data.is_missing(k, j)) continue;
    const double diff = data.at(k, j) - centroid[j];
    sum += diff * diff;
    ++observed;
  }
  if (observed == 0) return std::numeric_limits<double>::infinity();
  return sum * static_cast<double>(data.cols) / static_cast<double>(observed);
}

// Membership column for one row given its squared distances to each centroid.
void membership_column(const std::vector<double>& dist_sq, double fuzzifier,
                       std::vector<double>& u) {
  const std::size_t c = dist_sq.size();
  for (std::size_t i = 0; i < c; ++i) {
    if (dist_sq[i] == 0.0) {
      std::fill(u.begin(), u.end(), 0.0);
      u[i] = 1.0;
      return;
    }
  }
  // u_i = 1 / sum_j (d_i / d_j)^{2/(m-1)}, written with squared distances
  // as a normalized power of the inverse distance.
  const double exponent = 1.0 / (fuzzifier - 1.0);
  const double d_min = *std::min_element(dist_sq.begin(), dist_sq.end());
  for (std::size_t i = 0; i < c; ++i) u[i] = power(d_min / dist_sq[i], exponent);
  const double total = std::accumulate(u.begin(), u.end(), 0.0);
  for (double& v : u) v /= total;
}

double objective(const IncompleteMatrix& data, const std::vector<double>& centroids,
                 const std::vector<double>& memberships, std::size_t clusters, double m) {
  double j_total = 0.0;
  for (std::size_t i = 0; i < clusters; ++i) {
    const double* v = centroids.data() + i * data.cols;
    for (std::size_t k = 0; k < data.rows; ++k) {
      const double u = memberships[i * data.rows + k];
      if (u == 0.0) continue;
      j_total += power(u, m) * partial_distance_sq(data, k, v);
    }
  }
  return j_total;
}

std::vector<double> observed_row_weights(const IncompleteMatrix& data) {
  // Each row's partial distance carries the factor d / observed; the centroid
  // update that minimizes the same objective must weight rows identically.
  std::vector<double> w(data.rows);
  for (std::size_t k = 0; k < data.rows; ++k) {
    std::size_t observed = 0;
    for (std::size_t j = 0; j < data.cols; ++j) observed += data.is_missing(k, j) ? 0 : 1;
    w[k] = observed == 0 ? 0.0 : static_cast<double>(data.cols) / static_cast<double>(observed);
  }
  return w;
}

}  // namespace

std::vector<double> fcm_memberships(const IncompleteMatrix& data,
                                    const std::vector<double>& centroids, std::size_t clusters,
                                    double fuzzifier) {
  std::vector<double> u(clusters * data.rows, 0.0);
  std::vector<double> dist(clusters);
  std::vector<double> col(clusters);
  for (std::size_t k = 0; k < data.rows; ++k) {
    for (std::size_t i = 0; i < clusters; ++i) {
      dist[i] = partial_distance_sq(data, k, centroids.data() + i * data.cols);
    }
    if (std::isinf(dist[0])) {
      // No observed component: uniform membership.
      std::fill(col.begin(), col.end(), 1.0 / static_cast<double>(clusters));
    } else {
      membership_column(dist, fuzzifier, col);
    }
    for (std::size_t i = 0; i < clusters; ++i) u[i * data.rows + k] = col[i];
  }
  return u;
}

FcmState fcm_fit_incomplete(const IncompleteMatrix& data, const FcmConfig& cfg) {
  cfg.validate();
  data.validate();
  const std::size_t n = data.rows;
  const std::size_t d = data.cols;
  const auto c = static_cast<std::size_t>(cfg.n_clusters);
  if (d == 0) throw Error("ShapeMismatch", "FCM data has no columns");
  for (std::size_t k = 0; k < n; ++k) {
    bool any = false;
    for (std::size_t j = 0; j < d && !any; ++j) any = !data.is_missing(k, j);
    if (!any) throw Error("EmptyRow", "row " + std::to_string(k) + " has no observed component");
  }
  if (n < c) {
    throw Error("TooFewRows", "FCM needs at least as many rows as clusters (" +
                                  std::to_string(n) + " < " + std::to_string(c) + ")");
  }

  // Column means fill the unobserved components of seed rows.
  std::vector<double> col_mean(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!data.is_missing(k, j)) {
        sum += data.at(k, j);
        ++count;
      }
    }
    col_mean[j] = count ? sum / static_cast<double>(count) : 0.0;
  }

  // Seed centroids from c distinct rows drawn in a seeded order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  FcmState state;
  state.clusters = c;
  state.dims = d;
  state.points = n;
  state.fuzzifier = cfg.fuzzifier;
  state.centroids.reserve(c * d);
  auto row_vector = [&](std::size_t k) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = data.is_missing(k, j) ? col_mean[j] : data.at(k, j);
    return v;
  };
  std::vector<std::vector<double>> chosen;
  for (std::size_t k : order) {
    if (chosen.size() == c) break;
    auto v = row_vector(k);
    if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(std::move(v));
  }
  // Fewer than c distinct rows: pad with duplicates; coincident centroids are
  // resolved by the hard-membership rule.
  for (std::size_t k = 0; chosen.size() < c; ++k) chosen.push_back(row_vector(order[k % n]));
  for (const auto& v : chosen) state.centroids.insert(state.centroids.end(), v.begin(), v.end());

  const std::vector<double> row_weight = observed_row_weights(data);
  const double m = cfg.fuzzifier;
  state.memberships.assign(c * n, 0.0);
  std::vector<double> weighted(c * n);
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    std::vector<double> u = fcm_memberships(data, state.centroids, c, m);
    double max_change = 0.0;
    for (std::size_t idx = 0; idx < u.size(); ++idx) {
      max_change = std::max(max_change, std::abs(u[idx] - state.memberships[idx]));
    }
    state.memberships = std::move(u);

    for (std::size_t idx = 0; idx < c * n; ++idx) {
      weighted[idx] = power(state.memberships[idx], m) * row_weight[idx % n];
    }
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (data.is_missing(k, j)) continue;
          const double w = weighted[i * n + k];
          num += w * data.at(k, j);
          den += w;
        }
        if (den > 0.0) state.centroids[i * d + j] = num / den;
      }
    }

    state.objective = objective(data, state.centroids, state.memberships, c, m);
    state.objective_history.push_back(state.objective);
    state.max_membership_change.push_back(max_change);
    state.iterations = iter + 1;
    if (max_change < cfg.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

IncompleteMatrix fcm_impute(const IncompleteMatrix& data, const FcmState& state) {
  data.validate();
  if (data.rows != state.points || data.cols != state.dims ||
      state.memberships.size() != state.clusters * state.points) {
    throw Error("ShapeMismatch", "FCM state was fitted on a differently shaped matrix");
  }
  IncompleteMatrix out = data;
  const double m = state.fuzzifier;
  for (std::size_t k = 0; k < data.rows; ++k) {
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (!data.is_missing(k, j)) continue;
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < state.clusters; ++i) {
        const double w = power(state.membership(i, k), m);
        num += w * state.centroid(i, j);
        den += w;
      }
      out.at(k, j) = num / den;
      out.missing[k * data.cols + j] = 0;
    }
  }
  return out;
}

namespace {

IncompleteMatrix delay_embed(const std::vector<double>& samples,
                             const std::vector<std::uint8_t>& mask, std::size_t dim) {
  const std::size_t rows = samples.size() - dim + 1;
  IncompleteMatrix m(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < dim; ++j) {
      m.at(r, j) = samples[r + j];
      m.missing[r * dim + j] = mask[r + j];
    }
  }
  return m;
}

}  // namespace

ChannelStream impute_pupil(const ChannelStream& x, const FcmConfig& cfg, FcmState* fit) {
  cfg.validate();
  x.validate();
  const std::size_t n = x.size();
  const std::size_t missing = x.missing_count();
  if (missing == 0) return x;
  if (2 * missing >= n) {
    throw Error("TooManyMissing", x.name + ": " + std::to_string(missing) + " of " +
                                      std::to_string(n) + " samples missing (limit < 50%)");
  }
  const auto dim = static_cast<std::size_t>(cfg.embed_dim);
  if (n < dim) throw Error("TooFewRows", x.name + ": stream shorter than the delay embedding");

  std::vector<double> samples = x.samples;
  std::vector<std::uint8_t> mask = x.missing_mask;

  // Fit on every delay vector that has at least one observed sample.
  IncompleteMatrix all = delay_embed(samples, mask, dim);
  std::vector<std::size_t> usable;
  for (std::size_t r = 0; r < all.rows; ++r) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (!all.is_missing(r, j)) {
        usable.push_back(r);
        break;
      }
    }
  }
  IncompleteMatrix fit_rows(usable.size(), dim);
  for (std::size_t u = 0; u < usable.size(); ++u) {
    for (std::size_t j = 0; j < dim; ++j) {
      fit_rows.at(u, j) = all.at(usable[u], j);
      fit_rows.missing[u * dim + j] = all.missing[usable[u] * dim + j];
    }
  }
  const FcmState fitted = fcm_fit_incomplete(fit_rows, cfg);
  if (fit) *fit = fitted;

  while (true) {
    IncompleteMatrix emb = delay_embed(samples, mask, dim);
    // Rows that can contribute an estimate this pass.
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < emb.rows; ++r) {
      bool any_observed = false;
      bool any_missing = false;
      for (std::size_t j = 0; j < dim; ++j) {
        (emb.is_missing(r, j) ? any_missing : any_observed) = true;
      }
      if (any_observed && any_missing) rows.push_back(r);
    }
    if (rows.empty()) break;

    IncompleteMatrix sub(rows.size(), dim);
    for (std::size_t u = 0; u < rows.size(); ++u) {
      for (std::size_t j = 0; j < dim; ++j) {
        sub.at(u, j) = emb.at(rows[u], j);
        sub.missing[u * dim + j] = emb.missing[rows[u] * dim + j];
      }
    }
    FcmState pass = fitted;
    pass.points = sub.rows;
    pass.memberships = fcm_memberships(sub, fitted.centroids, fitted.clusters, fitted.fuzzifier);
    const IncompleteMatrix filled = fcm_impute(sub, pass);

    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    for (std::size_t u = 0; u < rows.size(); ++u) {
      for (std::size_t j = 0; j < dim; ++j) {
        if (!sub.is_missing(u, j)) continue;
        const std::size_t t = rows[u] + j;
        sum[t] += filled.at(u, j);
        ++count[t];
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (count[t] > 0) {
        samples[t] = sum[t] / count[t];
        mask[t] = 0;
      }
    }
  }

  ChannelStream out = ChannelStream::complete(x.name, x.fs_hz, std::move(samples));
  return out;
}

}  // namespace cwl
