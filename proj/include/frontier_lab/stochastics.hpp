#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace frontier_lab::stochastics {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 128-bit counter under a 64-bit key to 128
/// pseudo-random bits. Exposed for known-answer testing.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Deterministic counter-based random stream.
///
/// The key is the seed; the 128-bit Philox counter is (block index, stream_id).
/// Two streams with different stream_ids therefore never visit the same
/// counter, and a stream's output depends only on (seed, stream_id, position).
/// Parallel work must be partitioned by stream_id.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const { return consumed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double next_unit();
  /// Uniform on the open interval (0, 1).
  double next_open_unit();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::uint64_t consumed_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Packs a hierarchical stream identifier: 8 bits of tag, 28 bits each for
/// two indices. Used by the harness to give every (repetition, grid point)
/// its own stream.
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0);

/// n draws from N(0,1). Box-Muller on consecutive uniform pairs
/// (u1 in (0,1), u2 in [0,1)): z0 = r cos(2 pi u2), z1 = r sin(2 pi u2) with
/// r = sqrt(-2 ln u1). An odd n discards the final sine branch.
Eigen::VectorXd standard_normal(RngStream& stream, Eigen::Index n);

Eigen::VectorXd normal(RngStream& stream, Eigen::Index n, double mean, double stddev);

/// rows x cols standard normals filled row by row.
Eigen::MatrixXd standard_normal_matrix(RngStream& stream, Eigen::Index rows, Eigen::Index cols);

Eigen::VectorXd uniform(RngStream& stream, Eigen::Index n, double lo, double hi);

/// Independent Bernoulli(p_i) outcomes as 0.0 / 1.0. Throws DomainError if
/// any p_i lies outside [0, 1].
Eigen::VectorXd bernoulli_from_prob(RngStream& stream, const Eigen::Ref<const Eigen::VectorXd>& p);

/// Observations in rows, variables in columns. Entries must be finite.
class SamplePanel {
 public:
  SamplePanel(Eigen::MatrixXd values, std::vector<std::string> column_names);

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  Eigen::Index n_obs() const { return values_.rows(); }
  Eigen::Index n_vars() const { return values_.cols(); }
  Eigen::VectorXd column(const std::string& name) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> column_names_;
};

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  Eigen::Index n_obs = 0;
};

/// Simple regression of y on x with intercept:
/// slope = sum((x - xbar)(y - ybar)) / sum((x - xbar)^2).
OlsFit ols_simple(const Eigen::Ref<const Eigen::VectorXd>& y,
                  const Eigen::Ref<const Eigen::VectorXd>& x);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // n-1 denominator, exactly symmetric
};

Moments empirical_moments(const SamplePanel& panel);
Moments empirical_moments(const Eigen::Ref<const Eigen::MatrixXd>& values);

/// Pearson correlation; returns NaN when either input has zero variance.
double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b);

/// n evenly spaced values over [lo, hi], last value exactly hi.
Eigen::VectorXd linspace(double lo, double hi, Eigen::Index n);

}  // namespace frontier_lab::stochastics
