#include "frontier_lab/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::stochastics {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

void check_size(Eigen::Index n) {
  if (n < 0) throw DomainError("sample size must be non-negative");
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> counter{
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox4x32_10(counter, key);
  buffer_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
  buffer_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
  available_ = 2;
  ++block_;
}

std::uint64_t RngStream::next_u64() {
  if (available_ == 0) refill();
  ++consumed_;
  return buffer_[2 - available_--];
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_open_unit() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t kIndexMask = (std::uint64_t{1} << 28) - 1;
  if (tag > 0xFF || a > kIndexMask || b > kIndexMask) {
    throw DomainError("stream identifier component out of range");
  }
  return (tag << 56) | (a << 28) | b;
}

Eigen::VectorXd standard_normal(RngStream& stream, Eigen::Index n) {
  check_size(n);
  Eigen::VectorXd out(n);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (Eigen::Index i = 0; i < n; i += 2) {
    const double u1 = stream.next_open_unit();
    const double u2 = stream.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i] = r * std::cos(kTwoPi * u2);
    if (i + 1 < n) out[i + 1] = r * std::sin(kTwoPi * u2);
  }
  return out;
}

Eigen::VectorXd normal(RngStream& stream, Eigen::Index n, double mean, double stddev) {
  if (!(stddev >= 0.0)) throw DomainError("normal: standard deviation must be >= 0");
  Eigen::VectorXd z = standard_normal(stream, n);
  return (z.array() * stddev + mean).matrix();
}

Eigen::MatrixXd standard_normal_matrix(RngStream& stream, Eigen::Index rows, Eigen::Index cols) {
  check_size(rows);
  check_size(cols);
  const Eigen::VectorXd flat = standard_normal(stream, rows * cols);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = flat[r * cols + c];
  }
  return out;
}

Eigen::VectorXd uniform(RngStream& stream, Eigen::Index n, double lo, double hi) {
  check_size(n);
  if (!(hi >= lo)) throw DomainError("uniform: require lo <= hi");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = lo + (hi - lo) * stream.next_unit();
  return out;
}

Eigen::VectorXd bernoulli_from_prob(RngStream& stream, const Eigen::Ref<const Eigen::VectorXd>& p) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw DomainError("bernoulli_from_prob: probability at index " + std::to_string(i) +
                        " outside [0, 1]");
    }
  }
  Eigen::VectorXd out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = stream.next_unit() < p[i] ? 1.0 : 0.0;
  return out;
}

SamplePanel::SamplePanel(Eigen::MatrixXd values, std::vector<std::string> column_names)
    : values_(std::move(values)), column_names_(std::move(column_names)) {
  if (static_cast<Eigen::Index>(column_names_.size()) != values_.cols()) {
    throw ShapeError("SamplePanel: " + std::to_string(column_names_.size()) + " names for " +
                     std::to_string(values_.cols()) + " columns");
  }
  if (!values_.allFinite()) throw DomainError("SamplePanel: non-finite entry");
}

Eigen::VectorXd SamplePanel::column(const std::string& name) const {
  const auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) throw ShapeError("SamplePanel: no column '" + name + "'");
  return values_.col(std::distance(column_names_.begin(), it));
}

OlsFit ols_simple(const Eigen::Ref<const Eigen::VectorXd>& y,
                  const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (y.size() != x.size()) throw ShapeError("ols_simple: x and y differ in length");
  if (x.size() < 2) throw InsufficientDataError("ols_simple: need at least 2 observations");
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::ArrayXd xc = x.array() - x_mean;
  const double sxx = (xc * xc).sum();
  if (!(sxx > 0.0)) throw SingularityError("ols_simple: regressor has zero variance");
  OlsFit fit;
  fit.slope = (xc * (y.array() - y_mean)).sum() / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  fit.n_obs = x.size();
  return fit;
}

Moments empirical_moments(const Eigen::Ref<const Eigen::MatrixXd>& values) {
  const Eigen::Index n = values.rows();
  if (n < 2) throw InsufficientDataError("empirical_moments: need at least 2 observations");
  Moments m;
  m.mean = values.colwise().mean().transpose();
  const Eigen::MatrixXd centered = values.rowwise() - m.mean.transpose();
  const Eigen::Index k = values.cols();
  m.covariance.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double c = centered.col(i).dot(centered.col(j)) / static_cast<double>(n - 1);
      m.covariance(i, j) = c;
      m.covariance(j, i) = c;
    }
  }
  return m;
}

Moments empirical_moments(const SamplePanel& panel) { return empirical_moments(panel.values()); }

double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw ShapeError("pearson_correlation: length mismatch");
  if (a.size() < 2) throw InsufficientDataError("pearson_correlation: need at least 2 values");
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  const double saa = (ac * ac).sum();
  const double sbb = (bc * bc).sum();
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (ac * bc).sum() / std::sqrt(saa * sbb);
}

namespace {

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return v[i] < v[j]; });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && v[order[stop]] == v[order[start]]) ++stop;
    const double rank = 0.5 * static_cast<double>(start + stop - 1) + 1.0;
    for (Eigen::Index k = start; k < stop; ++k) ranks[order[k]] = rank;
    start = stop;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b) {
  return pearson_correlation(average_ranks(a), average_ranks(b));
}

Eigen::VectorXd linspace(double lo, double hi, Eigen::Index n) {
  check_size(n);
  Eigen::VectorXd out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  if (n > 1) out[n - 1] = hi;
  return out;
}

}  // namespace frontier_lab::stochastics
