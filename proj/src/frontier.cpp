#include "frontier_lab/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::frontier {

namespace {

// det(M) / (M00 M11) below this means mu_hat is numerically parallel to 1.
constexpr double kCollinearityTolerance = 1e-12;

}  // namespace

MinVarianceSolver::MinVarianceSolver(SignalVector mu_hat, const SpdCovariance& cov)
    : mu_hat_(std::move(mu_hat)), cov_matrix_(cov.matrix()) {
  const Eigen::Index n = cov.dim();
  if (mu_hat_.size() != n) {
    throw ShapeError(fmt::format("MinVarianceSolver: signal has {} entries, covariance {}", mu_hat_.size(), n));
  }
  Eigen::MatrixXd a(n, 2);
  a.col(0).setOnes();
  a.col(1) = mu_hat_.values;

  const Eigen::LLT<Eigen::MatrixXd> chol(cov.matrix());
  if (chol.info() != Eigen::Success) throw SingularityError("MinVarianceSolver: Cholesky factorization failed");
  vinv_a_ = chol.solve(a);
  gram_ = a.transpose() * vinv_a_;
  gram_(1, 0) = gram_(0, 1);

  const double det = gram_(0, 0) * gram_(1, 1) - gram_(0, 1) * gram_(0, 1);
  if (!(det > kCollinearityTolerance * gram_(0, 0) * gram_(1, 1))) {
    throw DegenerateError("MinVarianceSolver: expected-return signal is proportional to the ones vector");
  }
  gram_inverse_ << gram_(1, 1), -gram_(0, 1), -gram_(0, 1), gram_(0, 0);
  gram_inverse_ /= det;
}

FrontierPoint MinVarianceSolver::solve(double target, const SignalVector& evaluation) const {
  if (evaluation.size() != mu_hat_.size()) throw ShapeError("MinVarianceSolver: evaluation signal size");
  const Eigen::Vector2d rhs(1.0, target);
  FrontierPoint p;
  p.target_return = target;
  p.weights = vinv_a_ * (gram_inverse_ * rhs);
  p.realized_return = evaluation.values.dot(p.weights);
  p.volatility = std::sqrt(std::max(p.weights.dot(cov_matrix_ * p.weights), 0.0));
  return p;
}

double MinVarianceSolver::variance_at(double target) const {
  const Eigen::Vector2d rhs(1.0, target);
  return rhs.dot(gram_inverse_ * rhs);
}

double MinVarianceSolver::gmv_return() const { return gram_(0, 1) / gram_(0, 0); }

Eigen::VectorXd MinVarianceSolver::gmv_weights() const { return vinv_a_.col(0) / gram_(0, 0); }

FrontierPoint min_variance_at_target(const SignalVector& mu_hat, const SpdCovariance& cov, double target) {
  return MinVarianceSolver(mu_hat, cov).solve(target);
}

Frontier sweep_frontier(const SignalVector& mu_hat, const SpdCovariance& cov, int n_points, SweepSpan span,
                        const SignalVector* evaluation) {
  if (n_points < 3) throw DomainError("sweep_frontier: n_points must be >= 3");
  if (mu_hat.size() == 0) throw ShapeError("sweep_frontier: empty signal");
  Frontier out;
  out.optimization_signal = mu_hat;
  out.evaluation_signal = evaluation ? *evaluation : mu_hat;

  const MinVarianceSolver solver(mu_hat, cov);
  const double lo = mu_hat.values.minCoeff() * span.lo_mult;
  const double hi = mu_hat.values.maxCoeff() * span.hi_mult;
  const Eigen::VectorXd targets = stochastics::linspace(std::min(lo, hi), std::max(lo, hi), n_points);
  for (double target : targets) {
    FrontierPoint p = solver.solve(target, out.evaluation_signal);
    if (p.weights.allFinite() && std::isfinite(p.volatility) && std::isfinite(p.realized_return)) {
      out.points.push_back(std::move(p));
    } else {
      out.skipped_targets.push_back(target);
    }
  }
  if (out.points.empty()) throw DegenerateError("sweep_frontier: every target was degenerate");
  return out;
}

std::vector<std::pair<double, Frontier>> frontier_under_misalignment(const geometry::AlignmentFamily& family,
                                                                     const SpdCovariance& cov, int n_points,
                                                                     SweepSpan span) {
  std::vector<std::pair<double, Frontier>> out;
  out.reserve(family.theta_grid.size());
  for (double theta : family.theta_grid) {
    out.emplace_back(theta, sweep_frontier(family.surrogate(theta), cov, n_points, span, &family.mu));
  }
  return out;
}

bool ConvexityReport::convex() const {
  return n_points >= 3 && min_second_divided_difference >= -1e-10 && quadratic_leading_coefficient > 0.0 &&
         quadratic_r_squared >= 1.0 - 1e-9;
}

ConvexityReport convexity_report(const Frontier& frontier) {
  const auto& pts = frontier.points;
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n < 3) throw InsufficientDataError("convexity_report: need at least 3 frontier points");

  Eigen::VectorXd r(n), v(n), realized(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = pts[static_cast<std::size_t>(i)].target_return;
    const double vol = pts[static_cast<std::size_t>(i)].volatility;
    v[i] = vol * vol;
    realized[i] = pts[static_cast<std::size_t>(i)].realized_return;
  }

  ConvexityReport rep;
  rep.n_points = static_cast<int>(n);
  rep.min_second_divided_difference = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 2 < n; ++i) {
    const double d01 = (v[i + 1] - v[i]) / (r[i + 1] - r[i]);
    const double d12 = (v[i + 2] - v[i + 1]) / (r[i + 2] - r[i + 1]);
    rep.min_second_divided_difference = std::min(rep.min_second_divided_difference, (d12 - d01) / (r[i + 2] - r[i]));
  }

  // Fit on a centered, scaled abscissa for conditioning; the leading
  // coefficient is mapped back to the original units.
  const double center = r.mean();
  const double scale = std::max((r.array() - center).abs().maxCoeff(), std::numeric_limits<double>::min());
  const Eigen::ArrayXd t = (r.array() - center) / scale;
  Eigen::MatrixXd design(n, 3);
  design.col(0) = (t * t).matrix();
  design.col(1) = t.matrix();
  design.col(2).setOnes();
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(v);
  const Eigen::VectorXd resid = v - design * coef;
  const double ss_tot = (v.array() - v.mean()).square().sum();
  rep.quadratic_leading_coefficient = coef[0] / (scale * scale);
  rep.quadratic_max_residual = resid.cwiseAbs().maxCoeff();
  rep.quadratic_r_squared = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;

  const Eigen::ArrayXd rc = r.array() - center;
  rep.realized_return_slope = (rc * (realized.array() - realized.mean())).sum() / (rc * rc).sum();
  rep.positive_realized_return = rep.realized_return_slope > 0.0;
  return rep;
}

}  // namespace frontier_lab::frontier
