#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "frontier_lab/geometry.hpp"

namespace frontier_lab::frontier {

using geometry::SignalVector;
using geometry::SpdCovariance;

struct FrontierPoint {
  double target_return = 0.0;
  double realized_return = 0.0;  // evaluation_signal^T w
  double volatility = 0.0;       // sqrt(w^T V w)
  Eigen::VectorXd weights;
};

struct Frontier {
  std::vector<FrontierPoint> points;  // increasing target_return
  std::vector<double> skipped_targets;
  SignalVector optimization_signal;
  SignalVector evaluation_signal;
};

/// Minimum-variance portfolios under sum(w) = 1 and mu_hat^T w = R.
///
/// With A = [1 | mu_hat] and M = A^T V^-1 A, the KKT solution is
/// w = V^-1 A M^-1 (1, R) and w^T V w = (1, R) M^-1 (1, R)^T. V is Cholesky
/// factored once on construction and reused for every target.
/// Throws DegenerateError when mu_hat is proportional to the ones vector.
class MinVarianceSolver {
 public:
  MinVarianceSolver(SignalVector mu_hat, const SpdCovariance& cov);

  FrontierPoint solve(double target, const SignalVector& evaluation) const;
  FrontierPoint solve(double target) const { return solve(target, mu_hat_); }

  /// (1, R) M^-1 (1, R)^T, the frontier variance without forming w.
  double variance_at(double target) const;
  /// Target return of the global minimum-variance portfolio.
  double gmv_return() const;
  Eigen::VectorXd gmv_weights() const;
  const Eigen::Matrix2d& constraint_gram() const { return gram_; }

 private:
  SignalVector mu_hat_;
  Eigen::MatrixXd cov_matrix_;
  Eigen::MatrixXd vinv_a_;  // V^-1 [1 | mu_hat]
  Eigen::Matrix2d gram_;
  Eigen::Matrix2d gram_inverse_;
};

FrontierPoint min_variance_at_target(const SignalVector& mu_hat, const SpdCovariance& cov, double target);

struct SweepSpan {
  double lo_mult = 1.5;
  double hi_mult = 1.5;
};

/// n_points targets evenly spaced over [min(mu_hat) * lo_mult, max(mu_hat) * hi_mult]
/// (plain products, so a negative minimum extends downward). Realized returns
/// use `evaluation` when given, otherwise mu_hat. Targets whose solve is not
/// finite are recorded in skipped_targets; if every target is skipped the
/// sweep throws DegenerateError.
Frontier sweep_frontier(const SignalVector& mu_hat, const SpdCovariance& cov, int n_points,
                        SweepSpan span = {}, const SignalVector* evaluation = nullptr);

/// For each theta of the family: sweep on mu~(theta), realized returns
/// against the family's mu.
std::vector<std::pair<double, Frontier>> frontier_under_misalignment(const geometry::AlignmentFamily& family,
                                                                     const SpdCovariance& cov, int n_points,
                                                                     SweepSpan span = {});

struct ConvexityReport {
  int n_points = 0;
  /// Smallest second divided difference of variance against target return.
  double min_second_divided_difference = 0.0;
  /// Quadratic least-squares fit of variance on target return.
  double quadratic_leading_coefficient = 0.0;
  double quadratic_max_residual = 0.0;
  double quadratic_r_squared = 0.0;
  /// d realized_return / d target_return (exactly affine on a closed-form frontier).
  double realized_return_slope = 0.0;
  /// Realized return rises along the efficient branch.
  bool positive_realized_return = false;

  bool convex() const;
};

/// Throws InsufficientDataError for fewer than 3 points.
ConvexityReport convexity_report(const Frontier& frontier);

}  // namespace frontier_lab::frontier
