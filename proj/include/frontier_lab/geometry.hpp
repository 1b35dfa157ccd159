#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frontier_lab/factor_bias.hpp"
#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::geometry {

/// Symmetric positive-definite covariance with its eigen factorization.
///
/// Construction symmetrizes the input, floors eigenvalues at eigen_floor and
/// rebuilds both V and V^-1 from the same factorization. V is exactly
/// symmetric; V V^-1 is checked against the identity (max-norm 1e-8) and
/// construction throws SingularityError if that fails. Immutable.
class SpdCovariance {
 public:
  static constexpr double kDefaultEigenFloor = 1e-8;

  explicit SpdCovariance(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                         double eigen_floor = kDefaultEigenFloor);

  Eigen::Index dim() const { return matrix_.rows(); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double eigen_floor() const { return eigen_floor_; }

  Eigen::VectorXd apply_inverse(const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd inverse_;
  Eigen::VectorXd eigenvalues_;
  double eigen_floor_;
};

/// Expected-return or surrogate signal with a provenance label.
struct SignalVector {
  Eigen::VectorXd values;
  std::string label;

  SignalVector() = default;
  SignalVector(Eigen::VectorXd v, std::string l);
  Eigen::Index size() const { return values.size(); }
};

/// Random factor-model covariance V = F diag(lambda) F^T + D with
/// F ~ N(0,1) (n x n_factors), lambda ~ U(0.6, 1.4), D_ii ~ U(s, 2s).
/// Draw order: F row by row, lambda, D.
SpdCovariance make_spd_cov(stochastics::RngStream& stream, Eigen::Index n, Eigen::Index n_factors = 3,
                           double idio_scale = 0.2);

/// Random signal of Euclidean norm `scale`.
SignalVector generate_mu(stochastics::RngStream& stream, Eigen::Index n, double scale = 0.25);

/// u^T V^-1 v.
double vm_inner(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                const SpdCovariance& cov);
double vm_norm(const Eigen::Ref<const Eigen::VectorXd>& u, const SpdCovariance& cov);

/// Cosine of the angle between mu and mu_tilde in the V^-1 inner product,
/// clamped to [-1, 1]. Throws DegenerateError on a zero vector.
double cosine_alignment(const SignalVector& mu, const SignalVector& mu_tilde, const SpdCovariance& cov);

/// V^-1 signal, unnormalized.
Eigen::VectorXd tangency_direction(const SignalVector& signal, const SpdCovariance& cov);

struct PortfolioStats {
  double mean = 0.0;
  double vol = 0.0;
  double sharpe = 0.0;
};

/// mean = mu^T w, vol = sqrt(w^T V w), sharpe = mean / vol.
PortfolioStats sharpe_of_weights(const Eigen::Ref<const Eigen::VectorXd>& w, const SignalVector& mu,
                                 const SpdCovariance& cov);

/// mu~(theta) = cos(theta) mu + sin(theta) nu with nu V^-1-orthogonal to mu
/// and of equal V^-1 norm.
struct AlignmentFamily {
  SignalVector mu;
  SignalVector nu;
  std::vector<double> theta_grid;

  SignalVector surrogate(double theta) const;
};

/// Draws nu: random normal vector, V^-1 Gram-Schmidt against mu (two passes),
/// rescaled to ||nu|| = ||mu|| in the V^-1 norm. Redraws when the residual is
/// below 1e-10 ||mu||. Throws DegenerateError for n < 2 or mu == 0.
AlignmentFamily build_alignment_family(const SignalVector& mu, const SpdCovariance& cov,
                                       stochastics::RngStream& stream, std::vector<double> theta_grid);

/// signal rescaled so that its V^-1 norm equals that of `reference`.
SignalVector match_vm_norm(const SignalVector& signal, const SignalVector& reference, const SpdCovariance& cov);

/// epsilon * mu, labeled with epsilon.
SignalVector epsilon_scaled_signal(const SignalVector& mu, double epsilon);

/// Per-observation payoff statistics of a signal-driven position:
/// R = mean(w_i r_i), Sharpe = R / sd(w_i r_i) (population sd).
struct PayoffStats {
  double expected_payoff = 0.0;
  double sharpe = 0.0;
};
PayoffStats payoff_stats(const Eigen::Ref<const Eigen::VectorXd>& weights,
                         const Eigen::Ref<const Eigen::VectorXd>& returns);

/// Sharpe (against mu) of V^-1 mu~(sigma_zeta) where the surrogate carries the
/// confounding bias along nu: mu~ = mu + bias(sigma_zeta) nu with
/// bias = beta - attenuated_slope = alpha gamma / s. One value per grid point.
std::vector<double> sharpe_along_attenuation(const SignalVector& mu, const SignalVector& nu,
                                             const SpdCovariance& cov,
                                             const factor_bias::CancellationParams& params,
                                             const std::vector<double>& sigma_zeta_grid,
                                             factor_bias::ConfounderScaling scaling);

}  // namespace frontier_lab::geometry
