#include "frontier_lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::geometry {

namespace {

constexpr double kInverseCheckTolerance = 1e-8;

void check_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw ShapeError(fmt::format("{}: dimension {} does not match {}", what, a, b));
}

Eigen::MatrixXd rebuild(const Eigen::MatrixXd& q, const Eigen::VectorXd& diag) {
  Eigen::MatrixXd m = q * diag.asDiagonal() * q.transpose();
  // (a + b) / 2 is commutative in floating point, so this is exactly symmetric.
  return 0.5 * (m + m.transpose());
}

}  // namespace

SpdCovariance::SpdCovariance(const Eigen::Ref<const Eigen::MatrixXd>& matrix, double eigen_floor)
    : eigen_floor_(eigen_floor) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ShapeError("SpdCovariance: matrix must be square and non-empty");
  }
  if (!matrix.allFinite()) throw DomainError("SpdCovariance: non-finite entry");
  if (!(eigen_floor > 0.0)) throw DomainError("SpdCovariance: eigen_floor must be positive");

  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw SingularityError("SpdCovariance: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues().cwiseMax(eigen_floor);
  matrix_ = rebuild(solver.eigenvectors(), eigenvalues_);
  inverse_ = rebuild(solver.eigenvectors(), eigenvalues_.cwiseInverse());

  const Eigen::MatrixXd residual =
      matrix_ * inverse_ - Eigen::MatrixXd::Identity(matrix_.rows(), matrix_.cols());
  const double err = residual.cwiseAbs().maxCoeff();
  if (!(err <= kInverseCheckTolerance)) {
    throw SingularityError(fmt::format("SpdCovariance: V V^-1 deviates from identity by {:.3g}", err));
  }
}

Eigen::VectorXd SpdCovariance::apply_inverse(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  check_dim(v.size(), dim(), "apply_inverse");
  return inverse_ * v;
}

SignalVector::SignalVector(Eigen::VectorXd v, std::string l) : values(std::move(v)), label(std::move(l)) {
  if (!values.allFinite()) throw DomainError("SignalVector '" + label + "': non-finite entry");
}

SpdCovariance make_spd_cov(stochastics::RngStream& stream, Eigen::Index n, Eigen::Index n_factors,
                           double idio_scale) {
  if (n < 2) throw DomainError("make_spd_cov: n must be >= 2");
  if (n_factors < 1) throw DomainError("make_spd_cov: n_factors must be >= 1");
  if (!(idio_scale > 0.0)) throw DomainError("make_spd_cov: idio_scale must be positive");
  const Eigen::MatrixXd f = stochastics::standard_normal_matrix(stream, n, n_factors);
  const Eigen::VectorXd lambda = stochastics::uniform(stream, n_factors, 0.6, 1.4);
  const Eigen::VectorXd d = stochastics::uniform(stream, n, idio_scale, 2.0 * idio_scale);
  Eigen::MatrixXd v = f * lambda.asDiagonal() * f.transpose();
  v.diagonal() += d;
  return SpdCovariance(v);
}

SignalVector generate_mu(stochastics::RngStream& stream, Eigen::Index n, double scale) {
  Eigen::VectorXd mu = stochastics::standard_normal(stream, n);
  const double norm = mu.norm();
  if (norm == 0.0) throw DegenerateError("generate_mu: zero draw");
  return {mu * (scale / norm), "mu_true"};
}

double vm_inner(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
                const SpdCovariance& cov) {
  check_dim(u.size(), cov.dim(), "vm_inner");
  check_dim(v.size(), cov.dim(), "vm_inner");
  return u.dot(cov.inverse() * v);
}

double vm_norm(const Eigen::Ref<const Eigen::VectorXd>& u, const SpdCovariance& cov) {
  return std::sqrt(std::max(vm_inner(u, u, cov), 0.0));
}

double cosine_alignment(const SignalVector& mu, const SignalVector& mu_tilde, const SpdCovariance& cov) {
  const double nm = vm_norm(mu.values, cov);
  const double nt = vm_norm(mu_tilde.values, cov);
  if (nm == 0.0 || nt == 0.0) throw DegenerateError("cosine_alignment: zero signal");
  return std::clamp(vm_inner(mu.values, mu_tilde.values, cov) / (nm * nt), -1.0, 1.0);
}

Eigen::VectorXd tangency_direction(const SignalVector& signal, const SpdCovariance& cov) {
  if (signal.values.isZero(0.0)) throw DegenerateError("tangency_direction: zero signal");
  return cov.apply_inverse(signal.values);
}

PortfolioStats sharpe_of_weights(const Eigen::Ref<const Eigen::VectorXd>& w, const SignalVector& mu,
                                 const SpdCovariance& cov) {
  check_dim(w.size(), cov.dim(), "sharpe_of_weights");
  check_dim(mu.size(), cov.dim(), "sharpe_of_weights");
  if (w.isZero(0.0)) throw DegenerateError("sharpe_of_weights: zero weights");
  PortfolioStats s;
  s.mean = mu.values.dot(w);
  const double var = w.dot(cov.matrix() * w);
  if (!(var > 0.0)) throw std::logic_error("sharpe_of_weights: non-positive variance for SPD covariance");
  s.vol = std::sqrt(var);
  s.sharpe = s.mean / s.vol;
  return s;
}

SignalVector AlignmentFamily::surrogate(double theta) const {
  return {std::cos(theta) * mu.values + std::sin(theta) * nu.values, fmt::format("mu_theta_{:.6f}", theta)};
}

AlignmentFamily build_alignment_family(const SignalVector& mu, const SpdCovariance& cov,
                                       stochastics::RngStream& stream, std::vector<double> theta_grid) {
  const Eigen::Index n = mu.size();
  check_dim(n, cov.dim(), "build_alignment_family");
  if (n < 2) throw DegenerateError("build_alignment_family: no orthogonal complement for n < 2");
  const double mu_norm_sq = vm_inner(mu.values, mu.values, cov);
  if (!(mu_norm_sq > 0.0)) throw DegenerateError("build_alignment_family: zero mu");
  const double mu_norm = std::sqrt(mu_norm_sq);

  Eigen::VectorXd nu;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 64) throw DegenerateError("build_alignment_family: could not draw a complement");
    nu = stochastics::standard_normal(stream, n);
    for (int pass = 0; pass < 2; ++pass) nu -= (vm_inner(mu.values, nu, cov) / mu_norm_sq) * mu.values;
    const double residual = vm_norm(nu, cov);
    if (residual >= 1e-10 * mu_norm) {
      nu *= mu_norm / residual;
      break;
    }
  }
  for (double theta : theta_grid) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw DomainError("build_alignment_family: theta outside [0, pi]");
  }
  return {mu, {std::move(nu), "nu"}, std::move(theta_grid)};
}

SignalVector match_vm_norm(const SignalVector& signal, const SignalVector& reference, const SpdCovariance& cov) {
  const double norm = vm_norm(signal.values, cov);
  if (norm == 0.0) throw DegenerateError("match_vm_norm: zero signal");
  return {signal.values * (vm_norm(reference.values, cov) / norm), signal.label};
}

SignalVector epsilon_scaled_signal(const SignalVector& mu, double epsilon) {
  return {epsilon * mu.values, fmt::format("{}_eps{}", mu.label, epsilon)};
}

PayoffStats payoff_stats(const Eigen::Ref<const Eigen::VectorXd>& weights,
                         const Eigen::Ref<const Eigen::VectorXd>& returns) {
  check_dim(weights.size(), returns.size(), "payoff_stats");
  if (weights.size() < 2) throw InsufficientDataError("payoff_stats: need at least 2 observations");
  const Eigen::ArrayXd payoff = weights.array() * returns.array();
  PayoffStats out;
  out.expected_payoff = payoff.mean();
  const double sd = std::sqrt((payoff - out.expected_payoff).square().mean());
  if (!(sd > 0.0)) throw DegenerateError("payoff_stats: payoff has zero variance");
  out.sharpe = out.expected_payoff / sd;
  return out;
}

std::vector<double> sharpe_along_attenuation(const SignalVector& mu, const SignalVector& nu,
                                             const SpdCovariance& cov,
                                             const factor_bias::CancellationParams& params,
                                             const std::vector<double>& sigma_zeta_grid,
                                             factor_bias::ConfounderScaling scaling) {
  std::vector<double> out;
  out.reserve(sigma_zeta_grid.size());
  for (double sigma : sigma_zeta_grid) {
    factor_bias::CancellationParams p = params;
    p.sigma_zeta = sigma;
    const double bias = p.beta - factor_bias::attenuated_slope(p, scaling);
    const SignalVector surrogate(mu.values + bias * nu.values, "mu_attenuated");
    out.push_back(sharpe_of_weights(tangency_direction(surrogate, cov), mu, cov).sharpe);
  }
  return out;
}

}  // namespace frontier_lab::geometry
