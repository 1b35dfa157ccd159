#pragma once

#include <Eigen/Dense>

#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::factor_bias {

/// One-confounder factor model: X_n = gamma_n Z + beta_n F2 + eps with
/// F2 = delta Z + eta, Var(Z) = Var(F2) = 1, so delta = Cov(Z, F2).
struct ConfounderModel {
  double beta_n = 0.0;
  double gamma_n = 0.0;
  double delta = 0.0;
};

/// Loading of X_n on F2 when Z is omitted: beta_n + gamma_n * delta.
double biased_loading(const ConfounderModel& model);

/// The same loading under the Var(F2) = 1 + delta^2 normalization:
/// (beta_n + gamma_n * delta) / (1 + delta^2). Kept only for side-by-side
/// comparison with biased_loading.
double biased_loading_lopez_variant(const ConfounderModel& model);

/// Two assets, two factors (Z, F2). Row i of loadings is (gamma_i, beta_i).
struct TwoAssetStructure {
  Eigen::Matrix2d loadings;
  Eigen::Vector2d target_exposure{0.0, 1.0};
};

struct ExposureResult {
  Eigen::Vector2d weights;
  Eigen::Vector2d realized_exposure;  // (Z exposure, F2 exposure) under the true loadings
};

/// Solves the investor's exposure targeting with the misspecified loadings
/// beta_hat_i = beta_i + gamma_i delta (the Z column is invisible to them):
/// [1 1; beta_hat_1 beta_hat_2] w = c, then reports the true exposure
/// loadings^T w. For c = (0, 1) this is w = (-1, 1) / (beta_hat_2 - beta_hat_1).
/// Throws DegenerateError when beta_hat_1 == beta_hat_2.
ExposureResult misspecified_exposure(const TwoAssetStructure& structure, double delta);

/// Parameters of the approximate-cancellation model
///   Z' = -alpha X + eta + zeta,  Y = beta X + gamma Z~ + eps,  Z~ = Z' / s.
struct CancellationParams {
  double alpha = 0.6;
  double beta = 0.2;
  double gamma = 0.7;
  double sigma_eta = 0.8;
  double sigma_zeta = 0.0;
  double sigma_eps = 1.0;
};

/// How the confounder is rescaled before it enters Y.
enum class ConfounderScaling {
  kUnscaled,       ///< s = 1 (structural-cancellation model)
  kUnitPlusNoise,  ///< s = sqrt(1 + sigma_eta^2 + sigma_zeta^2) (closed-form law as stated)
  kExactVariance,  ///< s = sqrt(Var Z') = sqrt(alpha^2 + sigma_eta^2 + sigma_zeta^2)
};

/// The scale s for a given noise level.
double confounder_scale(const CancellationParams& params, ConfounderScaling scaling);

/// Population OLS slope of Y on X: beta - alpha gamma / s.
/// With sigma_eta^2 = 1 - alpha^2 and kExactVariance, s = sqrt(1 + sigma_zeta^2),
/// which is the normalization of the Monte Carlo experiment.
double attenuated_slope(const CancellationParams& params,
                        ConfounderScaling scaling = ConfounderScaling::kUnitPlusNoise);

/// d slope / d sigma_zeta = alpha gamma sigma_zeta / s^3.
double attenuated_slope_derivative(const CancellationParams& params,
                                   ConfounderScaling scaling = ConfounderScaling::kUnitPlusNoise);

struct SlopeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range of the slope over sigma_zeta in [0, inf): endpoints beta and the
/// sigma_zeta = 0 value, ordered. For alpha gamma > 0 the lower bound is
/// attained at sigma_zeta = 0.
SlopeBounds attenuation_bounds(const CancellationParams& params,
                               ConfounderScaling scaling = ConfounderScaling::kUnitPlusNoise);

/// True when the slope keeps the sign of beta for every sigma_zeta >= 0.
/// For beta > 0 that is alpha gamma <= beta * s(sigma_zeta = 0); beta < 0
/// mirrors it. With beta == 0 only the unconfounded case qualifies.
bool non_inversion_check(const CancellationParams& params,
                         ConfounderScaling scaling = ConfounderScaling::kUnitPlusNoise);

/// beta - alpha gamma.
double cancellation_slope(double beta, double alpha, double gamma);

/// One Monte Carlo draw of the cancellation model with n observations and
/// the OLS slope of Y on X alone. Draw order: X, eta, zeta, eps.
double simulate_attenuation_slope(const CancellationParams& params, Eigen::Index n,
                                  stochastics::RngStream& stream, ConfounderScaling scaling);

}  // namespace frontier_lab::factor_bias
