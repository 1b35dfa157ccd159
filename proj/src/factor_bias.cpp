#include "frontier_lab/factor_bias.hpp"

#include <algorithm>
#include <cmath>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::factor_bias {

namespace {

void check_model(const ConfounderModel& model) {
  if (!(std::abs(model.delta) <= 1.0)) throw DomainError("ConfounderModel: |delta| must be <= 1");
}

void check_params(const CancellationParams& p) {
  if (!(p.sigma_eta >= 0.0 && p.sigma_zeta >= 0.0 && p.sigma_eps >= 0.0)) {
    throw DomainError("CancellationParams: noise scales must be non-negative");
  }
}

// s^2 without the sigma_zeta^2 term.
double base_scale_squared(const CancellationParams& p, ConfounderScaling scaling) {
  switch (scaling) {
    case ConfounderScaling::kUnscaled:
      return 1.0;
    case ConfounderScaling::kUnitPlusNoise:
      return 1.0 + p.sigma_eta * p.sigma_eta;
    case ConfounderScaling::kExactVariance:
      return p.alpha * p.alpha + p.sigma_eta * p.sigma_eta;
  }
  return 1.0;
}

}  // namespace

double biased_loading(const ConfounderModel& model) {
  check_model(model);
  return model.beta_n + model.gamma_n * model.delta;
}

double biased_loading_lopez_variant(const ConfounderModel& model) {
  check_model(model);
  return (model.beta_n + model.gamma_n * model.delta) / (1.0 + model.delta * model.delta);
}

ExposureResult misspecified_exposure(const TwoAssetStructure& structure, double delta) {
  const Eigen::Matrix2d& b = structure.loadings;
  const double b1 = b(0, 1) + b(0, 0) * delta;
  const double b2 = b(1, 1) + b(1, 0) * delta;
  if (b2 == b1) {
    throw DegenerateError("misspecified_exposure: equal misspecified loadings, weights unbounded");
  }
  // [1 1; b1 b2] w = c  ->  w = [b2 -1; -b1 1] c / (b2 - b1)
  // Dividing last keeps the no-confounder case exact: (beta2 - beta1) / (b2 - b1) == 1.
  const Eigen::Vector2d& c = structure.target_exposure;
  const Eigen::Vector2d unscaled(b2 * c[0] - c[1], -b1 * c[0] + c[1]);
  ExposureResult out;
  out.weights = unscaled / (b2 - b1);
  out.realized_exposure = (b.transpose() * unscaled) / (b2 - b1);
  return out;
}

double confounder_scale(const CancellationParams& params, ConfounderScaling scaling) {
  check_params(params);
  if (scaling == ConfounderScaling::kUnscaled) return 1.0;
  return std::sqrt(base_scale_squared(params, scaling) + params.sigma_zeta * params.sigma_zeta);
}

double attenuated_slope(const CancellationParams& params, ConfounderScaling scaling) {
  return params.beta - params.alpha * params.gamma / confounder_scale(params, scaling);
}

double attenuated_slope_derivative(const CancellationParams& params, ConfounderScaling scaling) {
  if (scaling == ConfounderScaling::kUnscaled) {
    check_params(params);
    return 0.0;
  }
  const double s = confounder_scale(params, scaling);
  return params.alpha * params.gamma * params.sigma_zeta / (s * s * s);
}

SlopeBounds attenuation_bounds(const CancellationParams& params, ConfounderScaling scaling) {
  CancellationParams at_zero = params;
  at_zero.sigma_zeta = 0.0;
  const double start = attenuated_slope(at_zero, scaling);
  check_params(params);
  return {std::min(start, params.beta), std::max(start, params.beta)};
}

bool non_inversion_check(const CancellationParams& params, ConfounderScaling scaling) {
  CancellationParams at_zero = params;
  at_zero.sigma_zeta = 0.0;
  const double s0 = confounder_scale(at_zero, scaling);
  const double bias = params.alpha * params.gamma;
  if (params.beta == 0.0) return bias == 0.0;
  // bias pushing toward the same sign as beta can never flip it.
  if (params.beta * bias <= 0.0) return true;
  return std::abs(bias) <= std::abs(params.beta) * s0;
}

double cancellation_slope(double beta, double alpha, double gamma) { return beta - alpha * gamma; }

double simulate_attenuation_slope(const CancellationParams& params, Eigen::Index n,
                                  stochastics::RngStream& stream, ConfounderScaling scaling) {
  const double s = confounder_scale(params, scaling);
  const Eigen::VectorXd x = stochastics::standard_normal(stream, n);
  const Eigen::VectorXd eta = stochastics::normal(stream, n, 0.0, params.sigma_eta);
  const Eigen::VectorXd zeta = stochastics::normal(stream, n, 0.0, params.sigma_zeta);
  const Eigen::VectorXd eps = stochastics::normal(stream, n, 0.0, params.sigma_eps);
  const Eigen::ArrayXd z_tilde = (-params.alpha * x.array() + eta.array() + zeta.array()) / s;
  const Eigen::VectorXd y = (params.beta * x.array() + params.gamma * z_tilde + eps.array()).matrix();
  return stochastics::ols_simple(y, x).slope;
}

}  // namespace frontier_lab::factor_bias
