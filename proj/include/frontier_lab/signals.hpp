#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "frontier_lab/geometry.hpp"
#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::signals {

using geometry::SignalVector;
using stochastics::RngStream;
using stochastics::SamplePanel;

/// Outcome model for the cancellation dataset: P(Y=1 | X, Z') = logistic(b_x X + b_z Z').
struct CancellationOutcomeModel {
  double b_x = 1.0;
  double b_z = 0.3;
};

struct CancellationDataset {
  SamplePanel panel;  // columns "x", "z_prime"
  Eigen::VectorXd p_true;
  Eigen::VectorXd outcomes;
};

/// X ~ N(0,1), Z' = -alpha X + eta with eta ~ N(0, 1 - alpha^2), so Var(Z') = 1
/// and Cov(X, Z') = -alpha. Draw order: X, eta, outcomes.
/// Throws DomainError unless |alpha| < 1.
CancellationDataset generate_cancellation_dataset(RngStream& stream, Eigen::Index n, double alpha,
                                                  CancellationOutcomeModel model = {});

struct NonlinearDgpConfig {
  Eigen::Index n_obs = 1000;
  Eigen::Index n_features = 5;  // one feature per asset
  std::vector<double> alpha_weights{0.7, 0.3};
  double noise_scale = 1.0;  // sd of eta in Z
  double return_scale = 2.0;
  double return_noise = 0.05;
};

struct NonlinearDataset {
  SamplePanel features;
  Eigen::VectorXd confounder;
  Eigen::MatrixXd p_true;    // n_obs x n_features
  Eigen::MatrixXd outcomes;  // Bernoulli(p_true)
  SamplePanel returns;       // return_scale (2 p_true - 1) + N(0, return_noise)
};

/// Z = sum_j alpha_j X_j + eta; P(Y_j = 1) = logistic(tanh(X_j) + 0.5 sin Z).
/// Draw order: X (row by row), eta, return noise (row by row), outcomes.
NonlinearDataset generate_nonlinear_dataset(const NonlinearDgpConfig& config, RngStream& stream);

double logistic(double x);

struct LogisticOptions {
  int max_iter = 100;
  double tol = 1e-8;             // on ||gradient|| / n
  double coefficient_cap = 1e3;  // separation guard
  double ridge_jitter = 1e-10;
};

struct LogisticModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  bool converged = false;
  bool separated = false;  // norm hit the cap, or every outcome fitted to within 1e-6
  int n_iterations = 0;
  double log_likelihood = 0.0;

  Eigen::VectorXd predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& features) const;
};

/// Maximum-likelihood logistic regression with intercept by iteratively
/// reweighted least squares (Newton steps, halved while the log-likelihood
/// decreases). A singular weighted system is retried once with ridge_jitter
/// on the diagonal; SingularityError if it is still singular.
LogisticModel fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const Eigen::Ref<const Eigen::VectorXd>& outcomes, LogisticOptions options = {});
LogisticModel fit_logistic(const SamplePanel& features, const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                           LogisticOptions options = {});

/// 2p - 1 elementwise; DomainError for p outside [0, 1].
Eigen::VectorXd prob_to_weight(const Eigen::VectorXd& p);
Eigen::MatrixXd prob_to_weight(const Eigen::MatrixXd& p);

/// sign(mu_i) |mu_i|^p. DomainError unless p > 0.
SignalVector power_transform(const SignalVector& mu, double p);

/// Per-asset misspecified predicted probabilities.
struct MisspecifiedSignals {
  Eigen::MatrixXd p_pred;  // n_obs x n_assets
  Eigen::MatrixXd betas;   // n_assets x n_features; row j drives asset j
  Eigen::VectorXd intercepts;
};

/// betas ~ N(1, 0.5) drawn row by row; p_pred = logistic(X betas^T), no intercept.
MisspecifiedSignals drawn_beta_signals(const SamplePanel& features, RngStream& stream);
/// One fit_logistic per asset on the observed features only.
MisspecifiedSignals fitted_signals(const SamplePanel& features, const Eigen::Ref<const Eigen::MatrixXd>& outcomes,
                                   LogisticOptions options = {});

/// Weights in [-1, 1].
struct WeightPair {
  Eigen::VectorXd omega_true;
  Eigen::VectorXd omega_pred;

  WeightPair(Eigen::VectorXd truth, Eigen::VectorXd pred);
};

struct SignAgreement {
  double rate = 0.0;
  /// Pearson correlation; empty when either vector has zero variance.
  std::optional<double> correlation;
};

/// Exact zeros agree only with exact zeros.
SignAgreement sign_agreement(const WeightPair& pair);

}  // namespace frontier_lab::signals
