#include "frontier_lab/signals.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::signals {

namespace {

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) names.push_back(fmt::format("{}{}", prefix, i));
  return names;
}

double sign_of(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// Mean Bernoulli log-likelihood terms computed from the linear predictor
// without forming log(p) directly.
double log_likelihood(const Eigen::VectorXd& eta, const Eigen::Ref<const Eigen::VectorXd>& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    // log(1 + exp(e)), stable for large |e|
    const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll;
}

}  // namespace

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

CancellationDataset generate_cancellation_dataset(RngStream& stream, Eigen::Index n, double alpha,
                                                  CancellationOutcomeModel model) {
  if (!(std::abs(alpha) < 1.0)) throw DomainError("generate_cancellation_dataset: need |alpha| < 1");
  if (n < 1) throw DomainError("generate_cancellation_dataset: need n >= 1");
  const Eigen::VectorXd x = stochastics::standard_normal(stream, n);
  const Eigen::VectorXd eta = stochastics::normal(stream, n, 0.0, std::sqrt(1.0 - alpha * alpha));
  const Eigen::VectorXd z = -alpha * x + eta;

  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = logistic(model.b_x * x[i] + model.b_z * z[i]);
  Eigen::VectorXd outcomes = stochastics::bernoulli_from_prob(stream, p);

  Eigen::MatrixXd values(n, 2);
  values.col(0) = x;
  values.col(1) = z;
  return {SamplePanel(std::move(values), {"x", "z_prime"}), std::move(p), std::move(outcomes)};
}

NonlinearDataset generate_nonlinear_dataset(const NonlinearDgpConfig& config, RngStream& stream) {
  const Eigen::Index n = config.n_obs;
  const Eigen::Index k = config.n_features;
  if (n < 10) throw DomainError("generate_nonlinear_dataset: n_obs must be >= 10");
  if (k < 1) throw DomainError("generate_nonlinear_dataset: n_features must be >= 1");
  if (static_cast<Eigen::Index>(config.alpha_weights.size()) > k) {
    throw DomainError("generate_nonlinear_dataset: more confounder weights than features");
  }
  if (!(config.noise_scale >= 0.0 && config.return_noise >= 0.0)) {
    throw DomainError("generate_nonlinear_dataset: noise scales must be >= 0");
  }

  const Eigen::MatrixXd x = stochastics::standard_normal_matrix(stream, n, k);
  const Eigen::VectorXd eta = stochastics::normal(stream, n, 0.0, config.noise_scale);
  Eigen::VectorXd z = eta;
  for (std::size_t j = 0; j < config.alpha_weights.size(); ++j) {
    z += config.alpha_weights[j] * x.col(static_cast<Eigen::Index>(j));
  }

  Eigen::MatrixXd p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shared = 0.5 * std::sin(z[i]);
    for (Eigen::Index j = 0; j < k; ++j) p(i, j) = logistic(std::tanh(x(i, j)) + shared);
  }
  const Eigen::MatrixXd noise = stochastics::standard_normal_matrix(stream, n, k) * config.return_noise;
  Eigen::MatrixXd returns = (2.0 * p.array() - 1.0).matrix() * config.return_scale + noise;

  const Eigen::VectorXd flat_p = p.transpose().reshaped();
  const Eigen::VectorXd flat_y = stochastics::bernoulli_from_prob(stream, flat_p);
  Eigen::MatrixXd outcomes = flat_y.reshaped(k, n).transpose();

  return {SamplePanel(x, numbered("x", k)), std::move(z), std::move(p), std::move(outcomes),
          SamplePanel(std::move(returns), numbered("asset", k))};
}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& features) const {
  if (features.cols() != coefficients.size()) throw ShapeError("predict_proba: feature count mismatch");
  const Eigen::VectorXd eta = (features * coefficients).array() + intercept;
  return eta.unaryExpr([](double e) { return logistic(e); });
}

LogisticModel fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const Eigen::Ref<const Eigen::VectorXd>& outcomes, LogisticOptions options) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (outcomes.size() != n) throw ShapeError("fit_logistic: outcome length mismatch");
  if (n < k + 1) throw InsufficientDataError("fit_logistic: need n >= n_features + 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (outcomes[i] != 0.0 && outcomes[i] != 1.0) throw DomainError("fit_logistic: outcomes must be 0 or 1");
  }

  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = features;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k + 1);
  Eigen::VectorXd eta = design * theta;
  double ll = log_likelihood(eta, outcomes);
  LogisticModel model;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::VectorXd p = eta.unaryExpr([](double e) { return logistic(e); });
    const Eigen::VectorXd grad = design.transpose() * (outcomes - p);
    model.n_iterations = iter;
    if (grad.norm() / static_cast<double>(n) <= options.tol) {
      model.converged = true;
      break;
    }
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    auto usable = [&] { return ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-300; };
    if (!usable()) {
      hessian.diagonal().array() += options.ridge_jitter;
      ldlt.compute(hessian);
      if (!usable()) throw SingularityError("fit_logistic: weighted normal equations are singular");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    double scale = 1.0;
    Eigen::VectorXd candidate = theta + step;
    Eigen::VectorXd candidate_eta = design * candidate;
    double candidate_ll = log_likelihood(candidate_eta, outcomes);
    for (int halving = 0; halving < 30 && !(candidate_ll >= ll); ++halving) {
      scale *= 0.5;
      candidate = theta + scale * step;
      candidate_eta = design * candidate;
      candidate_ll = log_likelihood(candidate_eta, outcomes);
    }
    theta = std::move(candidate);
    eta = std::move(candidate_eta);
    ll = candidate_ll;
    model.n_iterations = iter + 1;

    const double norm = theta.norm();
    if (norm > options.coefficient_cap) {
      theta *= options.coefficient_cap / norm;
      eta = design * theta;
      ll = log_likelihood(eta, outcomes);
      model.separated = true;
      break;
    }
  }
  // Converged onto outcomes reproduced exactly: the classes are separable and
  // the MLE lies at infinity.
  if (!model.separated) {
    const Eigen::ArrayXd p = eta.unaryExpr([](double e) { return logistic(e); }).array();
    model.separated = ((outcomes.array() - p).abs() < 1e-6).all();
  }

  model.intercept = theta[0];
  model.coefficients = theta.tail(k);
  model.log_likelihood = ll;
  return model;
}

LogisticModel fit_logistic(const SamplePanel& features, const Eigen::Ref<const Eigen::VectorXd>& outcomes,
                           LogisticOptions options) {
  return fit_logistic(features.values(), outcomes, options);
}

Eigen::VectorXd prob_to_weight(const Eigen::VectorXd& p) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DomainError("prob_to_weight: probability outside [0, 1]");
  }
  return (2.0 * p.array() - 1.0).matrix();
}

Eigen::MatrixXd prob_to_weight(const Eigen::MatrixXd& p) {
  if (!((p.array() >= 0.0).all() && (p.array() <= 1.0).all())) {
    throw DomainError("prob_to_weight: probability outside [0, 1]");
  }
  return (2.0 * p.array() - 1.0).matrix();
}

SignalVector power_transform(const SignalVector& mu, double p) {
  if (!(p > 0.0)) throw DomainError("power_transform: exponent must be positive");
  Eigen::VectorXd out(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double v = mu.values[i];
    out[i] = sign_of(v) * std::pow(std::abs(v), p);
  }
  return {std::move(out), fmt::format("mu_surrogate_p{}", p)};
}

MisspecifiedSignals drawn_beta_signals(const SamplePanel& features, RngStream& stream) {
  const Eigen::Index k = features.n_vars();
  MisspecifiedSignals out;
  out.betas = (stochastics::standard_normal_matrix(stream, k, k).array() * 0.5 + 1.0).matrix();
  out.intercepts = Eigen::VectorXd::Zero(k);
  const Eigen::MatrixXd logits = features.values() * out.betas.transpose();
  out.p_pred = logits.unaryExpr([](double e) { return logistic(e); });
  return out;
}

MisspecifiedSignals fitted_signals(const SamplePanel& features, const Eigen::Ref<const Eigen::MatrixXd>& outcomes,
                                   LogisticOptions options) {
  const Eigen::Index k = outcomes.cols();
  if (outcomes.rows() != features.n_obs()) throw ShapeError("fitted_signals: row count mismatch");
  MisspecifiedSignals out;
  out.betas.resize(k, features.n_vars());
  out.intercepts.resize(k);
  out.p_pred.resize(features.n_obs(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const LogisticModel model = fit_logistic(features.values(), outcomes.col(j), options);
    out.betas.row(j) = model.coefficients.transpose();
    out.intercepts[j] = model.intercept;
    out.p_pred.col(j) = model.predict_proba(features.values());
  }
  return out;
}

WeightPair::WeightPair(Eigen::VectorXd truth, Eigen::VectorXd pred)
    : omega_true(std::move(truth)), omega_pred(std::move(pred)) {
  if (omega_true.size() != omega_pred.size()) throw ShapeError("WeightPair: length mismatch");
  if (omega_true.size() < 1) throw InsufficientDataError("WeightPair: empty");
  auto in_range = [](const Eigen::VectorXd& v) {
    return (v.array() >= -1.0).all() && (v.array() <= 1.0).all();
  };
  if (!in_range(omega_true) || !in_range(omega_pred)) throw DomainError("WeightPair: weight outside [-1, 1]");
}

SignAgreement sign_agreement(const WeightPair& pair) {
  const Eigen::Index n = pair.omega_true.size();
  Eigen::Index agree = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sign_of(pair.omega_true[i]) == sign_of(pair.omega_pred[i])) ++agree;
  }
  SignAgreement out;
  out.rate = static_cast<double>(agree) / static_cast<double>(n);
  if (n >= 2) {
    const double c = stochastics::pearson_correlation(pair.omega_true, pair.omega_pred);
    if (std::isfinite(c)) out.correlation = c;
  }
  return out;
}

}  // namespace frontier_lab::signals
