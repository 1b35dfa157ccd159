#include <doctest.h>

#include <cmath>
#include <limits>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/signals.hpp"

using namespace frontier_lab;
using namespace frontier_lab::signals;

namespace {

double log_lik(double a, double b, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(a + b * x[i])));
    ll += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return ll;
}

// Coarse then fine grid maximization of the log-likelihood over (intercept, slope).
std::pair<double, double> grid_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double best = -std::numeric_limits<double>::infinity(), ba = 0.0, bb = 0.0;
  for (double a = -3.0; a <= 3.0; a += 0.01) {
    for (double b = -3.0; b <= 3.0; b += 0.01) {
      const double ll = log_lik(a, b, x, y);
      if (ll > best) best = ll, ba = a, bb = b;
    }
  }
  const double ca = ba, cb = bb;
  for (double a = ca - 0.02; a <= ca + 0.02; a += 0.0005) {
    for (double b = cb - 0.02; b <= cb + 0.02; b += 0.0005) {
      const double ll = log_lik(a, b, x, y);
      if (ll > best) best = ll, ba = a, bb = b;
    }
  }
  return {ba, bb};
}

}  // namespace

TEST_CASE("logistic is stable at the extremes") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  CHECK(logistic(2.0) + logistic(-2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fit_logistic matches a brute-force likelihood grid") {
  Eigen::VectorXd x(8), y(8);
  x << -2.0, -1.3, -0.7, -0.2, 0.1, 0.6, 1.1, 1.9;
  y << 0, 0, 1, 0, 1, 0, 1, 1;
  const LogisticModel m = fit_logistic(Eigen::MatrixXd(x), y);
  CHECK(m.converged);
  CHECK_FALSE(m.separated);
  const auto [a, b] = grid_oracle(x, y);
  CHECK(std::abs(m.intercept - a) < 2e-3);
  CHECK(std::abs(m.coefficients[0] - b) < 2e-3);
  CHECK(m.log_likelihood == doctest::Approx(log_lik(m.intercept, m.coefficients[0], x, y)).epsilon(1e-10));
}

TEST_CASE("fit_logistic recovers simulated coefficients") {
  stochastics::RngStream s(21);
  const Eigen::Index n = 100000;
  const Eigen::MatrixXd x = stochastics::standard_normal_matrix(s, n, 2);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = logistic(-0.4 + 1.2 * x(i, 0) - 0.7 * x(i, 1));
  const Eigen::VectorXd y = stochastics::bernoulli_from_prob(s, p);
  const LogisticModel m = fit_logistic(x, y);
  CHECK(m.converged);
  CHECK(std::abs(m.intercept + 0.4) < 0.05);
  CHECK(std::abs(m.coefficients[0] - 1.2) < 0.05);
  CHECK(std::abs(m.coefficients[1] + 0.7) < 0.05);
  CHECK(m.predict_proba(x).size() == n);
}

TEST_CASE("fit_logistic flags separation and bad inputs") {
  Eigen::VectorXd x(6), y(6);
  x << -3, -2, -1, 1, 2, 3;
  y << 0, 0, 0, 1, 1, 1;
  const LogisticModel m = fit_logistic(Eigen::MatrixXd(x), y);
  CHECK(m.separated);
  CHECK(m.coefficients.allFinite());
  Eigen::VectorXd bad = y;
  bad[0] = 0.5;
  CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd(x), bad), DomainError);
  CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd(x), Eigen::VectorXd::Zero(5)), ShapeError);
}

TEST_CASE("prob_to_weight and power_transform") {
  Eigen::VectorXd p(3);
  p << 0.0, 0.5, 1.0;
  CHECK(prob_to_weight(p) == Eigen::Vector3d(-1.0, 0.0, 1.0));
  p[1] = 1.5;
  CHECK_THROWS_AS(prob_to_weight(p), DomainError);
  CHECK_THROWS_AS(prob_to_weight(Eigen::MatrixXd(Eigen::MatrixXd::Constant(2, 2, -0.1))), DomainError);

  const geometry::SignalVector mu(Eigen::Vector3d(-0.25, 0.0, 0.5), "mu");
  const auto t = power_transform(mu, 2.0);
  CHECK(t.values == Eigen::Vector3d(-0.0625, 0.0, 0.25));
  CHECK(power_transform(mu, 1.0).values == mu.values);
  CHECK_THROWS_AS(power_transform(mu, 0.0), DomainError);
}

TEST_CASE("sign agreement counts exact zeros") {
  Eigen::VectorXd t(5), q(5);
  t << 0.5, -0.2, 0.0, 0.0, 0.9;
  q << 0.1, 0.3, 0.0, 0.2, 0.4;
  const SignAgreement a = sign_agreement(WeightPair(t, q));
  CHECK(a.rate == doctest::Approx(0.6));
  REQUIRE(a.correlation.has_value());
  CHECK(*a.correlation == doctest::Approx(stochastics::pearson_correlation(t, q)));
  const SignAgreement flat = sign_agreement(WeightPair(Eigen::VectorXd::Constant(3, 0.5), Eigen::Vector3d(0.1, 0.2, 0.3)));
  CHECK_FALSE(flat.correlation.has_value());
  CHECK_THROWS_AS(WeightPair(Eigen::Vector2d(1.5, 0.0), Eigen::Vector2d(0.0, 0.0)), DomainError);
  CHECK_THROWS_AS(WeightPair(Eigen::Vector2d(0.5, 0.0), Eigen::Vector3d(0.0, 0.0, 0.0)), ShapeError);
}

TEST_CASE("cancellation dataset moments") {
  stochastics::RngStream s(31);
  const CancellationDataset d = generate_cancellation_dataset(s, 100000, 0.6);
  const Eigen::VectorXd x = d.panel.column("x");
  const Eigen::VectorXd z = d.panel.column("z_prime");
  const Eigen::MatrixXd both = d.panel.values();
  const auto m = stochastics::empirical_moments(both);
  CHECK(std::abs(m.covariance(1, 1) - 1.0) < 0.02);
  CHECK(std::abs(m.covariance(0, 1) + 0.6) < 0.02);
  CHECK(((d.outcomes.array() == 0.0) || (d.outcomes.array() == 1.0)).all());
  CHECK(std::abs(d.outcomes.mean() - d.p_true.mean()) < 0.01);
  CHECK_THROWS_AS(generate_cancellation_dataset(s, 10, 1.0), DomainError);
}

TEST_CASE("nonlinear dataset and misspecified signals") {
  stochastics::RngStream s(41);
  NonlinearDgpConfig cfg;
  cfg.n_obs = 400;
  const NonlinearDataset d = generate_nonlinear_dataset(cfg, s);
  CHECK(d.features.n_obs() == 400);
  CHECK(d.p_true.cols() == 5);
  CHECK(((d.p_true.array() > 0.0) && (d.p_true.array() < 1.0)).all());
  const Eigen::MatrixXd expected_mean = cfg.return_scale * (2.0 * d.p_true.array() - 1.0);
  CHECK((d.returns.values() - expected_mean).cwiseAbs().maxCoeff() < 6.0 * cfg.return_noise);

  stochastics::RngStream a(5), b(5);
  const MisspecifiedSignals s1 = drawn_beta_signals(d.features, a);
  const MisspecifiedSignals s2 = drawn_beta_signals(d.features, b);
  CHECK(s1.p_pred == s2.p_pred);
  CHECK(s1.betas.rows() == 5);
  const MisspecifiedSignals fit = fitted_signals(d.features, d.outcomes);
  CHECK(fit.p_pred.rows() == 400);
  CHECK(fit.intercepts.size() == 5);
}
