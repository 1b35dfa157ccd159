#include "frontier_lab/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/factor_bias.hpp"
#include "frontier_lab/frontier.hpp"
#include "frontier_lab/geometry.hpp"
#include "frontier_lab/harness/svg_chart.hpp"
#include "frontier_lab/market_data.hpp"
#include "frontier_lab/signals.hpp"
#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::harness {

using nlohmann::json;
using stochastics::RngStream;
using stochastics::stream_id;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExperimentReport new_report(const ExperimentConfig& config) {
  ExperimentReport r;
  r.experiment = std::string(to_string(config.experiment));
  r.config_hash = config.hash();
  r.config = config.canonical();
  return r;
}

std::size_t count(std::int64_t v) { return static_cast<std::size_t>(v); }

Cell index_cell(std::size_t i) { return static_cast<std::int64_t>(i); }

double min_of(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::isnan(x) ? x : std::min(m, x);
  return m;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

factor_bias::ConfounderScaling parse_scaling(const std::string& s) {
  if (s == "exact-variance") return factor_bias::ConfounderScaling::kExactVariance;
  if (s == "unit-plus-noise") return factor_bias::ConfounderScaling::kUnitPlusNoise;
  if (s == "unscaled") return factor_bias::ConfounderScaling::kUnscaled;
  throw ConfigError(fmt::format("unknown scaling '{}'", s));
}

frontier::SweepSpan span_of(const ExperimentConfig& c) { return {c.number("span_lo"), c.number("span_hi")}; }

// Appends a frontier to `table` (columns: [prefix...], target_return,
// realized_return, volatility, skipped), merging skipped targets in order.
void append_frontier(Table& table, const std::vector<Cell>& prefix, const frontier::Frontier& f) {
  std::vector<std::pair<double, const frontier::FrontierPoint*>> rows;
  for (const auto& p : f.points) rows.emplace_back(p.target_return, &p);
  for (double t : f.skipped_targets) rows.emplace_back(t, nullptr);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [target, p] : rows) {
    std::vector<Cell> row = prefix;
    row.emplace_back(target);
    row.emplace_back(p ? p->realized_return : kNaN);
    row.emplace_back(p ? p->volatility : kNaN);
    row.emplace_back(std::int64_t{p ? 0 : 1});
    table.add_row(std::move(row));
  }
}

json convexity_json(const frontier::ConvexityReport& c) {
  return {{"n_points", c.n_points},
          {"min_second_divided_difference", c.min_second_divided_difference},
          {"quadratic_leading_coefficient", c.quadratic_leading_coefficient},
          {"quadratic_max_residual", c.quadratic_max_residual},
          {"quadratic_r_squared", c.quadratic_r_squared},
          {"realized_return_slope", c.realized_return_slope},
          {"convex", c.convex()}};
}

// Orthonormal basis (columns) of {w : 1^T w = 0, mu^T w = 0}.
Eigen::MatrixXd constraint_null_space(const Eigen::VectorXd& mu_hat) {
  const Eigen::Index n = mu_hat.size();
  Eigen::MatrixXd a(n, 2);
  a.col(0).setOnes();
  a.col(1) = mu_hat;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 2);
}

struct RandomCheck {
  std::size_t portfolios = 0;
  std::size_t beaten = 0;  // random portfolios with lower variance than the solve
  double min_excess = std::numeric_limits<double>::infinity();
};

// Random feasible perturbations w* + N z of every solved point. The check
// uses the realized variance of both portfolios, so it does not rely on the
// KKT algebra it is testing.
RandomCheck random_feasible_check(const frontier::Frontier& f, const Eigen::MatrixXd& cov, std::size_t per_point,
                                  std::uint64_t seed, std::uint64_t rep) {
  RandomCheck out;
  if (per_point == 0 || f.points.empty()) return out;
  const Eigen::MatrixXd basis = constraint_null_space(f.optimization_signal.values);
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const auto& p = f.points[i];
    const double best = p.weights.dot(cov * p.weights);
    RngStream stream(seed, stream_id(kTagRandomPortfolios, rep, i));
    const Eigen::MatrixXd z = stochastics::standard_normal_matrix(stream, basis.cols(), static_cast<Eigen::Index>(per_point));
    const Eigen::VectorXd scales = stochastics::uniform(stream, static_cast<Eigen::Index>(per_point), 0.0, 1.0);
    for (std::size_t k = 0; k < per_point; ++k) {
      const Eigen::VectorXd w = p.weights + basis * z.col(static_cast<Eigen::Index>(k)) * scales[static_cast<Eigen::Index>(k)];
      const double var = w.dot(cov * w);
      const double excess = var - best;
      out.min_excess = std::min(out.min_excess, excess);
      if (excess < -1e-12 * std::max(best, 1e-300)) ++out.beaten;
    }
    out.portfolios += per_point;
  }
  return out;
}

}  // namespace

ExperimentReport run_cancellation(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const auto n = static_cast<Eigen::Index>(config.integer("n"));
  const double alpha = config.number("alpha");
  const signals::CancellationOutcomeModel model{config.number("b_x"), config.number("b_z")};

  struct RepResult {
    Eigen::VectorXd omega_true;
    Eigen::VectorXd omega_pred;
    signals::SignAgreement agreement;
    signals::LogisticModel fit;
  };
  std::vector<RepResult> slots(reps);
  parallel_for(reps, resolve_threads(config.threads), [&](std::size_t rep) {
    RngStream stream(config.seed, stream_id(kTagCancellation, rep));
    const auto data = signals::generate_cancellation_dataset(stream, n, alpha, model);
    const Eigen::MatrixXd x = data.panel.column("x");
    RepResult r;
    r.fit = signals::fit_logistic(x, data.outcomes);
    r.omega_true = signals::prob_to_weight(data.p_true);
    r.omega_pred = signals::prob_to_weight(r.fit.predict_proba(x));
    r.agreement = signals::sign_agreement(signals::WeightPair(r.omega_true, r.omega_pred));
    slots[rep] = std::move(r);
  });

  ExperimentReport report = new_report(config);
  Table& weights = report.add_table("weights", {"rep", "omega_true", "omega_pred"});
  Table& agreement = report.add_table(
      "agreement", {"rep", "sign_agreement_rate", "correlation", "coef_x", "intercept", "converged", "separated"});
  std::vector<double> rates, corrs;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const RepResult& r = slots[rep];
    for (Eigen::Index i = 0; i < n; ++i) weights.add_row({index_cell(rep), r.omega_true[i], r.omega_pred[i]});
    const double corr = r.agreement.correlation.value_or(kNaN);
    rates.push_back(r.agreement.rate);
    corrs.push_back(corr);
    agreement.add_row({index_cell(rep), r.agreement.rate, corr, r.fit.coefficients[0], r.fit.intercept,
                       std::int64_t{r.fit.converged}, std::int64_t{r.fit.separated}});
  }
  report.summary = {{"repetitions", reps},
                    {"n", n},
                    {"alpha", alpha},
                    {"min_sign_agreement_rate", min_of(rates)},
                    {"mean_sign_agreement_rate", mean_of(rates)},
                    {"min_correlation", min_of(corrs)},
                    {"mean_correlation", mean_of(corrs)}};
  report.flag("c07_sign_agreement_rate_above_0.8", min_of(rates) > 0.8);
  report.flag("c07_correlation_above_0.9", min_of(corrs) > 0.9);
  report.flag("c07_no_inversion", min_of(corrs) >= 0.0);
  return report;
}

ExperimentReport run_attenuation(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const auto n = static_cast<Eigen::Index>(config.integer("n"));
  const auto points = static_cast<Eigen::Index>(config.integer("grid_points"));
  const auto scaling = parse_scaling(config.text("scaling"));
  factor_bias::CancellationParams base;
  base.alpha = config.number("alpha");
  base.beta = config.number("beta");
  base.gamma = config.number("gamma");
  base.sigma_eta = config.number("sigma_eta");
  base.sigma_eps = config.number("sigma_eps");
  const Eigen::VectorXd grid = stochastics::linspace(0.0, config.number("sigma_zeta_max"), points);

  std::vector<double> slots(static_cast<std::size_t>(points) * reps);
  parallel_for(slots.size(), resolve_threads(config.threads), [&](std::size_t task) {
    const std::size_t point = task / reps;
    const std::size_t rep = task % reps;
    factor_bias::CancellationParams p = base;
    p.sigma_zeta = grid[static_cast<Eigen::Index>(point)];
    RngStream stream(config.seed, stream_id(kTagAttenuation, point, rep));
    slots[task] = factor_bias::simulate_attenuation_slope(p, n, stream, scaling);
  });

  ExperimentReport report = new_report(config);
  Table& table = report.add_table("attenuation", {"sigma_zeta", "mc_slope", "mc_sd", "theory_slope", "mc_bias",
                                                  "theory_bias", "abs_error", "theory_derivative", "fd_derivative"});
  Table& per_rep = report.add_table("attenuation_reps", {"rep", "sigma_zeta", "mc_slope", "abs_error"});

  const auto bounds = factor_bias::attenuation_bounds(base, scaling);
  const double h = 1e-5;
  double max_err = 0.0, max_rep_err = 0.0, max_deriv_err = 0.0;
  bool in_bounds = true;
  bool monotone = true;
  double previous = -std::numeric_limits<double>::infinity();
  const double ag = base.alpha * base.gamma;
  for (Eigen::Index i = 0; i < points; ++i) {
    factor_bias::CancellationParams p = base;
    p.sigma_zeta = grid[i];
    const double theory = factor_bias::attenuated_slope(p, scaling);
    double sum = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) sum += slots[static_cast<std::size_t>(i) * reps + rep];
    const double mc = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const double s = slots[static_cast<std::size_t>(i) * reps + rep];
      ss += (s - mc) * (s - mc);
      max_rep_err = std::max(max_rep_err, std::abs(s - theory));
      per_rep.add_row({index_cell(rep), grid[i], s, std::abs(s - theory)});
    }
    const double sd = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : kNaN;

    // The slope depends on sigma_zeta only through its square, so
    // f(-x) = f(x) and the central difference is usable at sigma_zeta = 0.
    factor_bias::CancellationParams up = p, down = p;
    up.sigma_zeta = grid[i] + h;
    down.sigma_zeta = std::abs(grid[i] - h);
    const double fd = (factor_bias::attenuated_slope(up, scaling) - factor_bias::attenuated_slope(down, scaling)) / (2 * h);
    const double deriv = factor_bias::attenuated_slope_derivative(p, scaling);

    max_err = std::max(max_err, std::abs(mc - theory));
    max_deriv_err = std::max(max_deriv_err, std::abs(fd - deriv));
    in_bounds = in_bounds && theory >= bounds.lower && theory <= bounds.upper;
    if (ag > 0.0 && i > 0 && !(theory > previous)) monotone = false;
    previous = theory;
    table.add_row({grid[i], mc, sd, theory, mc - base.beta, theory - base.beta, std::abs(mc - theory), deriv, fd});
  }

  report.summary = {{"repetitions", reps},
                    {"n", n},
                    {"grid_points", points},
                    {"scaling", config.text("scaling")},
                    {"sigma_eta", base.sigma_eta},
                    {"max_abs_error", max_err},
                    {"max_abs_error_single_rep", max_rep_err},
                    {"max_derivative_error", max_deriv_err},
                    {"lower_bound", bounds.lower},
                    {"upper_bound", bounds.upper},
                    {"non_inversion", factor_bias::non_inversion_check(base, scaling)}};
  report.flag("c01_mc_matches_theory_5e-3", max_err <= 5e-3);
  report.flag("c02_monotone_within_bounds", monotone && in_bounds);
  report.flag("c02_derivative_matches_fd_1e-6", max_deriv_err <= 1e-6);
  return report;
}

ExperimentReport run_calibration(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const auto n = static_cast<Eigen::Index>(config.integer("n"));
  const std::vector<double> powers = config.numbers("powers");

  struct Point {
    double relative_sharpe, cosine, spearman;
    Eigen::VectorXd normalized;
  };
  struct RepResult {
    Eigen::VectorXd mu;
    std::vector<Point> points;
  };
  std::vector<RepResult> slots(reps);
  parallel_for(reps, resolve_threads(config.threads), [&](std::size_t rep) {
    RngStream stream(config.seed, stream_id(kTagCalibration, rep));
    const auto cov = geometry::make_spd_cov(stream, n, static_cast<Eigen::Index>(config.integer("n_factors")),
                                            config.number("idio_scale"));
    const auto mu = geometry::generate_mu(stream, n, config.number("mu_scale"));
    const double optimal = geometry::sharpe_of_weights(geometry::tangency_direction(mu, cov), mu, cov).sharpe;
    RepResult r;
    r.mu = mu.values;
    for (double p : powers) {
      const auto t = geometry::match_vm_norm(signals::power_transform(mu, p), mu, cov);
      const double s = geometry::sharpe_of_weights(geometry::tangency_direction(t, cov), mu, cov).sharpe;
      r.points.push_back({s / optimal, geometry::cosine_alignment(mu, t, cov),
                          stochastics::spearman_correlation(mu.values, t.values), t.values});
    }
    slots[rep] = std::move(r);
  });

  ExperimentReport report = new_report(config);
  Table& curve = report.add_table("calibration", {"rep", "p", "relative_sharpe", "cosine", "spearman"});
  Table& scatter = report.add_table("calibration_scatter", {"rep", "p", "asset", "mu", "mu_tilde"});
  bool peak_ok = true, bounded = true, ranked = true;
  double max_rel = -std::numeric_limits<double>::infinity(), min_spearman = 1.0;
  json argmax = json::array();
  const bool has_one = std::find(powers.begin(), powers.end(), 1.0) != powers.end();
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto& pts = slots[rep].points;
    std::size_t best = 0, best_cos = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (pts[k].relative_sharpe > pts[best].relative_sharpe) best = k;
      if (pts[k].cosine > pts[best_cos].cosine) best_cos = k;
      max_rel = std::max(max_rel, pts[k].relative_sharpe);
      min_spearman = std::min(min_spearman, pts[k].spearman);
      bounded = bounded && pts[k].relative_sharpe <= 1.0 + 1e-10;
      ranked = ranked && pts[k].spearman >= 1.0 - 1e-12;
      curve.add_row({index_cell(rep), powers[k], pts[k].relative_sharpe, pts[k].cosine, pts[k].spearman});
      for (Eigen::Index i = 0; i < pts[k].normalized.size(); ++i) {
        scatter.add_row({index_cell(rep), powers[k], static_cast<std::int64_t>(i), slots[rep].mu[i],
                         pts[k].normalized[i]});
      }
    }
    argmax.push_back(powers[best]);
    if (has_one) {
      peak_ok = peak_ok && powers[best] == 1.0 && std::abs(pts[best].relative_sharpe - 1.0) <= 1e-10;
    } else {
      peak_ok = peak_ok && best == best_cos;
    }
  }
  report.summary = {{"repetitions", reps},
                    {"n", n},
                    {"argmax_p", argmax},
                    {"max_relative_sharpe", max_rel},
                    {"min_spearman", min_spearman}};
  report.flag("c05_peak_at_p1", peak_ok);
  report.flag("c05_relative_sharpe_at_most_1", bounded);
  report.flag("c05_ranking_preserved", ranked);
  return report;
}

ExperimentReport run_nonlinear_frontier(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  signals::NonlinearDgpConfig dgp;
  dgp.n_obs = static_cast<Eigen::Index>(config.integer("n_obs"));
  dgp.n_features = static_cast<Eigen::Index>(config.integer("n_assets"));
  dgp.alpha_weights = config.numbers("alpha_weights");
  dgp.noise_scale = config.number("noise_scale");
  dgp.return_scale = config.number("return_scale");
  dgp.return_noise = config.number("return_noise");
  const bool fitted = config.text("signal_path") == "fitted";
  const int n_points = static_cast<int>(config.integer("n_points"));
  const std::size_t per_point = count(config.integer("random_portfolios"));

  struct RepResult {
    Eigen::MatrixXd omega_true, omega_pred;
    signals::SignAgreement agreement;
    frontier::Frontier frontier;
    frontier::ConvexityReport convexity;
    RandomCheck random;
  };
  std::vector<RepResult> slots(reps);
  parallel_for(reps, resolve_threads(config.threads), [&](std::size_t rep) {
    RngStream stream(config.seed, stream_id(kTagNonlinear, rep));
    const auto data = signals::generate_nonlinear_dataset(dgp, stream);
    const auto sig = fitted ? signals::fitted_signals(data.features, data.outcomes)
                            : signals::drawn_beta_signals(data.features, stream);
    RepResult r;
    r.omega_true = signals::prob_to_weight(data.p_true);
    r.omega_pred = signals::prob_to_weight(sig.p_pred);
    r.agreement = signals::sign_agreement(signals::WeightPair(r.omega_true.reshaped(), r.omega_pred.reshaped()));

    const geometry::SignalVector mu_hat(r.omega_pred.colwise().mean().transpose(), "mu_hat");
    const auto moments = stochastics::empirical_moments(data.returns);
    const geometry::SignalVector realized(moments.mean, "mean_return");
    const geometry::SpdCovariance cov(moments.covariance);
    r.frontier = frontier::sweep_frontier(mu_hat, cov, n_points, span_of(config), &realized);
    r.convexity = frontier::convexity_report(r.frontier);
    r.random = random_feasible_check(r.frontier, cov.matrix(), per_point, config.seed, rep);
    slots[rep] = std::move(r);
  });

  ExperimentReport report = new_report(config);
  Table& weights = report.add_table("weights", {"rep", "obs", "asset", "omega_true", "omega_pred"});
  Table& table = report.add_table("frontier", {"rep", "target_return", "realized_return", "volatility", "skipped"});
  bool convex = true, positive = true, unbeaten = true;
  std::size_t skipped = 0, portfolios = 0;
  json per_rep = json::array();
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const RepResult& r = slots[rep];
    for (Eigen::Index i = 0; i < r.omega_true.rows(); ++i) {
      for (Eigen::Index j = 0; j < r.omega_true.cols(); ++j) {
        weights.add_row({index_cell(rep), static_cast<std::int64_t>(i), static_cast<std::int64_t>(j),
                         r.omega_true(i, j), r.omega_pred(i, j)});
      }
    }
    append_frontier(table, {index_cell(rep)}, r.frontier);
    const double corr = r.agreement.correlation.value_or(kNaN);
    convex = convex && r.convexity.convex();
    positive = positive && corr > 0.0;
    unbeaten = unbeaten && r.random.beaten == 0;
    skipped += r.frontier.skipped_targets.size();
    portfolios += r.random.portfolios;
    per_rep.push_back({{"rep", rep},
                       {"sign_agreement_rate", r.agreement.rate},
                       {"correlation", corr},
                       {"convexity", convexity_json(r.convexity)},
                       {"skipped_targets", r.frontier.skipped_targets.size()},
                       {"random_portfolios", r.random.portfolios},
                       {"random_portfolios_beating_solve", r.random.beaten},
                       {"min_random_variance_excess", r.random.portfolios ? r.random.min_excess : kNaN}});
  }
  report.summary = {{"repetitions", reps},
                    {"signal_path", config.text("signal_path")},
                    {"skipped_targets", skipped},
                    {"random_portfolios", portfolios},
                    {"per_rep", per_rep}};
  report.flag("c06_frontier_convex", convex);
  report.flag("c06_beats_random_feasible", unbeaten);
  report.flag("c06_signal_correlation_positive", positive);
  return report;
}

ExperimentReport run_alignment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.repetitions);
  const auto n = static_cast<Eigen::Index>(config.integer("n"));
  const auto theta_points = static_cast<Eigen::Index>(config.integer("theta_points"));
  const int n_points = static_cast<int>(config.integer("n_points"));
  const std::size_t n_surrogates = count(config.integer("random_surrogates"));
  const Eigen::VectorXd grid_v = stochastics::linspace(0.0, std::numbers::pi, theta_points);
  const std::vector<double> grid(grid_v.begin(), grid_v.end());

  struct ThetaRow {
    double theta, cos_theta, rho, sharpe, ratio, identity, tangency_vol;
  };
  struct SurrogateRow {
    double rho, sharpe, identity, rel_error;
  };
  struct RepResult {
    double optimal = 0.0;
    std::vector<ThetaRow> thetas;
    std::vector<SurrogateRow> surrogates;
    std::vector<std::pair<double, frontier::Frontier>> frontiers;
    std::vector<frontier::ConvexityReport> convexity;
  };
  std::vector<RepResult> slots(reps);
  parallel_for(reps, resolve_threads(config.threads), [&](std::size_t rep) {
    RngStream stream(config.seed, stream_id(kTagAlignment, rep));
    const auto cov = geometry::make_spd_cov(stream, n, static_cast<Eigen::Index>(config.integer("n_factors")),
                                            config.number("idio_scale"));
    const auto mu = geometry::generate_mu(stream, n, config.number("mu_scale"));
    const auto family = geometry::build_alignment_family(mu, cov, stream, grid);
    const double mu_norm = geometry::vm_norm(mu.values, cov);
    RepResult r;
    r.optimal = geometry::sharpe_of_weights(geometry::tangency_direction(mu, cov), mu, cov).sharpe;
    for (double theta : grid) {
      const auto s = family.surrogate(theta);
      const auto stats = geometry::sharpe_of_weights(geometry::tangency_direction(s, cov), mu, cov);
      const double rho = geometry::cosine_alignment(mu, s, cov);
      r.thetas.push_back({theta, std::cos(theta), rho, stats.sharpe, stats.sharpe / r.optimal, mu_norm * rho,
                          stats.vol});
    }
    for (std::size_t k = 0; k < n_surrogates; ++k) {
      RngStream s_stream(config.seed, stream_id(kTagRandomSurrogates, rep, k));
      const geometry::SignalVector s(stochastics::standard_normal(s_stream, n), "random_surrogate");
      const double rho = geometry::cosine_alignment(mu, s, cov);
      const double sharpe = geometry::sharpe_of_weights(geometry::tangency_direction(s, cov), mu, cov).sharpe;
      const double identity = mu_norm * rho;
      r.surrogates.push_back({rho, sharpe, identity, std::abs(sharpe - identity) / mu_norm});
    }
    r.frontiers = frontier::frontier_under_misalignment(family, cov, n_points, span_of(config));
    for (const auto& [theta, f] : r.frontiers) r.convexity.push_back(frontier::convexity_report(f));
    slots[rep] = std::move(r);
  });

  ExperimentReport report = new_report(config);
  Table& table = report.add_table("alignment", {"rep", "theta", "cos_theta", "rho", "sharpe", "sharpe_ratio",
                                                "surrogate_identity", "tangency_volatility"});
  Table& surrogates = report.add_table("surrogates", {"rep", "index", "rho", "sharpe", "identity", "relative_error"});
  Table& frontiers = report.add_table(
      "alignment_frontiers", {"rep", "theta", "target_return", "realized_return", "volatility", "skipped"});

  // Signs within this band of zero count as zero on both sides.
  const double sign_tol = 1e-12;
  double max_cos_err = 0.0, max_identity_err = 0.0, max_surrogate_err = 0.0;
  bool boundary = true, convex = true;
  double fit_slope = kNaN, fit_intercept = kNaN, fit_residual = kNaN;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const RepResult& r = slots[rep];
    for (const auto& t : r.thetas) {
      max_cos_err = std::max(max_cos_err, std::abs(t.ratio - t.cos_theta));
      max_identity_err = std::max(max_identity_err, std::abs(t.sharpe - t.identity) / std::abs(r.optimal));
      boundary = boundary && ((t.ratio <= sign_tol) == (t.cos_theta <= sign_tol));
      table.add_row({index_cell(rep), t.theta, t.cos_theta, t.rho, t.sharpe, t.ratio, t.identity, t.tangency_vol});
    }
    for (std::size_t k = 0; k < r.surrogates.size(); ++k) {
      const auto& s = r.surrogates[k];
      max_surrogate_err = std::max(max_surrogate_err, s.rel_error);
      surrogates.add_row({index_cell(rep), index_cell(k), s.rho, s.sharpe, s.identity, s.rel_error});
    }
    for (std::size_t k = 0; k < r.frontiers.size(); ++k) {
      append_frontier(frontiers, {index_cell(rep), r.frontiers[k].first}, r.frontiers[k].second);
      convex = convex && r.convexity[k].convex();
    }
    if (rep == 0 && r.thetas.size() >= 2) {
      Eigen::MatrixXd design(static_cast<Eigen::Index>(r.thetas.size()), 2);
      Eigen::VectorXd y(design.rows());
      for (Eigen::Index i = 0; i < design.rows(); ++i) {
        design(i, 0) = r.thetas[static_cast<std::size_t>(i)].cos_theta;
        design(i, 1) = 1.0;
        y[i] = r.thetas[static_cast<std::size_t>(i)].ratio;
      }
      const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
      fit_slope = coef[0];
      fit_intercept = coef[1];
      fit_residual = (y - design * coef).cwiseAbs().maxCoeff();
    }
  }
  double min_dd = std::numeric_limits<double>::infinity();
  for (const auto& r : slots) {
    for (const auto& c : r.convexity) min_dd = std::min(min_dd, c.min_second_divided_difference);
  }
  report.summary = {{"repetitions", reps},
                    {"n", n},
                    {"theta_points", theta_points},
                    {"optimal_sharpe", slots.front().optimal},
                    {"max_abs_ratio_minus_cos", max_cos_err},
                    {"max_relative_identity_error", max_identity_err},
                    {"max_relative_surrogate_error", max_surrogate_err},
                    {"sign_tolerance", sign_tol},
                    {"cos_fit_slope", fit_slope},
                    {"cos_fit_intercept", fit_intercept},
                    {"cos_fit_max_residual", fit_residual},
                    {"min_second_divided_difference", min_dd}};
  report.flag("c03_cosine_law_1e-8", max_cos_err <= 1e-8);
  report.flag("c03_sign_boundary", boundary);
  report.flag("c04_surrogate_identity_1e-10", max_surrogate_err <= 1e-10 && max_identity_err <= 1e-10);
  report.flag("c06_frontiers_convex", convex);
  return report;
}

ExperimentReport run_real_data_frontier(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path path = config.text("data");
  const auto prices = market_data::load_price_csv(path, config.text("date_column"), config.text("date_format"));
  const auto returns = market_data::to_simple_returns(prices);
  const auto panel = market_data::subset(returns, count(config.integer("n_days")), count(config.integer("n_assets")));

  const auto moments = stochastics::empirical_moments(panel.returns);
  const geometry::SignalVector mu_hat(moments.mean, "mean_return");
  const geometry::SpdCovariance cov(moments.covariance);
  const auto f = frontier::sweep_frontier(mu_hat, cov, static_cast<int>(config.integer("n_points")), span_of(config));
  const auto convexity = frontier::convexity_report(f);

  ExperimentReport report = new_report(config);
  Table& assets = report.add_table("assets", {"ticker", "mean", "volatility"});
  for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    assets.add_row({panel.tickers[j], moments.mean[jj], std::sqrt(moments.covariance(jj, jj))});
  }
  Table& table = report.add_table("frontier", {"target_return", "realized_return", "volatility", "skipped"});
  append_frontier(table, {}, f);

  std::ifstream in(path, std::ios::binary);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  report.summary = {{"data_fnv1a64", hex64(fnv1a64(bytes.str()))},
                    {"tickers", panel.tickers},
                    {"first_date", market_data::format_date(panel.dates.front(), market_data::kDefaultDateFormat)},
                    {"last_date", market_data::format_date(panel.dates.back(), market_data::kDefaultDateFormat)},
                    {"n_days", panel.returns.rows()},
                    {"dropped_return_rows", returns.dropped_rows},
                    {"skipped_targets", f.skipped_targets.size()},
                    {"convexity", convexity_json(convexity)}};
  report.flag("c06_frontier_convex", convexity.convex() && f.skipped_targets.empty());
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::kCancellation: return run_cancellation(config);
    case Experiment::kAttenuation: return run_attenuation(config);
    case Experiment::kCalibration: return run_calibration(config);
    case Experiment::kNonlinearFrontier: return run_nonlinear_frontier(config);
    case Experiment::kAlignment: return run_alignment(config);
    case Experiment::kRealDataFrontier: return run_real_data_frontier(config);
  }
  throw ConfigError("unknown experiment");
}

std::filesystem::path run_directory(const ExperimentConfig& config) { return config.output_dir / config.hash(); }

std::filesystem::path write_run(const ExperimentReport& report, const std::filesystem::path& dir) {
  write_report_files(report, dir);
  for (const auto& kind : plot_kinds(report.experiment)) {
    const auto path = dir / (kind + ".svg");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << render_plot(report, kind);
  }
  return dir;
}

}  // namespace frontier_lab::harness
