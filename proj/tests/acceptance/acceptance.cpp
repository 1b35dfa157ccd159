// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only ID  run one (c01a, c01b, c02, ..., c10)
//
// Exit status is 0 iff every selected criterion passed.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "frontier_lab/factor_bias.hpp"
#include "frontier_lab/frontier.hpp"
#include "frontier_lab/geometry.hpp"
#include "frontier_lab/harness/config.hpp"
#include "frontier_lab/harness/experiments.hpp"
#include "frontier_lab/signals.hpp"
#include "frontier_lab/stochastics.hpp"

namespace fs = std::filesystem;
namespace fl = frontier_lab;
namespace h = frontier_lab::harness;
using fl::stochastics::RngStream;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool flag(const h::ExperimentReport& r, const std::string& name) {
  for (const auto& [n, p] : r.pass_flags) {
    if (n == name) return p;
  }
  throw std::runtime_error("report has no flag " + name);
}

std::string fixture_path() { return (fs::path(FRONTIER_LAB_SOURCE_DIR) / "data" / "synthetic_prices.csv").string(); }

// Reference attenuation table: sigma_zeta, Monte Carlo slope, theory slope.
constexpr std::array<std::array<double, 3>, 17> kReferenceTable{{
    {0.000, -0.220295, -0.220000}, {0.050, -0.218724, -0.218690}, {0.100, -0.216333, -0.216330},
    {0.150, -0.213370, -0.213374}, {0.200, -0.209934, -0.209951}, {0.250, -0.206124, -0.206150},
    {0.300, -0.201989, -0.202021}, {0.350, -0.197564, -0.197600}, {0.400, -0.192882, -0.192920},
    {0.450, -0.187965, -0.188005}, {0.500, -0.182833, -0.182874}, {0.550, -0.177504, -0.177544},
    {0.600, -0.172000, -0.172039}, {0.650, -0.166337, -0.166373}, {0.700, -0.160533, -0.160566},
    {0.750, -0.154606, -0.154636}, {0.800, -0.148573, -0.148600},
}};

h::ExperimentConfig attenuation_config() {
  h::ExperimentConfig c = h::ExperimentConfig::defaults(h::Experiment::kAttenuation);
  c.threads = 1;
  return c;
}

Outcome c01a() {
  const auto start = Clock::now();
  const h::ExperimentReport r = h::run_experiment(attenuation_config());
  const double elapsed = seconds_since(start);
  const double err = r.summary["max_abs_error"].get<double>();
  return {flag(r, "c01_mc_matches_theory_5e-3") && elapsed < 30.0,
          fmt::format("max |MC - theory| {:.3g} over 17 grid points (tol 5e-3), {:.1f} s single-threaded (limit 30 s)",
                      err, elapsed)};
}

Outcome c01b() {
  const h::ExperimentReport r = h::run_experiment(attenuation_config());
  const auto& t = r.table("attenuation");
  const auto sz = t.numeric_column("sigma_zeta");
  const auto mc = t.numeric_column("mc_slope");
  const auto theory = t.numeric_column("theory_slope");
  double worst_mc = 0.0, worst_law = 0.0, worst_at = 0.0;
  for (std::size_t i = 0; i < kReferenceTable.size(); ++i) {
    if (std::abs(sz[i] - kReferenceTable[i][0]) > 1e-12) return {false, "sigma_zeta grid does not match the table"};
    const double e = std::abs(mc[i] - kReferenceTable[i][2]);
    if (e > worst_mc) worst_mc = e, worst_at = sz[i];
    worst_law = std::max(worst_law, std::abs(theory[i] - kReferenceTable[i][2]));
  }
  return {worst_mc <= 5e-3,
          fmt::format("max |MC - reference theory column| {:.3g} at sigma_zeta {:.2f} (tol 5e-3); the closed-form "
                      "law itself differs from that column by up to {:.3g}",
                      worst_mc, worst_at, worst_law)};
}

Outcome c02() {
  fl::factor_bias::CancellationParams p;
  const auto ev = fl::factor_bias::ConfounderScaling::kExactVariance;
  const auto bounds = fl::factor_bias::attenuation_bounds(p, ev);
  const Eigen::VectorXd grid = fl::stochastics::linspace(0.0, 0.8, 17);
  bool monotone = true, within = true;
  double prev = -std::numeric_limits<double>::infinity(), worst_fd = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double h_step = 1e-5;
  for (double sz : grid) {
    p.sigma_zeta = sz;
    const double s = fl::factor_bias::attenuated_slope(p, ev);
    monotone = monotone && s > prev;
    within = within && s >= bounds.lower - 4 * eps && s <= bounds.upper + 4 * eps;
    prev = s;
    auto up = p, down = p;
    up.sigma_zeta = sz + h_step;
    down.sigma_zeta = std::abs(sz - h_step);  // the law is even in sigma_zeta
    const double fd = (fl::factor_bias::attenuated_slope(up, ev) - fl::factor_bias::attenuated_slope(down, ev)) /
                      (up.sigma_zeta - (sz - h_step));
    worst_fd = std::max(worst_fd, std::abs(fd - fl::factor_bias::attenuated_slope_derivative(p, ev)));
  }
  return {monotone && within && worst_fd <= 1e-6,
          fmt::format("strictly increasing: {}, within [{:.6f}, {:.6f}]: {}, max |analytic - FD| {:.3g} (tol 1e-6)",
                      monotone, bounds.lower, bounds.upper, within, worst_fd)};
}

h::ExperimentReport alignment_report() {
  h::ExperimentConfig c = h::ExperimentConfig::defaults(h::Experiment::kAlignment);
  c.threads = 1;
  return h::run_experiment(c);
}

Outcome c03() {
  const auto start = Clock::now();
  const h::ExperimentReport r = alignment_report();
  const double elapsed = seconds_since(start);
  return {flag(r, "c03_cosine_law_1e-8") && flag(r, "c03_sign_boundary") && elapsed < 5.0,
          fmt::format("max |ratio - cos| {:.3g} over {} thetas (tol 1e-8), sign boundary {}, {:.2f} s (limit 5 s)",
                      r.summary["max_abs_ratio_minus_cos"].get<double>(), r.summary["theta_points"].get<int>(),
                      flag(r, "c03_sign_boundary"), elapsed)};
}

Outcome c04() {
  const h::ExperimentReport r = alignment_report();
  const auto n = r.table("surrogates").rows.size();
  return {flag(r, "c04_surrogate_identity_1e-10") && n == 100,
          fmt::format("{} random surrogates, max relative error {:.3g} (tol 1e-10)", n,
                      r.summary["max_relative_surrogate_error"].get<double>())};
}

Outcome c05() {
  h::ExperimentConfig c = h::ExperimentConfig::defaults(h::Experiment::kCalibration);
  c.threads = 1;
  const h::ExperimentReport r = h::run_experiment(c);
  const bool ok = flag(r, "c05_peak_at_p1") && flag(r, "c05_relative_sharpe_at_most_1") &&
                  flag(r, "c05_ranking_preserved");
  return {ok, fmt::format("argmax p {}, max relative Sharpe {:.12f}, min Spearman {}",
                          r.summary["argmax_p"].dump(), r.summary["max_relative_sharpe"].get<double>(),
                          r.summary["min_spearman"].get<double>())};
}

// Smallest second divided difference of variance in target return over every
// frontier in a table, grouping rows by the given key columns.
double min_second_difference(const h::Table& t, const std::vector<std::string>& keys, const std::string& target,
                             const std::string& vol, const std::string& skipped, int& n_frontiers) {
  std::map<std::vector<double>, std::vector<std::pair<double, double>>> groups;
  const auto r = t.numeric_column(target);
  const auto v = t.numeric_column(vol);
  const auto s = t.numeric_column(skipped);
  std::vector<std::vector<double>> key_cols;
  for (const auto& k : keys) key_cols.push_back(t.numeric_column(k));
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (s[i] != 0.0) continue;
    std::vector<double> key;
    for (const auto& col : key_cols) key.push_back(col[i]);
    groups[key].emplace_back(r[i], v[i] * v[i]);
  }
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [key, pts] : groups) {
    ++n_frontiers;
    for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
      const auto [r0, v0] = pts[i];
      const auto [r1, v1] = pts[i + 1];
      const auto [r2, v2] = pts[i + 2];
      const double d = ((v2 - v1) / (r2 - r1) - (v1 - v0) / (r1 - r0)) / (r2 - r0);
      worst = std::min(worst, d);
    }
  }
  return worst;
}

Outcome c06() {
  // 2-asset hand solution
  RngStream s(42, fl::stochastics::stream_id(9, 6, 0));
  double worst_hand = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto cov = fl::geometry::make_spd_cov(s, 2, 1);
    const fl::geometry::SignalVector mu(Eigen::Vector2d(0.0, 1.0), "mu");
    const double target = fl::stochastics::uniform(s, 1, -2.0, 3.0)[0];
    const auto p = fl::frontier::min_variance_at_target(mu, cov, target);
    worst_hand = std::max({worst_hand, std::abs(p.weights[0] - (1.0 - target)), std::abs(p.weights[1] - target)});
  }

  bool unbeaten = true;
  double worst_second = std::numeric_limits<double>::infinity();
  int frontiers = 0;
  for (const char* path : {"drawn", "fitted"}) {
    h::ExperimentConfig c = h::ExperimentConfig::defaults(h::Experiment::kNonlinearFrontier);
    c.set_param("signal_path", path);
    const h::ExperimentReport r = h::run_experiment(c);
    unbeaten = unbeaten && flag(r, "c06_beats_random_feasible");
    worst_second = std::min(worst_second, min_second_difference(r.table("frontier"), {"rep"}, "target_return",
                                                                "volatility", "skipped", frontiers));
  }
  const h::ExperimentReport align = alignment_report();
  worst_second = std::min(worst_second, min_second_difference(align.table("alignment_frontiers"), {"rep", "theta"},
                                                              "target_return", "volatility", "skipped", frontiers));

  h::ExperimentConfig real = h::ExperimentConfig::defaults(h::Experiment::kRealDataFrontier);
  real.set_param("data", fixture_path());
  const h::ExperimentReport rd = h::run_experiment(real);
  const bool real_convex = flag(rd, "c06_frontier_convex");
  worst_second = std::min(worst_second, min_second_difference(rd.table("frontier"), {}, "target_return",
                                                              "volatility", "skipped", frontiers));

  return {worst_hand <= 1e-12 && unbeaten && worst_second >= -1e-10 && real_convex,
          fmt::format("2-asset max error {:.3g} (tol 1e-12), unbeaten by 10000 random feasible portfolios per solve "
                      "(drawn and fitted signals): {}, min second divided difference {:.3g} over {} frontiers, "
                      "fixture frontier convex: {}",
                      worst_hand, unbeaten, worst_second, frontiers, real_convex)};
}

Outcome c07() {
  h::ExperimentConfig c = h::ExperimentConfig::defaults(h::Experiment::kCancellation);
  const h::ExperimentReport r = h::run_experiment(c);
  const bool ok = flag(r, "c07_sign_agreement_rate_above_0.8") && flag(r, "c07_correlation_above_0.9") &&
                  flag(r, "c07_no_inversion");
  return {ok, fmt::format("{} seeds: min sign agreement {:.3f} (> 0.8), min correlation {:.3f} (> 0.9)",
                          r.summary["repetitions"].get<int>(), r.summary["min_sign_agreement_rate"].get<double>(),
                          r.summary["min_correlation"].get<double>())};
}

double log_lik(double a, double b, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(a + b * x[i])));
    ll += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return ll;
}

Outcome c08() {
  Eigen::VectorXd x(8), y(8);
  x << -2.0, -1.3, -0.7, -0.2, 0.1, 0.6, 1.1, 1.9;
  y << 0, 0, 1, 0, 1, 0, 1, 1;
  const auto m = fl::signals::fit_logistic(Eigen::MatrixXd(x), y);
  double best = -std::numeric_limits<double>::infinity(), ga = 0.0, gb = 0.0;
  for (double a = -3.0; a <= 3.0; a += 0.01) {
    for (double b = -3.0; b <= 3.0; b += 0.01) {
      const double ll = log_lik(a, b, x, y);
      if (ll > best) best = ll, ga = a, gb = b;
    }
  }
  const double ca = ga, cb = gb;
  for (double a = ca - 0.02; a <= ca + 0.02; a += 0.0005) {
    for (double b = cb - 0.02; b <= cb + 0.02; b += 0.0005) {
      const double ll = log_lik(a, b, x, y);
      if (ll > best) best = ll, ga = a, gb = b;
    }
  }
  const double grid_err = std::max(std::abs(m.intercept - ga), std::abs(m.coefficients[0] - gb));

  RngStream s(42, fl::stochastics::stream_id(9, 8, 0));
  const Eigen::Index n = 100000;
  const Eigen::Vector3d truth(-0.4, 1.2, -0.7);
  const Eigen::MatrixXd feats = fl::stochastics::standard_normal_matrix(s, n, 2);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = fl::signals::logistic(truth[0] + feats.row(i).dot(truth.tail(2)));
  const Eigen::VectorXd outcomes = fl::stochastics::bernoulli_from_prob(s, p);
  const auto fit = fl::signals::fit_logistic(feats, outcomes);
  const Eigen::Vector3d got(fit.intercept, fit.coefficients[0], fit.coefficients[1]);
  const double sim_err = (got - truth).cwiseAbs().maxCoeff();
  return {grid_err <= 2e-3 && sim_err <= 0.05 && m.converged && fit.converged,
          fmt::format("8-point grid max difference {:.3g} (tol 2e-3), 100k draws max coefficient error {:.3g} "
                      "(tol 0.05)",
                      grid_err, sim_err)};
}

Outcome c09() {
  RngStream s(42, fl::stochastics::stream_id(9, 9, 0));
  double worst_mc = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd bg = fl::stochastics::uniform(s, 2, -1.0, 1.0);
    const fl::factor_bias::ConfounderModel m{bg[0], bg[1], fl::stochastics::uniform(s, 1, -0.9, 0.9)[0]};
    const Eigen::VectorXd z = fl::stochastics::standard_normal(s, 200000);
    const Eigen::VectorXd eta = fl::stochastics::standard_normal(s, 200000);
    const Eigen::VectorXd eps = fl::stochastics::standard_normal(s, 200000);
    const Eigen::VectorXd f2 = m.delta * z + std::sqrt(1.0 - m.delta * m.delta) * eta;
    const Eigen::VectorXd xn = m.gamma_n * z + m.beta_n * f2 + eps;
    worst_mc = std::max(worst_mc, std::abs(fl::stochastics::ols_simple(xn, f2).slope -
                                           fl::factor_bias::biased_loading(m)));
  }

  double worst_exposure = 0.0;
  for (int k = 0; k < 20; ++k) {
    fl::factor_bias::TwoAssetStructure st;
    const Eigen::VectorXd v = fl::stochastics::uniform(s, 4, -1.5, 1.5);
    st.loadings << v[0], v[1], v[2], v[3];
    const double delta = fl::stochastics::uniform(s, 1, -0.9, 0.9)[0];
    const double b1 = v[1] + v[0] * delta, b2 = v[3] + v[2] * delta;
    if (std::abs(b2 - b1) < 1e-3) continue;
    const auto r = fl::factor_bias::misspecified_exposure(st, delta);
    worst_exposure = std::max({worst_exposure, std::abs(r.realized_exposure[0] - (v[2] - v[0]) / (b2 - b1)),
                               std::abs(r.realized_exposure[1] - (v[3] - v[1]) / (b2 - b1))});
  }

  fl::factor_bias::TwoAssetStructure clean;
  clean.loadings << 0.0, 0.4, 0.0, 1.3;
  const auto c = fl::factor_bias::misspecified_exposure(clean, 0.6);
  const bool exact = c.realized_exposure[0] == 0.0 && c.realized_exposure[1] == 1.0;
  return {worst_mc <= 0.01 && worst_exposure <= 1e-12 && exact,
          fmt::format("20 triples max |MC - closed form| {:.3g} (tol 0.01), exposure max error {:.3g} (tol 1e-12), "
                      "exact (0, 1) without confounder loading: {}",
                      worst_mc, worst_exposure, exact)};
}

#ifdef FRONTIER_LAB_CLI
int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", FRONTIER_LAB_CLI, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Relative path -> bytes for every regular file below root.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

Outcome c10() {
  const fs::path root = fs::temp_directory_path() / fmt::format("frontier_lab_acceptance_{}", ::getpid());
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"cancellation", "--reps 3"},
      {"attenuation", "--reps 3 --n-samples 20000 --grid-points 5"},
      {"calibration", ""},
      {"nonlinear-frontier", "--n-obs 300 --random-portfolios 500 --n-points 20"},
      {"nonlinear-frontier", "--n-obs 300 --random-portfolios 500 --n-points 20 --signal-path fitted"},
      {"alignment", "--theta-points 9 --random-surrogates 20"},
      {"real-data-frontier", "--data \"" + fixture_path() + "\""},
  };
  std::vector<std::string> problems;
  std::size_t files = 0;
  for (const auto& [cmd, extra] : runs) {
    for (const char* threads : {"1", "4"}) {
      const int code = run_cli(fmt::format("{} {} --threads {} --out \"{}\"", cmd, extra, threads,
                                           (root / (std::string("t") + threads)).string()));
      if (code != 0 && code != 1) problems.push_back(fmt::format("{} --threads {} exited {}", cmd, threads, code));
    }
  }
  // re-run with one thread into a fresh root
  for (const auto& [cmd, extra] : runs) {
    run_cli(fmt::format("{} {} --threads 1 --out \"{}\"", cmd, extra, (root / "again").string()));
  }
  const auto t1 = tree(root / "t1");
  if (t1.empty()) problems.push_back("no output written");
  for (const char* other : {"t4", "again"}) {
    const auto t = tree(root / other);
    if (t != t1) problems.push_back(fmt::format("outputs under {} differ from the single-threaded run", other));
  }
  files = t1.size();

  // render twice and compare with the SVGs written by the run
  std::size_t rendered = 0;
  for (const auto& entry : fs::directory_iterator(root / "t1")) {
    const fs::path dir = entry.path();
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.path().extension() != ".svg") continue;
      const std::string kind = f.path().stem().string();
      const fs::path a = root / "render_a.svg", b = root / "render_b.svg";
      run_cli(fmt::format("render --run \"{}\" --kind {} --output \"{}\"", dir.string(), kind, a.string()));
      run_cli(fmt::format("render --run \"{}\" --kind {} --output \"{}\"", dir.string(), kind, b.string()));
      const std::string original = slurp(f.path());
      if (slurp(a) != original || slurp(b) != original) {
        problems.push_back(fmt::format("render of {} differs from the run output", f.path().string()));
      }
      ++rendered;
    }
  }

  for (const char* name : {"fixture_a.csv", "fixture_b.csv"}) {
    run_cli(fmt::format("make-fixture --out \"{}\" --days 50 --tickers 3", (root / name).string()));
  }
  const std::string fa = slurp(root / "fixture_a.csv");
  if (fa.empty() || fa != slurp(root / "fixture_b.csv")) problems.push_back("make-fixture output differs");

  fs::remove_all(root);
  std::string detail = fmt::format("{} run outputs byte-identical across --threads 1, --threads 4 and a re-run; "
                                   "{} SVGs re-rendered twice identically; make-fixture repeatable",
                                   files, rendered);
  if (!problems.empty()) {
    detail = problems.front();
    if (problems.size() > 1) detail += fmt::format(" (+{} more)", problems.size() - 1);
  }
  return {problems.empty() && files > 0 && rendered > 0, detail};
}
#else
Outcome c10() { return {false, "the frontier-lab CLI was not built"}; }
#endif

struct Criterion {
  const char* id;
  const char* title;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {"c01a", "attenuation Monte Carlo matches the closed-form law", c01a},
    {"c01b", "attenuation Monte Carlo matches the reference table theory column", c01b},
    {"c02", "attenuation monotone, bounded, derivative matches finite differences", c02},
    {"c03", "cosine Sharpe law", c03},
    {"c04", "surrogate Sharpe identity", c04},
    {"c05", "calibration peak at p = 1", c05},
    {"c06", "frontier correctness", c06},
    {"c07", "structural cancellation without inversion", c07},
    {"c08", "logistic fitter oracle equivalence", c08},
    {"c09", "bias formulas", c09},
    {"c10", "end-to-end determinism", c10},
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only ID]\n";
      return 2;
    }
  }
  bool all = true, any = false;
  for (const auto& c : kCriteria) {
    if (!only.empty() && only != c.id) continue;
    any = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << fmt::format("{} {} {}: {}\n", o.passed ? "PASS" : "FAIL", c.id, c.title, o.detail) << std::flush;
    all = all && o.passed;
  }
  if (!any) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all ? 0 : 1;
}
