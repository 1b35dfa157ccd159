#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/factor_bias.hpp"
#include "frontier_lab/frontier.hpp"
#include "frontier_lab/geometry.hpp"
#include "frontier_lab/harness/config.hpp"
#include "frontier_lab/harness/experiments.hpp"
#include "frontier_lab/harness/report.hpp"
#include "frontier_lab/signals.hpp"
#include "frontier_lab/stochastics.hpp"

namespace py = pybind11;
namespace fl = frontier_lab;
using namespace py::literals;

namespace {

// Eigen values handed to py::dict must be rvalues; lvalues are cast by reference.
fl::geometry::SignalVector signal(const Eigen::VectorXd& v, const char* label) { return {v, label}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "frontier-lab core bindings";

  auto error = py::register_exception<fl::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<fl::DomainError>(m, "DomainError", error.ptr());
  py::register_exception<fl::SingularityError>(m, "SingularityError", error.ptr());
  py::register_exception<fl::InsufficientDataError>(m, "InsufficientDataError", error.ptr());
  py::register_exception<fl::ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<fl::DegenerateError>(m, "DegenerateError", error.ptr());
  py::register_exception<fl::DataError>(m, "DataError", error.ptr());
  py::register_exception<fl::ConfigError>(m, "ConfigError", error.ptr());

  py::class_<fl::stochastics::RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), "seed"_a, "stream"_a = 0)
      .def("next_u64", &fl::stochastics::RngStream::next_u64)
      .def("next_unit", &fl::stochastics::RngStream::next_unit)
      .def("standard_normal",
           [](fl::stochastics::RngStream& s, Eigen::Index n) { return fl::stochastics::standard_normal(s, n); },
           "n"_a);
  m.def("stream_id", &fl::stochastics::stream_id, "tag"_a, "a"_a = 0, "b"_a = 0);

  py::enum_<fl::factor_bias::ConfounderScaling>(m, "ConfounderScaling")
      .value("UNSCALED", fl::factor_bias::ConfounderScaling::kUnscaled)
      .value("UNIT_PLUS_NOISE", fl::factor_bias::ConfounderScaling::kUnitPlusNoise)
      .value("EXACT_VARIANCE", fl::factor_bias::ConfounderScaling::kExactVariance);

  py::class_<fl::factor_bias::CancellationParams>(m, "CancellationParams")
      .def(py::init<>())
      .def_readwrite("alpha", &fl::factor_bias::CancellationParams::alpha)
      .def_readwrite("beta", &fl::factor_bias::CancellationParams::beta)
      .def_readwrite("gamma", &fl::factor_bias::CancellationParams::gamma)
      .def_readwrite("sigma_eta", &fl::factor_bias::CancellationParams::sigma_eta)
      .def_readwrite("sigma_zeta", &fl::factor_bias::CancellationParams::sigma_zeta)
      .def_readwrite("sigma_eps", &fl::factor_bias::CancellationParams::sigma_eps);

  const auto ev = fl::factor_bias::ConfounderScaling::kExactVariance;
  m.def("attenuated_slope", &fl::factor_bias::attenuated_slope, "params"_a, "scaling"_a = ev);
  m.def("attenuated_slope_derivative", &fl::factor_bias::attenuated_slope_derivative, "params"_a, "scaling"_a = ev);
  m.def(
      "biased_loading",
      [](double beta_n, double gamma_n, double delta) { return fl::factor_bias::biased_loading({beta_n, gamma_n, delta}); },
      "beta_n"_a, "gamma_n"_a, "delta"_a);
  m.def(
      "misspecified_exposure",
      [](const Eigen::Matrix2d& loadings, double delta) {
        fl::factor_bias::TwoAssetStructure st;
        st.loadings = loadings;
        const auto r = fl::factor_bias::misspecified_exposure(st, delta);
        return py::dict("weights"_a = Eigen::VectorXd(r.weights),
                        "realized_exposure"_a = Eigen::VectorXd(r.realized_exposure));
      },
      "loadings"_a, "delta"_a, "Rows are assets, columns (gamma, beta).");

  m.def(
      "cosine_alignment",
      [](const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_tilde, const Eigen::MatrixXd& cov) {
        return fl::geometry::cosine_alignment(signal(mu, "mu"), signal(mu_tilde, "mu_tilde"),
                                              fl::geometry::SpdCovariance(cov));
      },
      "mu"_a, "mu_tilde"_a, "cov"_a);
  m.def(
      "tangency_sharpe",
      [](const Eigen::VectorXd& signal_values, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
        const fl::geometry::SpdCovariance v(cov);
        const auto w = fl::geometry::tangency_direction(signal(signal_values, "signal"), v);
        return fl::geometry::sharpe_of_weights(w, signal(mu, "mu"), v).sharpe;
      },
      "signal"_a, "mu"_a, "cov"_a, "Sharpe against mu of the tangency portfolio built from signal.");

  m.def(
      "min_variance_at_target",
      [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double target) {
        return fl::frontier::min_variance_at_target(signal(mu, "mu"), fl::geometry::SpdCovariance(cov), target)
            .weights;
      },
      "mu"_a, "cov"_a, "target"_a);
  m.def(
      "sweep_frontier",
      [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, int n_points, double lo_mult, double hi_mult) {
        const auto f = fl::frontier::sweep_frontier(signal(mu, "mu"), fl::geometry::SpdCovariance(cov), n_points,
                                                    {lo_mult, hi_mult});
        const auto n = static_cast<Eigen::Index>(f.points.size());
        Eigen::VectorXd target(n), realized(n), vol(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& p = f.points[static_cast<std::size_t>(i)];
          target[i] = p.target_return;
          realized[i] = p.realized_return;
          vol[i] = p.volatility;
        }
        return py::dict("target_return"_a = std::move(target), "realized_return"_a = std::move(realized),
                        "volatility"_a = std::move(vol),
                        "skipped_targets"_a = f.skipped_targets);
      },
      "mu"_a, "cov"_a, "n_points"_a = 50, "lo_mult"_a = 1.5, "hi_mult"_a = 1.5);

  m.def(
      "fit_logistic",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
        const auto r = fl::signals::fit_logistic(x, y);
        return py::dict("intercept"_a = r.intercept, "coefficients"_a = Eigen::VectorXd(r.coefficients), "converged"_a = r.converged,
                        "separated"_a = r.separated, "n_iterations"_a = r.n_iterations,
                        "log_likelihood"_a = r.log_likelihood);
      },
      "x"_a, "y"_a);

  m.def(
      "default_config",
      [](const std::string& experiment) {
        return fl::harness::ExperimentConfig::defaults(fl::harness::experiment_from_string(experiment))
            .canonical()
            .dump();
      },
      "experiment"_a, "Canonical JSON of the experiment's default config.");
  m.def(
      "run_experiment",
      [](const std::string& config_json, int threads) {
        auto config = fl::harness::ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        config.threads = threads;
        fl::harness::ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = fl::harness::run_experiment(config);
        }
        return fl::harness::summary_to_json(report);
      },
      "config_json"_a, "threads"_a = 0, "Runs one experiment and returns its summary JSON.");
}
