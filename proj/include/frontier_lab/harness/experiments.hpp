#pragma once

#include <filesystem>

#include "frontier_lab/harness/config.hpp"
#include "frontier_lab/harness/report.hpp"

namespace frontier_lab::harness {

/// Stream tags; each (tag, a, b) triple names one independent RNG stream.
inline constexpr std::uint64_t kTagCancellation = 1;
inline constexpr std::uint64_t kTagAttenuation = 2;
inline constexpr std::uint64_t kTagCalibration = 3;
inline constexpr std::uint64_t kTagNonlinear = 4;
inline constexpr std::uint64_t kTagAlignment = 5;
inline constexpr std::uint64_t kTagRandomPortfolios = 7;
inline constexpr std::uint64_t kTagRandomSurrogates = 8;

/// Weight-pair scatter and sign agreement of the X-only logistic fit.
/// Tables: weights (rep, omega_true, omega_pred), agreement (per rep).
ExperimentReport run_cancellation(const ExperimentConfig& config);

/// Monte Carlo OLS slope vs the closed-form attenuation law on a sigma_zeta
/// grid, averaged over repetitions. Tables: attenuation, attenuation_reps.
ExperimentReport run_attenuation(const ExperimentConfig& config);

/// Relative Sharpe of power-transformed signals. Tables: calibration,
/// calibration_scatter.
ExperimentReport run_calibration(const ExperimentConfig& config);

/// Frontier from misspecified logistic signals. Tables: weights, frontier.
ExperimentReport run_nonlinear_frontier(const ExperimentConfig& config);

/// Tangency Sharpe along the alignment family, surrogate Sharpe identity and
/// per-theta frontiers. Tables: alignment, surrogates, alignment_frontiers.
ExperimentReport run_alignment(const ExperimentConfig& config);

/// Frontier from the empirical moments of a price CSV. Tables: assets, frontier.
ExperimentReport run_real_data_frontier(const ExperimentConfig& config);

/// Validates the config and dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes tables, summary.json and every plot kind of the experiment into
/// `dir`. Returns the directory.
std::filesystem::path write_run(const ExperimentReport& report, const std::filesystem::path& dir);

/// <output_dir>/<config hash>
std::filesystem::path run_directory(const ExperimentConfig& config);

}  // namespace frontier_lab::harness
