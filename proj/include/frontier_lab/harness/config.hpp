#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace frontier_lab::harness {

enum class Experiment {
  kCancellation,
  kAttenuation,
  kCalibration,
  kNonlinearFrontier,
  kAlignment,
  kRealDataFrontier,
};

std::string_view to_string(Experiment experiment);
/// Accepts the CLI names ("nonlinear-frontier", ...). Throws ConfigError.
Experiment experiment_from_string(std::string_view name);
const std::vector<Experiment>& all_experiments();

/// One run of one experiment.
///
/// `params` always holds every parameter of the experiment: from_json and
/// defaults fill missing keys, and unknown keys are rejected. output_dir and
/// threads do not affect results and are excluded from the canonical form.
struct ExperimentConfig {
  Experiment experiment = Experiment::kCancellation;
  std::uint64_t seed = 42;
  int repetitions = 1;
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path output_dir = "runs";
  int threads = 0;  // 0: FRONTIER_LAB_THREADS or hardware concurrency

  static ExperimentConfig defaults(Experiment experiment);
  /// Keys: experiment, seed, repetitions, params, output_dir, threads.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  /// Overrides one parameter after type-checking against the default.
  void set_param(const std::string& key, const nlohmann::json& value);
  /// Throws ConfigError on a bad parameter value.
  void validate() const;

  /// experiment, seed, repetitions and params with sorted keys.
  nlohmann::json canonical() const;
  std::string canonical_dump() const;
  /// FNV-1a 64 of canonical_dump(), 16 lowercase hex digits.
  std::string hash() const;

  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Worker count: `requested` if positive, else hardware concurrency, then
/// capped by FRONTIER_LAB_THREADS when that is a positive integer.
int resolve_threads(int requested);

}  // namespace frontier_lab::harness
