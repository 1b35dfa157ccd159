#include "frontier_lab/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::harness {

using nlohmann::json;

namespace {

struct ExperimentInfo {
  Experiment experiment;
  std::string_view name;
  int default_repetitions;
};

constexpr ExperimentInfo kInfo[] = {
    {Experiment::kCancellation, "cancellation", 10},
    {Experiment::kAttenuation, "attenuation", 10},
    {Experiment::kCalibration, "calibration", 1},
    {Experiment::kNonlinearFrontier, "nonlinear-frontier", 1},
    {Experiment::kAlignment, "alignment", 1},
    {Experiment::kRealDataFrontier, "real-data-frontier", 1},
};

const ExperimentInfo& info(Experiment e) {
  for (const auto& i : kInfo) {
    if (i.experiment == e) return i;
  }
  throw ConfigError("unknown experiment");
}

json default_params(Experiment e) {
  switch (e) {
    case Experiment::kCancellation:
      return {{"n", 1000}, {"alpha", 0.6}, {"b_x", 1.0}, {"b_z", 0.3}};
    case Experiment::kAttenuation:
      // sigma_eta null means sqrt(1 - alpha^2), which gives Var(Z') = 1 at sigma_zeta = 0.
      return {{"n", 200000},         {"alpha", 0.6},         {"beta", 0.2},
              {"gamma", 0.7},        {"sigma_eta", nullptr}, {"sigma_eps", 1.0},
              {"sigma_zeta_max", 0.8}, {"grid_points", 17},  {"scaling", "exact-variance"}};
    case Experiment::kCalibration:
      return {{"n", 120},
              {"n_factors", 3},
              {"idio_scale", 0.2},
              {"mu_scale", 0.25},
              {"powers", json::array({0.6, 0.8, 1.0, 1.2, 1.4})}};
    case Experiment::kNonlinearFrontier:
      return {{"n_obs", 1000},
              {"n_assets", 5},
              {"alpha_weights", json::array({0.7, 0.3})},
              {"noise_scale", 1.0},
              {"return_scale", 2.0},
              {"return_noise", 0.05},
              {"signal_path", "drawn"},
              {"n_points", 50},
              {"span_lo", 1.5},
              {"span_hi", 1.5},
              {"random_portfolios", 10000}};
    case Experiment::kAlignment:
      return {{"n", 120},          {"n_factors", 3},   {"idio_scale", 0.2}, {"mu_scale", 0.25},
              {"theta_points", 25}, {"n_points", 50},  {"span_lo", 1.5},    {"span_hi", 1.5},
              {"random_surrogates", 100}};
    case Experiment::kRealDataFrontier:
      return {{"data", "data/synthetic_prices.csv"},
              {"date_column", "Date"},
              {"date_format", "%Y-%m-%d"},
              {"n_days", 1000},
              {"n_assets", 5},
              {"n_points", 50},
              {"span_lo", 1.5},
              {"span_hi", 1.5}};
  }
  throw ConfigError("unknown experiment");
}

bool is_number_array(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
}

// Coerces `value` to the type of `reference` (the default).
json coerce(const std::string& key, const json& reference, const json& value) {
  auto fail = [&](std::string_view expected) -> json {
    throw ConfigError(fmt::format("parameter '{}': expected {}, got {}", key, expected, value.dump()));
  };
  if (reference.is_null()) {
    if (value.is_null()) return value;
    if (value.is_number()) return value.get<double>();
    return fail("a number or null");
  }
  if (reference.is_number_integer()) {
    if (value.is_number_integer()) return value;
    if (value.is_number_float()) {
      const double d = value.get<double>();
      if (std::nearbyint(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    return fail("an integer");
  }
  if (reference.is_number()) {
    if (value.is_number()) return value.get<double>();
    return fail("a number");
  }
  if (reference.is_string()) {
    if (value.is_string()) return value;
    return fail("a string");
  }
  if (reference.is_array()) {
    if (is_number_array(value)) {
      json out = json::array();
      for (const auto& x : value) out.push_back(x.get<double>());
      return out;
    }
    return fail("an array of numbers");
  }
  return fail("a supported type");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string_view to_string(Experiment experiment) { return info(experiment).name; }

Experiment experiment_from_string(std::string_view name) {
  for (const auto& i : kInfo) {
    if (i.name == name) return i.experiment;
  }
  throw ConfigError(fmt::format("unknown experiment '{}'", name));
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& i : kInfo) v.push_back(i.experiment);
    return v;
  }();
  return all;
}

ExperimentConfig ExperimentConfig::defaults(Experiment experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.repetitions = info(experiment).default_repetitions;
  c.params = default_params(experiment);
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    static const std::vector<std::string> known{"experiment", "seed",       "repetitions",
                                                "params",     "output_dir", "threads"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("config: unknown key '{}'", key));
    }
  }
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    throw ConfigError("config: 'experiment' must be a string");
  }
  ExperimentConfig c = defaults(experiment_from_string(doc["experiment"].get<std::string>()));
  if (doc.contains("seed")) {
    require(doc["seed"].is_number_unsigned() || (doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0),
            "config: 'seed' must be a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("repetitions")) {
    require(doc["repetitions"].is_number_integer(), "config: 'repetitions' must be an integer");
    c.repetitions = doc["repetitions"].get<int>();
  }
  if (doc.contains("threads")) {
    require(doc["threads"].is_number_integer(), "config: 'threads' must be an integer");
    c.threads = doc["threads"].get<int>();
  }
  if (doc.contains("output_dir")) {
    require(doc["output_dir"].is_string(), "config: 'output_dir' must be a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("params")) {
    require(doc["params"].is_object(), "config: 'params' must be an object");
    for (const auto& [key, value] : doc["params"].items()) c.set_param(key, value);
  }
  return c;
}

void ExperimentConfig::set_param(const std::string& key, const json& value) {
  const json reference = default_params(experiment);
  if (!reference.contains(key)) {
    throw ConfigError(fmt::format("parameter '{}' is not used by experiment '{}'", key, to_string(experiment)));
  }
  params[key] = coerce(key, reference[key], value);
}

void ExperimentConfig::validate() const {
  require(repetitions >= 1, fmt::format("repetitions must be >= 1 (got {}); the report would be empty", repetitions));
  require(threads >= 0, "threads must be >= 0");
  switch (experiment) {
    case Experiment::kCancellation:
      require(integer("n") >= 2, "n must be >= 2");
      require(std::abs(number("alpha")) < 1.0, "alpha must satisfy |alpha| < 1");
      break;
    case Experiment::kAttenuation: {
      require(integer("n") >= 3, "n must be >= 3");
      require(integer("grid_points") >= 1, "grid_points must be >= 1");
      require(number("sigma_zeta_max") >= 0.0, "sigma_zeta_max must be >= 0");
      require(number("sigma_eps") >= 0.0, "sigma_eps must be >= 0");
      const std::string s = text("scaling");
      require(s == "exact-variance" || s == "unit-plus-noise" || s == "unscaled",
              "scaling must be exact-variance, unit-plus-noise or unscaled");
      if (params["sigma_eta"].is_null()) {
        require(std::abs(number("alpha")) <= 1.0, "sigma_eta defaults to sqrt(1 - alpha^2); need |alpha| <= 1");
      } else {
        require(number("sigma_eta") >= 0.0, "sigma_eta must be >= 0");
      }
      break;
    }
    case Experiment::kCalibration:
      require(integer("n") >= 2, "n must be >= 2");
      require(integer("n_factors") >= 1, "n_factors must be >= 1");
      require(!numbers("powers").empty(), "powers must be non-empty");
      for (double p : numbers("powers")) require(p > 0.0, "powers must be positive");
      break;
    case Experiment::kNonlinearFrontier: {
      require(integer("n_obs") >= 10, "n_obs must be >= 10");
      require(integer("n_assets") >= 2, "n_assets must be >= 2");
      require(integer("n_points") >= 3, "n_points must be >= 3");
      require(integer("random_portfolios") >= 0, "random_portfolios must be >= 0");
      const std::string path = text("signal_path");
      require(path == "drawn" || path == "fitted", "signal_path must be drawn or fitted");
      break;
    }
    case Experiment::kAlignment:
      require(integer("n") >= 2, "n must be >= 2");
      require(integer("n_factors") >= 1, "n_factors must be >= 1");
      require(integer("theta_points") >= 1, "theta_points must be >= 1");
      require(integer("n_points") >= 3, "n_points must be >= 3");
      require(integer("random_surrogates") >= 0, "random_surrogates must be >= 0");
      break;
    case Experiment::kRealDataFrontier:
      require(!text("data").empty(), "data path is required");
      require(integer("n_days") >= 2, "n_days must be >= 2");
      require(integer("n_assets") >= 2, "n_assets must be >= 2");
      require(integer("n_points") >= 3, "n_points must be >= 3");
      break;
  }
}

json ExperimentConfig::canonical() const {
  return {{"experiment", std::string(to_string(experiment))},
          {"seed", seed},
          {"repetitions", repetitions},
          {"params", params}};
}

std::string ExperimentConfig::canonical_dump() const { return canonical().dump(); }

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_dump())); }

double ExperimentConfig::number(const std::string& key) const {
  const json& v = params.at(key);
  if (v.is_null() && key == "sigma_eta") {
    const double a = params.at("alpha").get<double>();
    return std::sqrt(std::max(0.0, 1.0 - a * a));
  }
  return v.get<double>();
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return params.at(key).get<std::int64_t>(); }

std::string ExperimentConfig::text(const std::string& key) const { return params.at(key).get<std::string>(); }

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  return params.at(key).get<std::vector<double>>();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("FRONTIER_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return std::max(1, n);
}

}  // namespace frontier_lab::harness
