// frontier-lab: run an experiment, write its report directory, or re-render plots.
//
// Exit codes: 0 every check passed, 1 a check failed, 2 usage or data error.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/harness/config.hpp"
#include "frontier_lab/harness/experiments.hpp"
#include "frontier_lab/harness/svg_chart.hpp"
#include "frontier_lab/market_data.hpp"
#include "frontier_lab/stochastics.hpp"

namespace fl = frontier_lab;
namespace h = frontier_lab::harness;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string out;
  std::vector<std::string> sets;
  std::map<std::string, std::string> params;  // param key -> raw flag text
  bool print_config = false;
};

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key == "n" ? "n-samples" : key;
}

json parse_scalar(const std::string& key, const std::string& text, const json& reference) {
  auto as_double = [&](const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw fl::ConfigError(fmt::format("--{}: '{}' is not a number", flag_name(key), s));
    }
    return v;
  };
  if (reference.is_array()) {
    json out = json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t comma = text.find(',', start);
      const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      out.push_back(as_double(item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }
  if (reference.is_string()) return text;
  if (reference.is_null() && (text == "auto" || text == "null")) return nullptr;
  if (reference.is_number_integer()) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw fl::ConfigError(fmt::format("--{}: '{}' is not an integer", flag_name(key), text));
    }
    return v;
  }
  return as_double(text);
}

h::ExperimentConfig build_config(h::Experiment experiment, const RunOptions& opt) {
  h::ExperimentConfig config = h::ExperimentConfig::defaults(experiment);
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) throw fl::ConfigError("cannot open config '" + opt.config_path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw fl::ConfigError(opt.config_path + ": " + e.what());
    }
    if (!doc.is_object()) throw fl::ConfigError(opt.config_path + ": top level must be a JSON object");
    if (!doc.contains("experiment")) doc["experiment"] = std::string(h::to_string(experiment));
    if (doc["experiment"] != std::string(h::to_string(experiment))) {
      throw fl::ConfigError(fmt::format("{}: config is for '{}', not '{}'", opt.config_path,
                                        doc["experiment"].dump(), h::to_string(experiment)));
    }
    config = h::ExperimentConfig::from_json(doc);
  }
  if (opt.seed) config.seed = *opt.seed;
  if (opt.reps) config.repetitions = *opt.reps;
  if (opt.threads) config.threads = *opt.threads;
  if (!opt.out.empty()) config.output_dir = opt.out;
  const json defaults = h::ExperimentConfig::defaults(experiment).params;
  for (const auto& [key, text] : opt.params) config.set_param(key, parse_scalar(key, text, defaults[key]));
  for (const auto& assignment : opt.sets) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw fl::ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    if (!defaults.contains(key)) {
      throw fl::ConfigError(fmt::format("parameter '{}' is not used by '{}'", key, h::to_string(experiment)));
    }
    config.set_param(key, parse_scalar(key, assignment.substr(eq + 1), defaults[key]));
  }
  config.validate();
  return config;
}

int run(h::Experiment experiment, const RunOptions& opt) {
  const h::ExperimentConfig config = build_config(experiment, opt);
  if (opt.print_config) {
    std::cout << config.canonical().dump(2) << "\n" << "config_hash " << config.hash() << "\n";
    return kExitPass;
  }
  const h::ExperimentReport report = h::run_experiment(config);
  const auto dir = h::write_run(report, h::run_directory(config));
  std::cout << fmt::format("{} config_hash={} output={}\n", report.experiment, report.config_hash, dir.string());
  for (const auto& [name, passed] : report.pass_flags) std::cout << (passed ? "PASS " : "FAIL ") << name << "\n";
  return report.all_passed() ? kExitPass : kExitCheckFailed;
}

void add_run_subcommand(CLI::App& app, h::Experiment experiment, const std::string& description, RunOptions& opt,
                        std::optional<h::Experiment>& selected) {
  CLI::App* sub = app.add_subcommand(std::string(h::to_string(experiment)), description);
  sub->add_option("--config", opt.config_path, "JSON config file; flags override its fields");
  sub->add_option("--seed", opt.seed, "RNG seed");
  sub->add_option("--reps", opt.reps, "Repetitions");
  sub->add_option("--threads", opt.threads, "Worker threads (0: automatic)");
  sub->add_option("--out", opt.out, "Output root; the run goes to <out>/<config hash>");
  sub->add_option("--set", opt.sets, "Parameter override key=value (repeatable)");
  sub->add_flag("--print-config", opt.print_config, "Print the canonical config and hash without running");
  const json defaults = h::ExperimentConfig::defaults(experiment).params;
  for (const auto& [key, value] : defaults.items()) {
    const std::string k = key;
    sub->add_option_function<std::string>(
        "--" + flag_name(k), [&opt, k](const std::string& v) { opt.params[k] = v; },
        fmt::format("Parameter '{}' (default {})", k, value.is_null() ? "auto" : value.dump()));
  }
  sub->callback([&selected, experiment] { selected = experiment; });
}

int render(const std::string& run_dir, const std::string& kind, const std::string& output) {
  const h::ExperimentReport report = h::load_report(run_dir);
  const std::vector<std::string> kinds = kind.empty() ? h::plot_kinds(report.experiment) : std::vector{kind};
  if (!output.empty() && kinds.size() != 1) throw fl::ConfigError("--output needs --kind");
  for (const auto& k : kinds) {
    const std::filesystem::path path =
        output.empty() ? std::filesystem::path(run_dir) / (k + ".svg") : std::filesystem::path(output);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fl::DataError("cannot write '" + path.string() + "'");
    out << h::render_plot(report, k);
    std::cout << path.string() << "\n";
  }
  return kExitPass;
}

int make_fixture(const std::string& path, std::uint64_t seed, std::size_t tickers, std::size_t days) {
  fl::stochastics::RngStream stream(seed);
  const auto panel = fl::market_data::synthetic_price_panel(stream, tickers, days);
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  fl::market_data::write_price_csv(p, panel);
  std::cout << p.string() << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frontier-lab: portfolio experiments under structural misspecification"};
  app.require_subcommand(1);

  RunOptions opt;
  std::optional<h::Experiment> selected;
  add_run_subcommand(app, h::Experiment::kCancellation, "Weight pairs under structural cancellation", opt, selected);
  add_run_subcommand(app, h::Experiment::kAttenuation, "Monte Carlo attenuation of omitted-variable bias", opt,
                     selected);
  add_run_subcommand(app, h::Experiment::kCalibration, "Relative Sharpe of power-transformed signals", opt, selected);
  add_run_subcommand(app, h::Experiment::kNonlinearFrontier, "Frontier from misspecified logistic signals", opt,
                     selected);
  add_run_subcommand(app, h::Experiment::kAlignment, "Tangency Sharpe along the alignment family", opt, selected);
  add_run_subcommand(app, h::Experiment::kRealDataFrontier, "Frontier from a price CSV", opt, selected);

  std::string run_dir, kind, output;
  CLI::App* render_cmd = app.add_subcommand("render", "Re-render SVG plots from a run directory");
  render_cmd->add_option("--run", run_dir, "Run directory containing summary.json")->required();
  render_cmd->add_option("--kind", kind, "Plot kind (default: every kind of the experiment)");
  render_cmd->add_option("--output", output, "Output file (requires --kind)");

  std::string fixture_path = "data/synthetic_prices.csv";
  std::uint64_t fixture_seed = 7;
  std::size_t fixture_tickers = 6, fixture_days = 1200;
  CLI::App* fixture_cmd = app.add_subcommand("make-fixture", "Write the synthetic price panel CSV");
  fixture_cmd->add_option("--out", fixture_path, "Output CSV path")->capture_default_str();
  fixture_cmd->add_option("--seed", fixture_seed, "RNG seed")->capture_default_str();
  fixture_cmd->add_option("--tickers", fixture_tickers, "Number of tickers")->capture_default_str();
  fixture_cmd->add_option("--days", fixture_days, "Number of business days")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (selected) return run(*selected, opt);
    if (render_cmd->parsed()) return render(run_dir, kind, output);
    if (fixture_cmd->parsed()) return make_fixture(fixture_path, fixture_seed, fixture_tickers, fixture_days);
  } catch (const fl::Error& e) {
    std::cerr << "frontier-lab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "frontier-lab: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
