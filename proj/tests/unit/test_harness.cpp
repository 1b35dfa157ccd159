#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/harness/config.hpp"
#include "frontier_lab/harness/experiments.hpp"
#include "frontier_lab/harness/report.hpp"
#include "frontier_lab/harness/svg_chart.hpp"

using namespace frontier_lab;
using namespace frontier_lab::harness;
using nlohmann::json;

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("experiment names round trip") {
  for (const Experiment e : all_experiments()) CHECK(experiment_from_string(to_string(e)) == e);
  CHECK_THROWS_AS(experiment_from_string("nope"), ConfigError);
}

TEST_CASE("config hash ignores output_dir and threads") {
  ExperimentConfig a = ExperimentConfig::defaults(Experiment::kAttenuation);
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  b.threads = 7;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.seed = 43;
  CHECK(a.hash() != b.hash());
  ExperimentConfig c = a;
  c.set_param("grid_points", 9);
  CHECK(a.hash() != c.hash());
  CHECK(c.integer("grid_points") == 9);
  CHECK(a.number("sigma_eta") == doctest::Approx(0.8));
}

TEST_CASE("from_json fills defaults and rejects unknown keys") {
  const json doc = {{"experiment", "calibration"}, {"seed", 5}, {"params", {{"n", 60}}}};
  const ExperimentConfig c = ExperimentConfig::from_json(doc);
  CHECK(c.seed == 5);
  CHECK(c.integer("n") == 60);
  CHECK(c.numbers("powers").size() == 5);
  CHECK(c.canonical() == ExperimentConfig::from_json(c.canonical()).canonical());
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "calibration"}, {"sed", 5}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "calibration"}, {"params", {{"m", 1}}}}), ConfigError);
  ExperimentConfig d = c;
  CHECK_THROWS_AS(d.set_param("n", "many"), ConfigError);
}

TEST_CASE("zero repetitions is a config error") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::kCancellation);
  c.repetitions = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("resolve_threads") {
  CHECK(resolve_threads(3) >= 1);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("reports do not depend on the thread count") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::kAttenuation);
  c.repetitions = 3;
  c.set_param("n", 2000);
  c.set_param("grid_points", 5);
  c.threads = 1;
  const std::string one = summary_to_json(run_experiment(c));
  c.threads = 4;
  CHECK(summary_to_json(run_experiment(c)) == one);
}

TEST_CASE("CSV header and report round trip") {
  ExperimentReport r;
  r.experiment = "demo";
  r.config_hash = "0123456789abcdef";
  r.config = {{"experiment", "demo"}};
  Table& t = r.add_table("values", {"i", "x", "label"});
  t.add_row({std::int64_t{1}, 0.25, std::string("a")});
  t.add_row({std::int64_t{2}, -1.5e-7, std::string("b")});
  r.flag("check", true);
  r.summary["answer"] = 42;

  const std::string csv = table_to_csv(r, r.table("values"));
  CHECK(csv.rfind("# frontier-lab experiment=demo config_hash=0123456789abcdef\ni,x,label\n", 0) == 0);
  CHECK_THROWS(t.add_row({1.0}));

  const auto dir = std::filesystem::temp_directory_path() / "frontier_lab_report_roundtrip";
  std::filesystem::remove_all(dir);
  write_report_files(r, dir);
  CHECK(std::filesystem::exists(dir / "values.csv"));
  const ExperimentReport back = load_report(dir);
  CHECK(back.experiment == "demo");
  CHECK(back.config_hash == r.config_hash);
  CHECK(back.table("values").numeric_column("x") == std::vector<double>{0.25, -1.5e-7});
  CHECK(std::get<std::string>(back.table("values").rows[1][2]) == "b");
  CHECK(back.all_passed());
  CHECK(summary_to_json(back) == summary_to_json(r));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_report(dir), DataError);
}

TEST_CASE("SVG rendering") {
  ChartSpec spec;
  spec.title = "t";
  spec.x_label = "x";
  spec.y_label = "y";
  spec.comment = "hash=abc";
  spec.series.push_back({"s", {{0.0, 1.0}, {1.0, 2.0}, {2.0, std::numeric_limits<double>::quiet_NaN()}}, SeriesStyle::kLine});
  const std::string a = render_svg(spec);
  CHECK(a == render_svg(spec));
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("<!-- hash=abc -->") != std::string::npos);
  CHECK(a.find("nan") == std::string::npos);

  ChartSpec single = spec;
  single.series = {{"one", {{3.0, 3.0}}, SeriesStyle::kMarkers}};
  CHECK(render_svg(single).find("<circle") != std::string::npos);

  ChartSpec empty = spec;
  empty.series = {{"none", {}, SeriesStyle::kMarkers}};
  CHECK_THROWS_AS(render_svg(empty), DataError);
}

TEST_CASE("every plot kind renders from a small run") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::kCalibration);
  c.threads = 2;
  const ExperimentReport r = run_experiment(c);
  for (const auto& kind : plot_kinds(r.experiment)) {
    const std::string svg = render_plot(r, kind);
    CHECK(svg.find(r.config_hash) != std::string::npos);
  }
  CHECK_THROWS_AS(render_plot(r, "not-a-kind"), DataError);
}
