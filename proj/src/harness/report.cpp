#include "frontier_lab/harness/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "frontier_lab/csv.hpp"
#include "frontier_lab/errors.hpp"

namespace frontier_lab::harness {

using nlohmann::json;

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return csv::format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

Cell parse_cell(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (!text.empty() && ec == std::errc() && ptr == end) return value;
  return text;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ShapeError(fmt::format("table '{}': row has {} cells, expected {}", name, row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw DataError(fmt::format("table '{}' has no column '{}'", name, column));
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::numeric_column(const std::string& column) const {
  const std::size_t c = column_index(column);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (const auto* d = std::get_if<double>(&row[c])) {
      out.push_back(*d);
    } else if (const auto* i = std::get_if<std::int64_t>(&row[c])) {
      out.push_back(static_cast<double>(*i));
    } else {
      throw DataError(fmt::format("table '{}' column '{}' is not numeric", name, column));
    }
  }
  return out;
}

bool ExperimentReport::all_passed() const {
  return std::all_of(pass_flags.begin(), pass_flags.end(), [](const auto& f) { return f.second; });
}

const Table& ExperimentReport::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw DataError(fmt::format("report '{}' has no table '{}'", experiment, name));
}

bool ExperimentReport::has_table(const std::string& name) const {
  return std::any_of(tables.begin(), tables.end(), [&](const Table& t) { return t.name == name; });
}

Table& ExperimentReport::add_table(std::string name, std::vector<std::string> columns) {
  tables.push_back(Table{std::move(name), std::move(columns), {}});
  return tables.back();
}

void ExperimentReport::flag(std::string name, bool passed) { pass_flags.emplace_back(std::move(name), passed); }

std::string report_header(const ExperimentReport& report) {
  return fmt::format("# frontier-lab experiment={} config_hash={}", report.experiment, report.config_hash);
}

std::string table_to_csv(const ExperimentReport& report, const Table& table) {
  std::string out = report_header(report) + "\n";
  out += csv::format_row(table.columns);
  csv::Row fields;
  for (const auto& row : table.rows) {
    fields.clear();
    for (const auto& cell : row) fields.push_back(cell_text(cell));
    out += csv::format_row(fields);
  }
  return out;
}

std::string summary_to_json(const ExperimentReport& report) {
  json tables = json::array();
  for (const auto& t : report.tables) {
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  }
  json flags = json::array();
  for (const auto& [name, passed] : report.pass_flags) flags.push_back({{"name", name}, {"passed", passed}});
  const json doc = {{"experiment", report.experiment}, {"config_hash", report.config_hash},
                    {"config", report.config},         {"tables", tables},
                    {"summary", report.summary},       {"pass_flags", flags},
                    {"all_passed", report.all_passed()}};
  return doc.dump(2) + "\n";
}

void write_report_files(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  for (const auto& t : report.tables) write_text(dir / (t.name + ".csv"), table_to_csv(report, t));
  write_text(dir / "summary.json", summary_to_json(report));
}

ExperimentReport load_report(const std::filesystem::path& dir) {
  const auto summary_path = dir / "summary.json";
  std::ifstream in(summary_path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + summary_path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(summary_path.string() + ": " + e.what());
  }
  ExperimentReport report;
  try {
    report.experiment = doc.at("experiment").get<std::string>();
    report.config_hash = doc.at("config_hash").get<std::string>();
    report.config = doc.at("config");
    report.summary = doc.at("summary");
    for (const auto& f : doc.at("pass_flags")) {
      report.flag(f.at("name").get<std::string>(), f.at("passed").get<bool>());
    }
    for (const auto& t : doc.at("tables")) {
      Table& table = report.add_table(t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>());
      const auto rows = csv::read_file(dir / (table.name + ".csv"), true);
      if (rows.empty() || rows.front() != table.columns) {
        throw DataError(fmt::format("{}.csv: header does not match summary.json", table.name));
      }
      for (std::size_t r = 1; r < rows.size(); ++r) {
        std::vector<Cell> cells;
        for (const auto& field : rows[r]) cells.push_back(parse_cell(field));
        table.add_row(std::move(cells));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(summary_path.string() + ": " + e.what());
  }
  return report;
}

}  // namespace frontier_lab::harness
