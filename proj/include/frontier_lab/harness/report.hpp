#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace frontier_lab::harness {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& column) const;
  /// Numeric view of one column; DataError for a string cell.
  std::vector<double> numeric_column(const std::string& column) const;
};

struct ExperimentReport {
  std::string experiment;
  std::string config_hash;
  nlohmann::json config;  // canonical form
  std::deque<Table> tables;  // add_table references stay valid
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::pair<std::string, bool>> pass_flags;

  bool all_passed() const;
  const Table& table(const std::string& name) const;
  bool has_table(const std::string& name) const;
  Table& add_table(std::string name, std::vector<std::string> columns);
  void flag(std::string name, bool passed);
};

/// "# frontier-lab experiment=<name> config_hash=<hash>"
std::string report_header(const ExperimentReport& report);

std::string table_to_csv(const ExperimentReport& report, const Table& table);
/// Pretty-printed JSON with sorted keys: experiment, config_hash, config,
/// tables, summary, pass_flags.
std::string summary_to_json(const ExperimentReport& report);

/// Writes <dir>/<table>.csv for every table and <dir>/summary.json.
void write_report_files(const ExperimentReport& report, const std::filesystem::path& dir);
/// Reads back what write_report_files wrote. Numbers come back as doubles.
ExperimentReport load_report(const std::filesystem::path& dir);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; the first exception is rethrown after all workers
/// stop. Callers write into slot i so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace frontier_lab::harness
