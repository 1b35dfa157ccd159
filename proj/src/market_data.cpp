#include "frontier_lab/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "frontier_lab/csv.hpp"
#include "frontier_lab/errors.hpp"

namespace frontier_lab::market_data {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_price(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return kMissing;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) return kMissing;
  return value;
}

}  // namespace

Date parse_date(std::string_view text, std::string_view format) {
  std::tm tm{};
  std::istringstream in{std::string(trim(text))};
  in >> std::get_time(&tm, std::string(format).c_str());
  if (in.fail()) throw DataError(fmt::format("unparseable date '{}' for format '{}'", text, format));
  in >> std::ws;
  if (!in.eof()) throw DataError(fmt::format("trailing characters in date '{}'", text));
  const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                        std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                        std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid calendar date '{}'", text));
  return Date{ymd};
}

std::string format_date(Date date, std::string_view format) {
  const std::chrono::year_month_day ymd{date};
  std::tm tm{};
  tm.tm_year = static_cast<int>(ymd.year()) - 1900;
  tm.tm_mon = static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
  tm.tm_mday = static_cast<int>(static_cast<unsigned>(ymd.day()));
  std::ostringstream out;
  out << std::put_time(&tm, std::string(format).c_str());
  return out.str();
}

PricePanel parse_price_csv(std::string_view text, std::string_view date_column, std::string_view date_format) {
  const std::vector<csv::Row> rows = csv::parse(text);
  if (rows.empty()) throw DataError("price csv: missing header row");
  const csv::Row& header = rows.front();
  const auto date_it = std::find_if(header.begin(), header.end(),
                                    [&](const std::string& h) { return trim(h) == date_column; });
  if (date_it == header.end()) throw DataError(fmt::format("price csv: no '{}' column in header", date_column));
  const auto date_idx = static_cast<std::size_t>(std::distance(header.begin(), date_it));

  PricePanel panel;
  std::vector<std::size_t> ticker_cols;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == date_idx) continue;
    std::string name = trim(header[c]);
    if (!seen.insert(name).second) throw DataError(fmt::format("price csv: duplicate ticker '{}'", name));
    panel.tickers.push_back(std::move(name));
    ticker_cols.push_back(c);
  }
  if (panel.tickers.empty()) throw DataError("price csv: no ticker columns");

  const std::size_t n_rows = rows.size() - 1;
  if (n_rows < 2) throw DataError(fmt::format("price csv: need at least 2 data rows, found {}", n_rows));

  std::vector<Date> dates(n_rows);
  Eigen::MatrixXd prices(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(ticker_cols.size()));
  for (std::size_t r = 0; r < n_rows; ++r) {
    const csv::Row& row = rows[r + 1];
    if (row.size() != header.size()) {
      throw DataError(fmt::format("price csv: data row {} has {} fields, header has {}", r + 1, row.size(),
                                  header.size()));
    }
    dates[r] = parse_date(row[date_idx], date_format);
    for (std::size_t t = 0; t < ticker_cols.size(); ++t) {
      const double price = parse_price(row[ticker_cols[t]]);
      if (price < 0.0) {
        throw DataError(fmt::format("price csv: negative price for '{}' in data row {}", panel.tickers[t], r + 1));
      }
      prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = price;
    }
  }

  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
  panel.dates.reserve(n_rows);
  panel.prices.resize(prices.rows(), prices.cols());
  for (std::size_t i = 0; i < n_rows; ++i) {
    const Date d = dates[order[i]];
    if (!panel.dates.empty() && panel.dates.back() == d) {
      throw DataError(fmt::format("price csv: duplicate date {}", format_date(d, kDefaultDateFormat)));
    }
    panel.dates.push_back(d);
    panel.prices.row(static_cast<Eigen::Index>(i)) = prices.row(static_cast<Eigen::Index>(order[i]));
  }
  return panel;
}

PricePanel load_price_csv(const std::filesystem::path& path, std::string_view date_column,
                          std::string_view date_format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("price csv: cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_price_csv(buffer.str(), date_column, date_format);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_price_csv(const std::filesystem::path& path, const PricePanel& panel, std::string_view date_column,
                     std::string_view date_format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  csv::Row header{std::string(date_column)};
  header.insert(header.end(), panel.tickers.begin(), panel.tickers.end());
  out << csv::format_row(header);
  for (std::size_t r = 0; r < panel.dates.size(); ++r) {
    csv::Row row{format_date(panel.dates[r], date_format)};
    for (Eigen::Index c = 0; c < panel.prices.cols(); ++c) {
      const double p = panel.prices(static_cast<Eigen::Index>(r), c);
      row.push_back(std::isnan(p) ? std::string() : csv::format_number(p));
    }
    out << csv::format_row(row);
  }
}

ReturnsPanel to_simple_returns(const PricePanel& panel) {
  const Eigen::Index rows = panel.prices.rows();
  if (rows < 2) throw DataError("to_simple_returns: need at least 2 price rows");
  ReturnsPanel out;
  out.tickers = panel.tickers;
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd all(rows - 1, panel.prices.cols());
  for (Eigen::Index t = 1; t < rows; ++t) {
    all.row(t - 1) = (panel.prices.row(t).array() / panel.prices.row(t - 1).array() - 1.0).matrix();
    if (all.row(t - 1).allFinite()) {
      kept.push_back(t - 1);
    } else {
      ++out.dropped_rows;
    }
  }
  if (kept.empty()) throw DataError("to_simple_returns: every return row was dropped");
  out.returns.resize(static_cast<Eigen::Index>(kept.size()), all.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.returns.row(static_cast<Eigen::Index>(i)) = all.row(kept[i]);
    out.dates.push_back(panel.dates[static_cast<std::size_t>(kept[i]) + 1]);
  }
  return out;
}

ReturnsPanel subset(const ReturnsPanel& panel, std::size_t n_days, std::size_t n_assets) {
  const auto rows = static_cast<std::size_t>(panel.returns.rows());
  const auto cols = static_cast<std::size_t>(panel.returns.cols());
  if (n_days == 0 || n_assets == 0) throw ShapeError("subset: n_days and n_assets must be positive");
  if (rows < n_days) throw ShapeError(fmt::format("subset: need {} return rows, panel has {} ({} short)", n_days, rows, n_days - rows));
  if (cols < n_assets) {
    throw ShapeError(fmt::format("subset: need {} assets, panel has {} ({} short)", n_assets, cols, n_assets - cols));
  }
  ReturnsPanel out;
  out.dates.assign(panel.dates.begin(), panel.dates.begin() + static_cast<std::ptrdiff_t>(n_days));
  out.tickers.assign(panel.tickers.begin(), panel.tickers.begin() + static_cast<std::ptrdiff_t>(n_assets));
  out.returns = panel.returns.topLeftCorner(static_cast<Eigen::Index>(n_days), static_cast<Eigen::Index>(n_assets));
  out.dropped_rows = panel.dropped_rows;
  return out;
}

PricePanel synthetic_price_panel(stochastics::RngStream& stream, std::size_t n_tickers, std::size_t n_days) {
  if (n_tickers < 1 || n_days < 2) throw DomainError("synthetic_price_panel: need >= 1 ticker and >= 2 days");
  const auto k = static_cast<Eigen::Index>(n_tickers);
  const auto n = static_cast<Eigen::Index>(n_days);
  const Eigen::VectorXd drift = stochastics::uniform(stream, k, -2e-4, 8e-4);
  const Eigen::VectorXd vol = stochastics::uniform(stream, k, 0.01, 0.025);
  const Eigen::VectorXd start = stochastics::uniform(stream, k, 20.0, 200.0);
  const Eigen::MatrixXd shocks = stochastics::standard_normal_matrix(stream, n, k);

  PricePanel panel;
  for (std::size_t j = 0; j < n_tickers; ++j) panel.tickers.push_back(fmt::format("SYN{}", j));
  panel.prices.resize(n, k);
  Date day = Date{std::chrono::year{2015} / std::chrono::January / 2};
  for (Eigen::Index t = 0; t < n; ++t) {
    while (std::chrono::weekday{day} == std::chrono::Saturday || std::chrono::weekday{day} == std::chrono::Sunday) {
      day += std::chrono::days{1};
    }
    panel.dates.push_back(day);
    day += std::chrono::days{1};
    for (Eigen::Index j = 0; j < k; ++j) {
      const double log_step = drift[j] - 0.5 * vol[j] * vol[j] + vol[j] * shocks(t, j);
      panel.prices(t, j) = t == 0 ? start[j] : panel.prices(t - 1, j) * std::exp(log_step);
    }
  }
  return panel;
}

}  // namespace frontier_lab::market_data
