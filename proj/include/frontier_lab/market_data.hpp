#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "frontier_lab/stochastics.hpp"

namespace frontier_lab::market_data {

using Date = std::chrono::sys_days;

/// Prices by date (rows) and ticker (columns). Missing cells are NaN.
/// Dates strictly increasing, tickers unique.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;
};

/// Simple returns; dates are the later date of each pair.
struct ReturnsPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;
  std::size_t dropped_rows = 0;
};

inline constexpr std::string_view kDefaultDateFormat = "%Y-%m-%d";

/// CSV with a header row: one date column (any position) and one column per
/// ticker. Rows are sorted by date; empty or non-numeric cells become NaN.
/// Throws DataError for a missing file, an unparseable date, a duplicate date
/// or ticker, a negative price, or fewer than 2 data rows.
PricePanel load_price_csv(const std::filesystem::path& path, std::string_view date_column = "Date",
                          std::string_view date_format = kDefaultDateFormat);
PricePanel parse_price_csv(std::string_view text, std::string_view date_column = "Date",
                           std::string_view date_format = kDefaultDateFormat);

void write_price_csv(const std::filesystem::path& path, const PricePanel& panel,
                     std::string_view date_column = "Date", std::string_view date_format = kDefaultDateFormat);

/// r_t = p_t / p_{t-1} - 1. A row with any non-finite return (missing price,
/// zero previous price) is dropped whole; surviving rows keep their order.
/// Throws DataError when nothing survives.
ReturnsPanel to_simple_returns(const PricePanel& panel);

/// First n_days rows and first n_assets columns.
ReturnsPanel subset(const ReturnsPanel& panel, std::size_t n_days, std::size_t n_assets);

Date parse_date(std::string_view text, std::string_view format);
std::string format_date(Date date, std::string_view format);

/// Geometric random walk on business days starting 2015-01-02: per-ticker
/// drift ~ U(-2e-4, 8e-4), daily vol ~ U(0.01, 0.025), starting price
/// ~ U(20, 200). Draw order: drifts, vols, starts, then shocks row by row.
PricePanel synthetic_price_panel(stochastics::RngStream& stream, std::size_t n_tickers = 6,
                                 std::size_t n_days = 1200);

}  // namespace frontier_lab::market_data
