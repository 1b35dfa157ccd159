#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "frontier_lab/errors.hpp"
#include "frontier_lab/market_data.hpp"

using namespace frontier_lab;
using namespace frontier_lab::market_data;

namespace {

std::string error_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("dates round trip") {
  const Date d = parse_date("2020-02-29", kDefaultDateFormat);
  CHECK(format_date(d, kDefaultDateFormat) == "2020-02-29");
  CHECK(format_date(parse_date("03/15/2021", "%m/%d/%Y"), kDefaultDateFormat) == "2021-03-15");
  CHECK_THROWS_AS(parse_date("2021-02-30", kDefaultDateFormat), DataError);
  CHECK_THROWS_AS(parse_date("yesterday", kDefaultDateFormat), DataError);
  CHECK_THROWS_AS(parse_date("2021-01-01x", kDefaultDateFormat), DataError);
}

TEST_CASE("parse sorts rows and keeps missing cells as NaN") {
  const PricePanel p = parse_price_csv(
      "AAA,Date,BBB\n"
      "11,2021-01-05,\n"
      "10,2021-01-04,20\n"
      "12,2021-01-06,22\n");
  REQUIRE(p.dates.size() == 3);
  CHECK(p.tickers == std::vector<std::string>{"AAA", "BBB"});
  CHECK(format_date(p.dates[0], kDefaultDateFormat) == "2021-01-04");
  CHECK(p.prices(0, 0) == 10.0);
  CHECK(p.prices(1, 0) == 11.0);
  CHECK(std::isnan(p.prices(1, 1)));
}

TEST_CASE("rejects malformed files") {
  CHECK_THROWS_AS(parse_price_csv("Date,A\n2021-01-04,1\n2021-01-04,2\n"), DataError);
  CHECK_THROWS_AS(parse_price_csv("Date,A,A\n2021-01-04,1,1\n2021-01-05,2,2\n"), DataError);
  CHECK_THROWS_AS(parse_price_csv("Date,A\n2021-01-04,1\n2021-01-05,-2\n"), DataError);
  CHECK_THROWS_AS(parse_price_csv("Day,A\n2021-01-04,1\n2021-01-05,2\n"), DataError);
  CHECK_THROWS_AS(parse_price_csv("Date,A\n2021-01-04,1\n"), DataError);
  CHECK_THROWS_AS(parse_price_csv("Date,A\n2021-01-04,1\n2021-01-05,2,3\n"), DataError);
  CHECK(error_of([] { load_price_csv("no/such/prices.csv"); }).find("no/such/prices.csv") != std::string::npos);
}

TEST_CASE("load reports the file in parse errors") {
  const auto path = std::filesystem::temp_directory_path() / "frontier_lab_bad_prices.csv";
  {
    std::ofstream out(path);
    out << "Date,A\n2021-01-04,1\n2021-01-05,-2\n";
  }
  const std::string msg = error_of([&] { load_price_csv(path); });
  CHECK(msg.find(path.string()) != std::string::npos);
  CHECK(msg.find("negative price") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("simple returns drop rows touching a missing price") {
  const PricePanel p = parse_price_csv(
      "Date,A,B\n"
      "2021-01-04,10,20\n"
      "2021-01-05,11,\n"
      "2021-01-06,12,22\n"
      "2021-01-07,6,11\n");
  const ReturnsPanel r = to_simple_returns(p);
  CHECK(r.dropped_rows == 2);
  REQUIRE(r.returns.rows() == 1);
  CHECK(format_date(r.dates[0], kDefaultDateFormat) == "2021-01-07");
  CHECK(r.returns(0, 0) == doctest::Approx(-0.5));
  CHECK(r.returns(0, 1) == doctest::Approx(-0.5));

  const PricePanel all_gaps = parse_price_csv("Date,A\n2021-01-04,\n2021-01-05,1\n");
  CHECK_THROWS_AS(to_simple_returns(all_gaps), DataError);
}

TEST_CASE("subset reports the shortfall") {
  const PricePanel p = parse_price_csv("Date,A,B\n2021-01-04,10,20\n2021-01-05,11,21\n2021-01-06,12,22\n");
  const ReturnsPanel r = to_simple_returns(p);
  const ReturnsPanel s = subset(r, 1, 1);
  CHECK(s.returns.rows() == 1);
  CHECK(s.tickers == std::vector<std::string>{"A"});
  const std::string msg = error_of([&] { subset(r, 5, 1); });
  CHECK(msg.find("3 short") != std::string::npos);
  CHECK_THROWS_AS(subset(r, 1, 3), ShapeError);
}

TEST_CASE("synthetic panel writes and reloads exactly") {
  stochastics::RngStream s(7);
  const PricePanel p = synthetic_price_panel(s, 3, 30);
  CHECK(p.prices.rows() == 30);
  CHECK((p.prices.array() > 0.0).all());
  for (const Date d : p.dates) {
    const std::chrono::weekday wd{d};
    CHECK(wd != std::chrono::Saturday);
    CHECK(wd != std::chrono::Sunday);
  }
  const auto path = std::filesystem::temp_directory_path() / "frontier_lab_roundtrip.csv";
  write_price_csv(path, p);
  const PricePanel back = load_price_csv(path);
  CHECK(back.dates == p.dates);
  CHECK(back.tickers == p.tickers);
  CHECK(back.prices == p.prices);
  std::filesystem::remove(path);
}

TEST_CASE("bundled fixture loads cleanly") {
  const PricePanel p = load_price_csv(std::filesystem::path(FRONTIER_LAB_SOURCE_DIR) / "data" / "synthetic_prices.csv");
  CHECK(p.tickers.size() == 6);
  CHECK(p.dates.size() == 1200);
  const ReturnsPanel r = to_simple_returns(p);
  CHECK(r.dropped_rows == 0);
  CHECK(subset(r, 1000, 5).returns.cols() == 5);
}
