#pragma once

#include <string>
#include <utility>
#include <vector>

#include "frontier_lab/harness/report.hpp"

namespace frontier_lab::harness {

enum class SeriesStyle { kMarkers, kLine, kDashed };

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  SeriesStyle style = SeriesStyle::kMarkers;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::string comment;  // emitted as an XML comment after the root element
};

/// Fixed 800x500 canvas. Axis ranges come from the finite data with 5%
/// padding on each side; a zero-width range is widened by 5% of the value
/// (0.5 around zero). Colors are assigned from a fixed palette in series
/// order. Throws DataError when no series has a finite point.
std::string render_svg(const ChartSpec& spec);

/// Plot kinds available for an experiment, in output order.
std::vector<std::string> plot_kinds(const std::string& experiment);

/// Builds the chart for `kind` from the report's tables. Rows of repeated
/// experiments are restricted to repetition 0. Throws DataError for an
/// unknown kind or empty data.
std::string render_plot(const ExperimentReport& report, const std::string& kind);

}  // namespace frontier_lab::harness
