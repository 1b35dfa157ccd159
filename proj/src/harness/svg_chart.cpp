#include "frontier_lab/harness/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "frontier_lab/errors.hpp"

namespace frontier_lab::harness {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 500;
constexpr int kLeft = 80;
constexpr int kRight = 180;
constexpr int kTop = 50;
constexpr int kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" is not allowed inside an XML comment.
std::string comment_safe(std::string s) {
  for (std::size_t i = s.find("--"); i != std::string::npos; i = s.find("--")) s.replace(i, 2, "- ");
  return s;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double half = lo == 0.0 ? 0.5 : std::max(0.5 * std::abs(lo) * 0.1, 1e-12);
    return {lo - half, hi + half};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Tick step of 1, 2 or 5 times a power of ten giving about five intervals.
std::vector<double> ticks(Range r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double k = std::ceil(r.lo / step); k * step <= r.hi + 1e-12 * step; k += 1.0) {
    const double v = k * step;
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::string coord(double v) { return fmt::format("{:.2f}", v); }

std::string tick_label(double v) { return fmt::format("{:.4g}", v); }

}  // namespace

std::string render_svg(const ChartSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  std::size_t finite = 0;
  for (const auto& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      ++finite;
    }
  }
  if (finite == 0) throw DataError(fmt::format("render: no data for chart '{}'", spec.title));

  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  if (!spec.comment.empty()) out += fmt::format("<!-- {} -->\n", comment_safe(spec.comment));
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                     coord(kLeft + plot_w / 2), escape(spec.title));

  out += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const auto xt = ticks(xr);
  const auto yt = ticks(yr);
  for (double t : xt) {
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", coord(px(t)), kTop, kTop + plot_h);
  }
  for (double t : yt) {
    out += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\"/>\n", coord(py(t)), kLeft, kLeft + plot_w);
  }
  out += "</g>\n";
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, coord(plot_w), coord(plot_h));

  out += "<g>\n";
  for (double t : xt) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", coord(px(t)),
                       coord(kTop + plot_h + 18), tick_label(t));
  }
  for (double t : yt) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, coord(py(t) + 4),
                       tick_label(t));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", coord(kLeft + plot_w / 2),
                     kHeight - 15, escape(spec.x_label));
  out += fmt::format("<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
                     coord(kTop + plot_h / 2), escape(spec.y_label));
  out += "</g>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const Series& s = spec.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    out += fmt::format("<g id=\"series-{}\">\n", i);
    if (s.style == SeriesStyle::kMarkers) {
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n", coord(px(x)),
                           coord(py(y)), color);
      }
    } else {
      std::string path;
      for (const auto& [x, y] : s.points) {
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        path += fmt::format("{}{},{}", path.empty() ? "" : " ", coord(px(x)), coord(py(y)));
      }
      const char* dash = s.style == SeriesStyle::kDashed ? " stroke-dasharray=\"6 4\"" : "";
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", path, color,
                         dash);
    }
    out += "</g>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(i);
    const double lx = kLeft + plot_w + 15;
    if (s.style == SeriesStyle::kMarkers) {
      out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n", coord(lx + 10), coord(ly), color);
    } else {
      out += fmt::format("<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                         coord(lx), coord(lx + 20), coord(ly), color,
                         s.style == SeriesStyle::kDashed ? " stroke-dasharray=\"6 4\"" : "");
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", coord(lx + 26), coord(ly + 4), escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::string> plot_kinds(const std::string& experiment) {
  static const std::map<std::string, std::vector<std::string>> kinds{
      {"attenuation", {"attenuation"}},
      {"cancellation", {"weights"}},
      {"calibration", {"calibration-scatter", "calibration-sharpe"}},
      {"nonlinear-frontier", {"weights", "frontier"}},
      {"alignment", {"alignment-sharpe", "alignment-frontiers"}},
      {"real-data-frontier", {"mean-vol", "frontier"}},
  };
  const auto it = kinds.find(experiment);
  if (it == kinds.end()) throw DataError(fmt::format("no plots defined for experiment '{}'", experiment));
  return it->second;
}

namespace {

// Row indices of a table restricted to rep 0 when it has a rep column.
std::vector<std::size_t> first_rep_rows(const Table& t) {
  std::vector<std::size_t> idx;
  const bool has_rep = std::find(t.columns.begin(), t.columns.end(), "rep") != t.columns.end();
  const std::vector<double> reps = has_rep ? t.numeric_column("rep") : std::vector<double>{};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!has_rep || reps[r] == 0.0) idx.push_back(r);
  }
  return idx;
}

Series xy_series(const Table& t, const std::string& x, const std::string& y, std::string label, SeriesStyle style) {
  const auto xs = t.numeric_column(x);
  const auto ys = t.numeric_column(y);
  Series s{std::move(label), {}, style};
  for (std::size_t r : first_rep_rows(t)) s.points.emplace_back(xs[r], ys[r]);
  return s;
}

// One series per distinct value of `group`, in first-appearance order.
std::vector<Series> grouped_series(const Table& t, const std::string& group, const std::string& x,
                                   const std::string& y, const std::string& label_fmt, SeriesStyle style,
                                   std::size_t stride = 1) {
  const auto gs = t.numeric_column(group);
  const auto xs = t.numeric_column(x);
  const auto ys = t.numeric_column(y);
  std::vector<double> keys;
  std::vector<Series> out;
  for (std::size_t r : first_rep_rows(t)) {
    auto it = std::find(keys.begin(), keys.end(), gs[r]);
    if (it == keys.end()) {
      keys.push_back(gs[r]);
      out.push_back(Series{fmt::format(fmt::runtime(label_fmt), gs[r]), {}, style});
      it = keys.end() - 1;
    }
    out[static_cast<std::size_t>(it - keys.begin())].points.emplace_back(xs[r], ys[r]);
  }
  std::vector<Series> kept;
  for (std::size_t i = 0; i < out.size(); i += std::max<std::size_t>(stride, 1)) kept.push_back(std::move(out[i]));
  return kept;
}

}  // namespace

std::string render_plot(const ExperimentReport& report, const std::string& kind) {
  ChartSpec spec;
  spec.comment = fmt::format("frontier-lab experiment={} config_hash={} plot={}", report.experiment,
                             report.config_hash, kind);
  if (kind == "attenuation") {
    const Table& t = report.table("attenuation");
    spec.title = "Attenuation of omitted-variable bias";
    spec.x_label = "sigma_zeta";
    spec.y_label = "OLS slope of Y on X";
    spec.series.push_back(xy_series(t, "sigma_zeta", "mc_slope", "Monte Carlo", SeriesStyle::kMarkers));
    spec.series.push_back(xy_series(t, "sigma_zeta", "theory_slope", "theory", SeriesStyle::kDashed));
  } else if (kind == "weights") {
    const Table& t = report.table("weights");
    spec.title = "Predicted vs true portfolio weights";
    spec.x_label = "omega_true";
    spec.y_label = "omega_pred";
    spec.series.push_back(xy_series(t, "omega_true", "omega_pred", "weights", SeriesStyle::kMarkers));
  } else if (kind == "frontier") {
    const Table& t = report.table("frontier");
    spec.title = "Mean-variance frontier";
    spec.x_label = "volatility";
    spec.y_label = "target return";
    spec.series.push_back(xy_series(t, "volatility", "target_return", "target", SeriesStyle::kLine));
    spec.series.push_back(xy_series(t, "volatility", "realized_return", "realized", SeriesStyle::kDashed));
  } else if (kind == "calibration-scatter") {
    const Table& t = report.table("calibration_scatter");
    spec.title = "Power-transformed signals";
    spec.x_label = "mu";
    spec.y_label = "mu_tilde";
    spec.series = grouped_series(t, "p", "mu", "mu_tilde", "p={:g}", SeriesStyle::kMarkers);
  } else if (kind == "calibration-sharpe") {
    const Table& t = report.table("calibration");
    spec.title = "Sharpe efficiency vs calibration exponent";
    spec.x_label = "p";
    spec.y_label = "relative Sharpe";
    spec.series.push_back(xy_series(t, "p", "relative_sharpe", "relative Sharpe", SeriesStyle::kLine));
    spec.series.push_back(xy_series(t, "p", "relative_sharpe", "grid", SeriesStyle::kMarkers));
  } else if (kind == "alignment-sharpe") {
    const Table& t = report.table("alignment");
    spec.title = "Sharpe ratio vs alignment";
    spec.x_label = "rho";
    spec.y_label = "Sharpe ratio / optimal";
    spec.series.push_back(xy_series(t, "rho", "sharpe_ratio", "tangency", SeriesStyle::kMarkers));
    spec.series.push_back(xy_series(t, "rho", "rho", "cosine law", SeriesStyle::kDashed));
  } else if (kind == "alignment-frontiers") {
    const Table& t = report.table("alignment_frontiers");
    spec.title = "Frontiers under misalignment";
    spec.x_label = "volatility";
    spec.y_label = "realized return";
    spec.series = grouped_series(t, "theta", "volatility", "realized_return", "theta={:.3f}", SeriesStyle::kLine, 4);
  } else if (kind == "mean-vol") {
    const Table& t = report.table("assets");
    spec.title = "Asset mean and volatility";
    spec.x_label = "volatility";
    spec.y_label = "mean return";
    spec.series.push_back(xy_series(t, "volatility", "mean", "assets", SeriesStyle::kMarkers));
  } else {
    throw DataError(fmt::format("unknown plot kind '{}'", kind));
  }
  return render_svg(spec);
}

}  // namespace frontier_lab::harness
