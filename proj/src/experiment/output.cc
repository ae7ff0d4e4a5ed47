#include "distq/experiment/output.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <fmt/format.h>

#include "distq/errors.h"

namespace distq::experiment {

namespace {

std::string optional_number(const std::optional<double>& value) {
  return value ? fmt::format("{}", *value) : std::string();
}

std::size_t csv_sensor_id(const RunTrace& trace, std::size_t i) {
  return trace.distributed ? i + 1 : 0;
}

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

constexpr std::array<std::string_view, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string render_plot(const std::vector<Series>& series, std::string_view title,
                        std::string_view y_label) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (!std::isfinite(x_min)) return {};
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kMarginTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, title);
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
      kMarginLeft, kMarginTop, plot_w, plot_h);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">k</text>\n",
                     kMarginLeft + plot_w / 2, kHeight - 12);
  svg += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      kMarginTop + plot_h / 2, y_label);
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px(fx),
                       kMarginTop + plot_h + 16, fx);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n",
                       kMarginLeft - 6, py(fy) + 4, fy);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto colour = kPalette[s % kPalette.size()];
    std::string points;
    for (const auto& [x, y] : series[s].points) {
      points += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    }
    if (!points.empty()) points.pop_back();
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       colour, points);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
                       kMarginLeft + plot_w - 90, kMarginTop + 16 + 14 * static_cast<double>(s),
                       colour, series[s].label);
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<Series> collect(const RunTrace& trace,
                            const std::function<std::optional<double>(const SensorRecord&)>& value) {
  const std::size_t n = trace.rounds.empty() ? 0 : trace.rounds.front().sensors.size();
  std::vector<Series> series(n);
  for (std::size_t i = 0; i < n; ++i) {
    series[i].label = trace.distributed ? fmt::format("sensor {}", i + 1) : "centralized";
  }
  for (const auto& round : trace.rounds) {
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto v = value(round.sensors[i])) {
        series[i].points.emplace_back(static_cast<double>(round.k), *v);
      }
    }
  }
  std::erase_if(series, [](const Series& s) { return s.points.empty(); });
  return series;
}

}  // namespace

std::string format_trace_csv(const RunTrace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& round : trace.rounds) {
    const std::string diameter = optional_number(round.consensus_diameter);
    for (std::size_t i = 0; i < round.sensors.size(); ++i) {
      const auto& s = round.sensors[i];
      out += fmt::format("{},{},{},{},{},{},{}\n", round.k, csv_sensor_id(trace, i), round.alpha,
                         s.omega, s.norm1, optional_number(s.err_to_oracle), diameter);
    }
  }
  return out;
}

std::string render_norm_plot(const RunTrace& trace, std::string_view title) {
  return render_plot(collect(trace, [](const SensorRecord& s) { return std::optional(s.norm1); }),
                     title, "norm1_G");
}

std::string render_error_plot(const RunTrace& trace, std::string_view title) {
  return render_plot(collect(trace,
                             [](const SensorRecord& s) -> std::optional<double> {
                               if (!s.err_to_oracle || !(*s.err_to_oracle > 0.0)) {
                                 return std::nullopt;
                               }
                               return std::log10(*s.err_to_oracle);
                             }),
                     title, "log10 fro_err_to_Gstar");
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

void write_run_artifacts(const std::filesystem::path& dir, const RunTrace& trace,
                         std::string_view label) {
  write_text_file(dir / "trace.csv", format_trace_csv(trace));
  write_text_file(dir / "plots" / "norm1.svg",
                  render_norm_plot(trace, fmt::format("{}: entrywise 1-norm of G", label)));
  const std::string error_plot =
      render_error_plot(trace, fmt::format("{}: distance to G*", label));
  if (!error_plot.empty()) write_text_file(dir / "plots" / "error.svg", error_plot);
}

}  // namespace distq::experiment
