#include "csiblt/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace csiblt {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 560.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 770.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 500.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// "Nice" tick step covering the range with about `target` intervals.
double tick_step(double range, int target) {
  if (range <= 0) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10.0;
}

}  // namespace

std::string render_cost_plot(const std::vector<TrialRecord>& records) {
  // protocol -> d -> (total, count)
  std::map<std::string, std::map<std::uint64_t, std::pair<double, std::uint64_t>>> series;
  for (const TrialRecord& r : records) {
    auto& cell = series[r.protocol][r.d];
    cell.first += static_cast<double>(r.scalars_sent);
    cell.second += 1;
  }

  double d_max = 1.0;
  double y_max = 1.0;
  for (const auto& [name, by_d] : series) {
    for (const auto& [d, agg] : by_d) {
      d_max = std::max(d_max, static_cast<double>(d));
      y_max = std::max(y_max, agg.first / static_cast<double>(agg.second));
    }
  }
  y_max *= 1.05;

  const auto x_of = [&](double d) { return kLeft + (kRight - kLeft) * (d / d_max); };
  const auto y_of = [&](double v) { return kBottom - (kBottom - kTop) * (v / y_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

  // axes
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kRight)
      << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
      << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"black\"/>\n";

  const double x_step = tick_step(d_max, 8);
  for (double t = 0.0; t <= d_max + 1e-9; t += x_step) {
    const double x = x_of(t);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(kBottom + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kBottom + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << static_cast<long long>(t)
        << "</text>\n";
  }
  const double y_step = tick_step(y_max, 8);
  for (double t = 0.0; t <= y_max + 1e-9; t += y_step) {
    const double y = y_of(t);
    svg << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << static_cast<long long>(t)
        << "</text>\n";
  }

  svg << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"" << fmt(kBottom + 45)
      << "\" font-size=\"14\" text-anchor=\"middle\">set difference size d</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt((kTop + kBottom) / 2)
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt((kTop + kBottom) / 2)
      << ")\">communication cost (64-bit scalars)</text>\n";

  std::size_t color = 0;
  double legend_y = kTop + 10.0;
  for (const auto& [name, by_d] : series) {
    const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream points;
    bool first = true;
    for (const auto& [d, agg] : by_d) {
      const double mean = agg.first / static_cast<double>(agg.second);
      if (!first) points << ' ';
      points << fmt(x_of(static_cast<double>(d))) << ',' << fmt(y_of(mean));
      first = false;
    }
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\""
        << points.str() << "\"/>\n";

    svg << "<line x1=\"" << fmt(kRight - 150) << "\" y1=\"" << fmt(legend_y) << "\" x2=\""
        << fmt(kRight - 120) << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(kRight - 114) << "\" y=\"" << fmt(legend_y + 4)
        << "\" font-size=\"13\">" << name << "</text>\n";
    legend_y += 20.0;
    ++color;
  }

  svg << "</svg>\n";
  return svg.str();
}

void plot_csv_to_svg(const std::string& csv_path, const std::string& svg_path) {
  const auto records = read_csv_file(csv_path);
  const std::string svg = render_cost_plot(records);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + svg_path);
  out << svg;
}

}  // namespace csiblt
