#include "svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace geomimu::cli {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanel = 220.0;
constexpr double kMargin = 50.0;
const char* const kColors[3] = {"#d62728", "#2ca02c", "#1f77b4"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void panel(std::ostringstream& svg, const Signal& s, int first, double top, double rate, const char* label) {
  double lo = s.middleCols(first, 3).minCoeff();
  double hi = s.middleCols(first, 3).maxCoeff();
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double n = static_cast<double>(std::max<Eigen::Index>(s.rows() - 1, 1));
  svg << "<rect x='" << kMargin << "' y='" << top << "' width='" << plot_w << "' height='" << kPanel
      << "' fill='none' stroke='#999'/>\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "<text x='%g' y='%g' font-size='12'>%s  [%.3g, %.3g]  %.2f s</text>\n", kMargin,
                top - 6, label, lo, hi, n / rate);
  svg << buf;
  for (int c = 0; c < 3; ++c) {
    svg << "<polyline fill='none' stroke-width='1' stroke='" << kColors[c] << "' points='";
    for (Eigen::Index t = 0; t < s.rows(); ++t) {
      const double x = kMargin + plot_w * static_cast<double>(t) / n;
      const double y = top + kPanel * (1.0 - (s(t, first + c) - lo) / (hi - lo));
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
      svg << buf;
    }
    svg << "'/>\n";
  }
}

}  // namespace

std::string render_signal_svg(const Signal& samples, double rate, const std::string& title) {
  const double height = 2 * kPanel + 3 * kMargin;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << height << "'>\n";
  svg << "<text x='" << kMargin << "' y='20' font-size='14'>" << escape(title) << "</text>\n";
  if (samples.rows() > 0) {
    panel(svg, samples, 0, kMargin, rate, "accel (m/s^2) x y z");
    panel(svg, samples, 3, 2 * kMargin + kPanel, rate, "gyro (rad/s) x y z");
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace geomimu::cli
