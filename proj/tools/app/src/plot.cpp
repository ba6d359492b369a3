// Copyright 2026 The RiskProp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "internal.hpp"

namespace riskprop::app {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 300.0;
constexpr double kLeft = 50.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

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

}  // namespace

std::string svg_plot(const std::string& title, const std::vector<double>& x,
                     const std::vector<PlotSeries>& series, std::optional<double> threshold,
                     const std::vector<PlotMarker>& markers, const std::string& x_label) {
  double x_lo = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
  double x_hi = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double v) { return kTop + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (double tick : {0.0, 0.5, 1.0}) {
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(tick) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << num(tick)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << kHeight - 10
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
      << escape(x_label) << " [" << num(x_lo) << ", " << num(x_hi) << "]</text>\n";

  if (threshold) {
    svg << "<line class=\"threshold\" x1=\"" << num(px(x_lo)) << "\" y1=\"" << num(py(*threshold))
        << "\" x2=\"" << num(px(x_hi)) << "\" y2=\"" << num(py(*threshold))
        << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
  }
  for (const auto& m : markers) {
    svg << "<line class=\"marker\" x1=\"" << num(px(m.x)) << "\" y1=\"" << kTop << "\" x2=\""
        << num(px(m.x)) << "\" y2=\"" << kTop + plot_h << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
    svg << "<text x=\"" << num(px(m.x) + 3) << "\" y=\"" << kTop + 12
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(m.label) << "</text>\n";
  }
  double legend_y = kTop + 14;
  for (const auto& s : series) {
    svg << "<polyline class=\"series\" data-name=\"" << escape(s.name)
        << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(x.size(), s.y.size());
    for (std::size_t k = 0; k < n; ++k) {
      svg << (k ? " " : "") << num(px(x[k])) << ',' << num(py(s.y[k]));
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << num(kLeft + plot_w - 120) << "\" y=\"" << num(legend_y)
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << s.color << "\">"
        << escape(s.name) << "</text>\n";
    legend_y += 13;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace riskprop::app
