/*
 * Copyright 2026 The mcemu Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Execution-time vs energy scatter plot as a standalone SVG document.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "mcemu/dse.hpp"
#include "mcemu/errors.hpp"

namespace mcemu {

struct ScatterPoint {
  double exec_ms = 0;
  double energy_mj = 0;
  bool on_front = false;
};

inline std::vector<ScatterPoint> scatter_points(std::span<const SweepRow> rows) {
  std::vector<ScatterPoint> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({std::strtod(r.exec_time_ms.c_str(), nullptr),
                   std::strtod(r.energy_mj.c_str(), nullptr), r.on_pareto_front});
  return out;
}

namespace scatter_detail {

struct Axis {
  double lo, hi;
  double map(double v, double px_lo, double px_hi) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

inline Axis padded(double lo, double hi) {
  if (hi == lo) {
    const double pad = lo != 0 ? std::fabs(lo) * 0.1 : 1.0;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

inline std::string num(double v, int places = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

inline std::string label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace scatter_detail

/// X: execution time (ms), Y: energy (mJ). Pareto-front points are drawn in
/// a second colour and joined by a line in order of execution time.
inline std::string render_scatter(std::span<const ScatterPoint> points) {
  using namespace scatter_detail;
  if (points.empty()) throw EmptyInput("scatter plot needs at least one point");

  constexpr double kWidth = 800, kHeight = 560;
  constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;

  double xmin = points[0].exec_ms, xmax = xmin;
  double ymin = points[0].energy_mj, ymax = ymin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.exec_ms);
    xmax = std::max(xmax, p.exec_ms);
    ymin = std::min(ymin, p.energy_mj);
    ymax = std::max(ymax, p.energy_mj);
  }
  const Axis ax = padded(xmin, xmax), ay = padded(ymin, ymax);

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, 0) +
         "\" height=\"" + num(kHeight, 0) + "\" viewBox=\"0 0 " +
         num(kWidth, 0) + " " + num(kHeight, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">Execution time vs energy (" +
         std::to_string(points.size()) + " designs)</text>\n";

  // Axes, ticks and grid.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
         "\" y2=\"" + num(y0) + "\"/>\n";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
         "\" y2=\"" + num(y1) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double vx = ax.lo + (ax.hi - ax.lo) * i / kTicks;
    const double px = ax.map(vx, x0, x1);
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) +
           "\" y2=\"" + num(y0 + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 20) +
           "\" text-anchor=\"middle\">" + label(vx) + "</text>\n";
    const double vy = ay.lo + (ay.hi - ay.lo) * i / kTicks;
    const double py = ay.map(vy, y0, y1);
    svg += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(x0) + "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\">" + label(vy) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">Execution time (ms)</text>\n";
  svg += "<text transform=\"translate(22 " + num((y0 + y1) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">Energy (mJ)</text>\n";

  std::vector<const ScatterPoint*> front;
  svg += "<g id=\"designs\" fill=\"steelblue\" fill-opacity=\"0.6\">\n";
  for (const auto& p : points) {
    if (p.on_front) {
      front.push_back(&p);
      continue;
    }
    svg += "<circle class=\"design\" cx=\"" + num(ax.map(p.exec_ms, x0, x1)) +
           "\" cy=\"" + num(ay.map(p.energy_mj, y0, y1)) + "\" r=\"3\"/>\n";
  }
  svg += "</g>\n";

  std::stable_sort(front.begin(), front.end(),
                   [](const ScatterPoint* a, const ScatterPoint* b) {
                     if (a->exec_ms != b->exec_ms) return a->exec_ms < b->exec_ms;
                     return a->energy_mj < b->energy_mj;
                   });
  if (!front.empty()) {
    svg += "<polyline id=\"pareto-line\" fill=\"none\" stroke=\"crimson\" "
           "stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (i) svg += ' ';
      svg += num(ax.map(front[i]->exec_ms, x0, x1)) + "," +
             num(ay.map(front[i]->energy_mj, y0, y1));
    }
    svg += "\"/>\n";
    svg += "<g id=\"pareto\" fill=\"crimson\" stroke=\"black\" "
           "stroke-width=\"0.5\">\n";
    for (const auto* p : front)
      svg += "<circle class=\"design pareto\" cx=\"" +
             num(ax.map(p->exec_ms, x0, x1)) + "\" cy=\"" +
             num(ay.map(p->energy_mj, y0, y1)) + "\" r=\"4.5\"/>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mcemu
