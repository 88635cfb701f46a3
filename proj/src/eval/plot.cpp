// Copyright 2026 The FOGAN Authors.
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

#include "fogan/eval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fogan/error.hpp"

namespace fogan::eval {

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw UsageError("moving_average: window must be >= 1");
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t lo = k + 1 >= static_cast<std::size_t>(window) ? k + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= k; ++j) s += values[j];
    out.push_back(s / static_cast<double>(k + 1 - lo));
  }
  return out;
}

namespace {

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::vector<Series>& series) {
  const double w = 640;
  const double h = 400;
  const double left = 70;
  const double right = 20;
  const double top = 40;
  const double bottom = 50;
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">"
    << esc(title) << "</text>\n"
    << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\""
    << h - bottom << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = y0 + (y1 - y0) * t / 4.0;
    const double xv = x0 + (x1 - x0) * t / 4.0;
    o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv) << "</text>\n"
      << "<text x=\"" << px(xv) << "\" y=\"" << h - bottom + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv)
      << "</text>\n";
  }
  o << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << esc(x_label)
    << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      o << num(px(s.x[k])) << "," << num(py(s.y[k])) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << w - right - 4 << "\" y=\"" << top + 14 * (si + 1)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
      << "\">" << esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << content;
  if (!out) throw UsageError("write failed for '" + path + "'");
}

}  // namespace fogan::eval
