// svg.cc
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

#include "divdecode/svg.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "divdecode/num_format.h"

namespace divdecode {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 60, kRight = 620, kTop = 20, kBottom = 440;

const char *kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string EscapeXml(const std::string &s) {
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

std::string Num(double v) { return FormatFixed(v, 2); }

}  // namespace

std::string TradeoffSvg(const std::vector<TradeoffPoint> &points,
                        const std::string &x_label,
                        const std::string &y_label) {
  if (points.empty()) throw std::runtime_error("no points to plot");

  double xmin = points[0].x, xmax = points[0].x;
  double ymin = points[0].y, ymax = points[0].y;
  for (const auto &p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  auto map_x = [&](double x) {
    if (xmax == xmin) return (kLeft + kRight) / 2;
    return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft);
  };
  auto map_y = [&](double y) {
    if (ymax == ymin) return (kTop + kBottom) / 2;
    return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
  };

  std::map<std::string, std::vector<const TradeoffPoint *>> series;
  for (const auto &p : points) series[p.series].push_back(&p);
  std::map<std::string, std::string> color;
  {
    size_t i = 0;
    for (const auto &[name, pts] : series) {
      color[name] = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
      ++i;
    }
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" +
         Num(kRight - kLeft) + "\" height=\"" + Num(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"#888888\"/>\n";

  // Axis labels and data ranges.
  svg += "<text x=\"" + Num((kLeft + kRight) / 2) + "\" y=\"470\" "
         "text-anchor=\"middle\" font-size=\"14\">" + EscapeXml(x_label) +
         "</text>\n";
  svg += "<text x=\"15\" y=\"" + Num((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 " +
         Num((kTop + kBottom) / 2) + ")\">" + EscapeXml(y_label) + "</text>\n";
  svg += "<text x=\"" + Num(kLeft) + "\" y=\"456\" font-size=\"11\">" +
         FormatShortest(xmin) + "</text>\n";
  svg += "<text x=\"" + Num(kRight) + "\" y=\"456\" text-anchor=\"end\" "
         "font-size=\"11\">" + FormatShortest(xmax) + "</text>\n";
  svg += "<text x=\"" + Num(kLeft - 5) + "\" y=\"" + Num(kBottom) +
         "\" text-anchor=\"end\" font-size=\"11\">" + FormatShortest(ymin) +
         "</text>\n";
  svg += "<text x=\"" + Num(kLeft - 5) + "\" y=\"" + Num(kTop + 10) +
         "\" text-anchor=\"end\" font-size=\"11\">" + FormatShortest(ymax) +
         "</text>\n";

  for (const auto &[name, pts] : series) {
    std::vector<const TradeoffPoint *> sorted = pts;
    std::sort(sorted.begin(), sorted.end(),
              [](const TradeoffPoint *a, const TradeoffPoint *b) {
                if (a->x != b->x) return a->x < b->x;
                return a->y < b->y;
              });
    if (sorted.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"" + color[name] +
             "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < sorted.size(); ++i) {
        if (i) svg += ' ';
        svg += Num(map_x(sorted[i]->x)) + "," + Num(map_y(sorted[i]->y));
      }
      svg += "\"/>\n";
    }
    for (const auto *p : sorted) {
      svg += "<circle cx=\"" + Num(map_x(p->x)) + "\" cy=\"" +
             Num(map_y(p->y)) + "\" r=\"3\" fill=\"" + color[name] + "\">" +
             "<title>" + EscapeXml(p->config_id) + "</title></circle>\n";
    }
  }

  // Legend, top-right inside the plot.
  double ly = kTop + 14;
  for (const auto &[name, pts] : series) {
    svg += "<rect x=\"" + Num(kRight - 110) + "\" y=\"" + Num(ly - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + color[name] + "\"/>\n";
    svg += "<text x=\"" + Num(kRight - 96) + "\" y=\"" + Num(ly) +
           "\" font-size=\"12\">" + EscapeXml(name) + "</text>\n";
    ly += 16;
  }

  svg += "</svg>\n";
  return svg;
}

void EmitTradeoffSvg(const std::vector<TradeoffPoint> &points,
                     const std::string &x_label, const std::string &y_label,
                     const std::string &path) {
  const std::string svg = TradeoffSvg(points, x_label, y_label);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  out << svg;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace divdecode
