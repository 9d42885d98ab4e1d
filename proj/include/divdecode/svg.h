// svg.h
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
//
// Dependency-free SVG scatter/polyline plots for tradeoff curves.  Output is
// byte-deterministic for identical inputs, so plots can be golden-file
// tested.

#ifndef DIVDECODE_SVG_H_
#define DIVDECODE_SVG_H_

#include <string>
#include <vector>

namespace divdecode {

struct TradeoffPoint {
  std::string config_id;  // label, e.g. "SP T=0.5"
  std::string series;     // one polyline per distinct series (method)
  double x = 0;           // diversity axis
  double y = 0;           // accuracy axis
};

// 640x480 viewbox; data is affinely mapped onto the plot rectangle so the
// extremes land on its edges.  One circle per point, one polyline per series
// (points joined in x order), labeled axes and a legend.
std::string TradeoffSvg(const std::vector<TradeoffPoint> &points,
                        const std::string &x_label, const std::string &y_label);

// Throws std::runtime_error when the path is unwritable or points is empty.
void EmitTradeoffSvg(const std::vector<TradeoffPoint> &points,
                     const std::string &x_label, const std::string &y_label,
                     const std::string &path);

}  // namespace divdecode

#endif  // DIVDECODE_SVG_H_
