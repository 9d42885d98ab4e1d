// num_format.h
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
// Locale-independent number formatting (std::to_chars) so CSV and SVG
// outputs are byte-reproducible.

#ifndef DIVDECODE_NUM_FORMAT_H_
#define DIVDECODE_NUM_FORMAT_H_

#include <charconv>
#include <string>

namespace divdecode {

inline std::string FormatFixed(double x, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x,
                           std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

// Shortest representation that round-trips.
inline std::string FormatShortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace divdecode

#endif  // DIVDECODE_NUM_FORMAT_H_
