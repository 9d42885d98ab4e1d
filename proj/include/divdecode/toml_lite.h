// toml_lite.h
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
// Minimal TOML reader covering the sweep-config schema: bare keys,
// `key = value` pairs, [table] and [[array-of-table]] headers, strings,
// integers, floats, booleans, flat arrays, and # comments.  Errors carry
// line numbers.

#ifndef DIVDECODE_TOML_LITE_H_
#define DIVDECODE_TOML_LITE_H_

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace divdecode {

struct TomlValue {
  std::variant<std::string, int64_t, double, bool, std::vector<TomlValue>> v;

  bool IsString() const { return std::holds_alternative<std::string>(v); }
  bool IsArray() const {
    return std::holds_alternative<std::vector<TomlValue>>(v);
  }
  const std::string &AsString() const;
  int64_t AsInt() const;
  double AsDouble() const;  // accepts integer values too
  bool AsBool() const;
  const std::vector<TomlValue> &AsArray() const;
  std::vector<double> AsDoubleList() const;  // scalar promotes to [scalar]
  std::vector<int64_t> AsIntList() const;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDoc {
  TomlTable root;
  std::map<std::string, TomlTable> tables;                   // [name]
  std::map<std::string, std::vector<TomlTable>> table_arrays;  // [[name]]
};

TomlDoc ParseToml(const std::string &text);
TomlDoc LoadToml(const std::string &path);

}  // namespace divdecode

#endif  // DIVDECODE_TOML_LITE_H_
