// toml_lite.cc
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

#include "divdecode/toml_lite.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace divdecode {

namespace {

[[noreturn]] void Fail(size_t line, const std::string &msg) {
  throw std::runtime_error("toml line " + std::to_string(line) + ": " + msg);
}

std::string_view StripComment(std::string_view s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

std::string_view Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

TomlValue ParseScalar(std::string_view text, size_t line) {
  text = Trim(text);
  if (text.empty()) Fail(line, "empty value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      Fail(line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        ++i;
        switch (text[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: Fail(line, "unsupported escape");
        }
      } else {
        out += text[i];
      }
    }
    return {out};
  }
  if (text == "true") return {true};
  if (text == "false") return {false};

  const std::string num(text);
  const bool looks_float = num.find_first_of(".eE") != std::string::npos;
  if (!looks_float) {
    int64_t iv = 0;
    auto res = std::from_chars(num.data(), num.data() + num.size(), iv);
    if (res.ec == std::errc() && res.ptr == num.data() + num.size())
      return {iv};
  }
  double dv = 0;
  auto res = std::from_chars(num.data(), num.data() + num.size(), dv);
  if (res.ec == std::errc() && res.ptr == num.data() + num.size())
    return {dv};
  Fail(line, "cannot parse value '" + num + "'");
}

TomlValue ParseValue(std::string_view text, size_t line) {
  text = Trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') Fail(line, "unterminated array");
    std::vector<TomlValue> items;
    std::string_view body = text.substr(1, text.size() - 2);
    size_t start = 0;
    bool in_string = false;
    int depth = 0;
    for (size_t i = 0; i <= body.size(); ++i) {
      const bool at_end = i == body.size();
      const char c = at_end ? ',' : body[i];
      if (!at_end && c == '"') in_string = !in_string;
      if (!at_end && !in_string && c == '[') ++depth;
      if (!at_end && !in_string && c == ']') --depth;
      if (c == ',' && !in_string && depth == 0) {
        std::string_view item = Trim(body.substr(start, i - start));
        if (!item.empty()) items.push_back(ParseValue(item, line));
        start = i + 1;
      }
    }
    return {items};
  }
  return ParseScalar(text, line);
}

}  // namespace

const std::string &TomlValue::AsString() const {
  if (!IsString()) throw std::runtime_error("toml: expected string value");
  return std::get<std::string>(v);
}

int64_t TomlValue::AsInt() const {
  if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v);
  throw std::runtime_error("toml: expected integer value");
}

double TomlValue::AsDouble() const {
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<int64_t>(v))
    return static_cast<double>(std::get<int64_t>(v));
  throw std::runtime_error("toml: expected number value");
}

bool TomlValue::AsBool() const {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  throw std::runtime_error("toml: expected boolean value");
}

const std::vector<TomlValue> &TomlValue::AsArray() const {
  if (!IsArray()) throw std::runtime_error("toml: expected array value");
  return std::get<std::vector<TomlValue>>(v);
}

std::vector<double> TomlValue::AsDoubleList() const {
  std::vector<double> out;
  if (IsArray()) {
    for (const auto &item : AsArray()) out.push_back(item.AsDouble());
  } else {
    out.push_back(AsDouble());
  }
  return out;
}

std::vector<int64_t> TomlValue::AsIntList() const {
  std::vector<int64_t> out;
  if (IsArray()) {
    for (const auto &item : AsArray()) out.push_back(item.AsInt());
  } else {
    out.push_back(AsInt());
  }
  return out;
}

TomlDoc ParseToml(const std::string &text) {
  TomlDoc doc;
  TomlTable *current = &doc.root;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(StripComment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool is_array = line.size() > 1 && line[1] == '[';
      const size_t open = is_array ? 2 : 1;
      const std::string closer = is_array ? "]]" : "]";
      const size_t close = line.find(closer);
      if (close == std::string_view::npos || close + closer.size() != line.size())
        Fail(line_no, "malformed table header");
      const std::string name{Trim(line.substr(open, close - open))};
      if (name.empty()) Fail(line_no, "empty table name");
      if (is_array) {
        doc.table_arrays[name].emplace_back();
        current = &doc.table_arrays[name].back();
      } else {
        if (doc.tables.count(name)) Fail(line_no, "duplicate table " + name);
        current = &doc.tables[name];
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) Fail(line_no, "expected key = value");
    const std::string key{Trim(line.substr(0, eq))};
    if (key.empty()) Fail(line_no, "empty key");
    if (current->count(key)) Fail(line_no, "duplicate key " + key);
    (*current)[key] = ParseValue(line.substr(eq + 1), line_no);
  }
  return doc;
}

TomlDoc LoadToml(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseToml(ss.str());
}

}  // namespace divdecode
