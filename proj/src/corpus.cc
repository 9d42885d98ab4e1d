// corpus.cc
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

#include "divdecode/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace divdecode {

using nlohmann::json;

namespace {

bool IsEdgePunct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?';
}

void ThrowLine(size_t line_no, const std::string &msg) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + msg);
}

bool ContainsWord(const std::vector<std::string> &words,
                  const std::string &w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

}  // namespace

std::string JoinTokens(const std::vector<Token> &tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void Corpus::RebuildAllTrain() {
  all_train.clear();
  for (const auto &[id, refs] : contexts) {
    all_train.insert(all_train.end(), refs.train_refs.begin(),
                     refs.train_refs.end());
  }
}

std::vector<Token> Tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i == start) continue;
    size_t lo = start, hi = i;
    while (lo < hi && IsEdgePunct(line[lo])) ++lo;
    while (hi > lo && IsEdgePunct(line[hi - 1])) --hi;
    if (lo == hi) continue;
    Token tok;
    tok.reserve(hi - lo);
    for (size_t k = lo; k < hi; ++k)
      tok += static_cast<char>(
          std::tolower(static_cast<unsigned char>(line[k])));
    out.push_back(std::move(tok));
  }
  return out;
}

std::map<std::string, long> CountNgrams(const std::vector<Token> &tokens,
                                        int n) {
  if (n < 1) throw std::invalid_argument("ngram order must be >= 1");
  std::map<std::string, long> counts;
  if (tokens.size() < static_cast<size_t>(n)) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void Lexicon::Validate() const {
  auto check_role = [](const std::vector<std::string> &words,
                       const char *role) {
    for (const auto &w : words) {
      if (w.empty()) throw std::runtime_error(std::string(role) + ": empty word");
      if (w == kBos || w == kEos || w == kUnk || w == "a" || w == "an" ||
          w == "the" || w == "and") {
        throw std::runtime_error(std::string(role) + ": reserved word '" + w +
                                 "'");
      }
    }
  };
  check_role(objects, "objects");
  check_role(attributes, "attributes");
  check_role(relations, "relations");

  std::set<std::string> seen;
  auto check_disjoint = [&seen](const std::vector<std::string> &words,
                                const char *role) {
    for (const auto &w : words) {
      if (!seen.insert(w).second) {
        throw std::runtime_error("word '" + w + "' appears in two role sets (" +
                                 role + ")");
      }
    }
  };
  check_disjoint(objects, "objects");
  check_disjoint(attributes, "attributes");
  check_disjoint(relations, "relations");

  std::set<std::string> in_class;
  for (const auto &cls : synonym_classes) {
    for (const auto &w : cls) {
      if (!in_class.insert(w).second) {
        throw std::runtime_error("word '" + w +
                                 "' appears in two synonym classes");
      }
      if (!seen.count(w)) {
        throw std::runtime_error("synonym '" + w + "' is in no role set");
      }
    }
  }
}

bool Lexicon::IsObject(const std::string &w) const {
  return ContainsWord(objects, w);
}
bool Lexicon::IsAttribute(const std::string &w) const {
  return ContainsWord(attributes, w);
}
bool Lexicon::IsRelation(const std::string &w) const {
  return ContainsWord(relations, w);
}

const std::string &Lexicon::CanonicalOf(const std::string &w) const {
  for (const auto &cls : synonym_classes) {
    if (!ContainsWord(cls, w)) continue;
    const std::string *best = &w;
    for (const auto &member : cls) {
      if (member < *best) best = &member;
    }
    return *best;
  }
  return w;
}

Corpus ParseCorpusJsonl(std::string_view text) {
  Corpus corpus;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      ThrowLine(line_no, std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) ThrowLine(line_no, "expected a JSON object");
    for (const char *field : {"context_id", "split", "captions"}) {
      if (!obj.contains(field))
        ThrowLine(line_no, std::string("missing field '") + field + "'");
    }
    if (!obj["context_id"].is_string())
      ThrowLine(line_no, "'context_id' must be a string");
    if (!obj["split"].is_string())
      ThrowLine(line_no, "'split' must be a string");
    if (!obj["captions"].is_array())
      ThrowLine(line_no, "'captions' must be an array");
    const std::string id = obj["context_id"].get<std::string>();
    const std::string split = obj["split"].get<std::string>();
    if (split != "train" && split != "eval")
      ThrowLine(line_no, "'split' must be \"train\" or \"eval\"");
    auto &refs = corpus.contexts[id];
    auto &bucket = split == "train" ? refs.train_refs : refs.eval_refs;
    for (const auto &cap : obj["captions"]) {
      if (!cap.is_string()) ThrowLine(line_no, "caption entries must be strings");
      Caption c;
      c.tokens = Tokenize(cap.get<std::string>());
      if (c.tokens.empty()) ThrowLine(line_no, "caption tokenizes to nothing");
      for (const auto &t : c.tokens) {
        if (t == kBos || t == kEos)
          ThrowLine(line_no, "caption contains reserved token '" + t + "'");
      }
      bucket.push_back(std::move(c));
    }
  }
  if (corpus.contexts.empty()) throw std::runtime_error("no contexts");
  for (const auto &[id, refs] : corpus.contexts) {
    if (refs.train_refs.empty())
      throw std::runtime_error("context '" + id + "' has no train refs");
    if (refs.eval_refs.empty())
      throw std::runtime_error("context '" + id + "' has no eval refs");
  }
  corpus.RebuildAllTrain();
  return corpus;
}

std::string CorpusToJsonl(const Corpus &corpus) {
  std::string out;
  for (const auto &[id, refs] : corpus.contexts) {
    for (const char *split : {"train", "eval"}) {
      const auto &bucket =
          std::string(split) == "train" ? refs.train_refs : refs.eval_refs;
      json caps = json::array();
      for (const auto &c : bucket) caps.push_back(JoinTokens(c.tokens));
      json obj;
      obj["context_id"] = id;
      obj["split"] = split;
      obj["captions"] = std::move(caps);
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

Corpus LoadCorpus(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCorpusJsonl(ss.str());
}

void SaveCorpus(const Corpus &corpus, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  out << CorpusToJsonl(corpus);
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<std::string> StringList(const json &arr, const char *what) {
  if (!arr.is_array()) throw std::runtime_error(std::string(what) + ": expected array");
  std::vector<std::string> out;
  for (const auto &v : arr) {
    if (!v.is_string())
      throw std::runtime_error(std::string(what) + ": expected string entries");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Lexicon LoadLexicon(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception &e) {
    throw std::runtime_error("lexicon " + path + ": " + e.what());
  }
  Lexicon lex;
  lex.objects = StringList(obj.at("objects"), "objects");
  lex.attributes = StringList(obj.at("attributes"), "attributes");
  lex.relations = StringList(obj.at("relations"), "relations");
  if (obj.contains("synonyms")) {
    for (const auto &cls : obj.at("synonyms"))
      lex.synonym_classes.push_back(StringList(cls, "synonyms"));
  }
  lex.Validate();
  return lex;
}

void SaveLexicon(const Lexicon &lexicon, const std::string &path) {
  json obj;
  obj["objects"] = lexicon.objects;
  obj["attributes"] = lexicon.attributes;
  obj["relations"] = lexicon.relations;
  obj["synonyms"] = lexicon.synonym_classes;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write lexicon file: " + path);
  out << obj.dump(2) << '\n';
}

Lexicon DefaultLexicon() {
  Lexicon lex;
  lex.objects = {"cat",   "kitten", "dog",   "puppy", "man",   "guy",
                 "woman", "lady",   "bird",  "horse", "car",   "bicycle",
                 "bike",  "table",  "chair", "tree",  "house", "ball",
                 "mat",   "rug",    "bench", "fence", "road",  "street"};
  lex.attributes = {"red",    "blue",  "green", "black", "white", "big",
                    "large",  "small", "little", "old",  "young", "fluffy",
                    "shiny",  "tall",  "wooden", "round"};
  lex.relations = {"on",     "under",  "near",   "beside", "next to",
                   "behind", "above",  "inside", "outside", "with",
                   "by",     "facing"};
  lex.synonym_classes = {{"cat", "kitten"},   {"dog", "puppy"},
                         {"man", "guy"},      {"woman", "lady"},
                         {"bicycle", "bike"}, {"mat", "rug"},
                         {"road", "street"},  {"big", "large"},
                         {"small", "little"}, {"beside", "next to"}};
  lex.Validate();
  return lex;
}

}  // namespace divdecode
