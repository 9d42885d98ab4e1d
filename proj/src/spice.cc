// spice.cc
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

#include "divdecode/spice.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace divdecode {

using nlohmann::json;

namespace {

bool IsFunctionWord(const std::string &w) {
  return w == "a" || w == "an" || w == "the" || w == "and";
}

}  // namespace

bool SceneGraph::SubsetOf(const SceneGraph &other) const {
  return std::includes(other.objects.begin(), other.objects.end(),
                       objects.begin(), objects.end()) &&
         std::includes(other.attributes.begin(), other.attributes.end(),
                       attributes.begin(), attributes.end()) &&
         std::includes(other.relations.begin(), other.relations.end(),
                       relations.begin(), relations.end());
}

std::string Canonicalize(const std::string &word, const Lexicon &lexicon) {
  return lexicon.CanonicalOf(word);
}

SceneGraph ExtractGraph(const Caption &caption, const Lexicon &lexicon) {
  const auto &toks = caption.tokens;

  // Pass 1: role-tag each position, joining two-word relations.
  enum class Role { kSkip, kObject, kAttribute, kRelation };
  struct Slot {
    Role role;
    std::string word;  // surface form; two-word relations space-joined
  };
  std::vector<Slot> slots;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (IsFunctionWord(toks[i])) {
      slots.push_back({Role::kSkip, toks[i]});
      continue;
    }
    if (i + 1 < toks.size()) {
      std::string pair = toks[i] + ' ' + toks[i + 1];
      if (lexicon.IsRelation(pair)) {
        slots.push_back({Role::kRelation, pair});
        ++i;
        continue;
      }
    }
    if (lexicon.IsObject(toks[i])) {
      slots.push_back({Role::kObject, toks[i]});
    } else if (lexicon.IsAttribute(toks[i])) {
      slots.push_back({Role::kAttribute, toks[i]});
    } else if (lexicon.IsRelation(toks[i])) {
      slots.push_back({Role::kRelation, toks[i]});
    } else {
      slots.push_back({Role::kSkip, toks[i]});
    }
  }

  SceneGraph graph;
  for (size_t i = 0; i < slots.size(); ++i) {
    switch (slots[i].role) {
      case Role::kObject:
        graph.objects.insert(Canonicalize(slots[i].word, lexicon));
        break;
      case Role::kAttribute:
        if (i + 1 < slots.size() && slots[i + 1].role == Role::kObject) {
          graph.attributes.emplace(Canonicalize(slots[i + 1].word, lexicon),
                                   Canonicalize(slots[i].word, lexicon));
        }
        break;
      case Role::kRelation: {
        const std::string *left = nullptr, *right = nullptr;
        for (size_t k = i; k-- > 0;) {
          if (slots[k].role == Role::kObject) {
            left = &slots[k].word;
            break;
          }
        }
        for (size_t k = i + 1; k < slots.size(); ++k) {
          if (slots[k].role == Role::kObject) {
            right = &slots[k].word;
            break;
          }
        }
        if (left && right) {
          graph.relations.insert({Canonicalize(*left, lexicon),
                                  Canonicalize(slots[i].word, lexicon),
                                  Canonicalize(*right, lexicon)});
        }
        break;
      }
      case Role::kSkip:
        break;
    }
  }
  return graph;
}

SceneGraph MergeGraphs(const std::vector<SceneGraph> &graphs) {
  SceneGraph merged;
  for (const auto &g : graphs) {
    merged.objects.insert(g.objects.begin(), g.objects.end());
    merged.attributes.insert(g.attributes.begin(), g.attributes.end());
    merged.relations.insert(g.relations.begin(), g.relations.end());
  }
  return merged;
}

SpiceScore SpiceF1(const SceneGraph &candidate, const SceneGraph &reference) {
  SpiceScore score;
  score.n_candidate = static_cast<long>(candidate.TupleCount());
  score.n_reference = static_cast<long>(reference.TupleCount());

  long matched = 0;
  for (const auto &o : candidate.objects) matched += reference.objects.count(o);
  for (const auto &a : candidate.attributes)
    matched += reference.attributes.count(a);
  for (const auto &r : candidate.relations)
    matched += reference.relations.count(r);
  score.matched = matched;

  if (score.n_candidate > 0)
    score.precision = static_cast<double>(matched) / score.n_candidate;
  if (score.n_reference > 0)
    score.recall = static_cast<double>(matched) / score.n_reference;
  if (score.precision + score.recall > 0) {
    score.f1 = 2.0 * score.precision * score.recall /
               (score.precision + score.recall);
  }
  return score;
}

SpiceScore AllSpice(const std::vector<Caption> &candidates,
                    const std::vector<Caption> &refs, const Lexicon &lexicon) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  if (refs.empty()) throw std::invalid_argument("empty reference set");
  std::vector<SceneGraph> cand_graphs, ref_graphs;
  cand_graphs.reserve(candidates.size());
  ref_graphs.reserve(refs.size());
  for (const auto &c : candidates) cand_graphs.push_back(ExtractGraph(c, lexicon));
  for (const auto &r : refs) ref_graphs.push_back(ExtractGraph(r, lexicon));
  return SpiceF1(MergeGraphs(cand_graphs), MergeGraphs(ref_graphs));
}

namespace {

json GraphToJson(const SceneGraph &g) {
  json obj;
  obj["objects"] = g.objects;
  json attrs = json::array();
  for (const auto &[o, a] : g.attributes) attrs.push_back({o, a});
  obj["attributes"] = std::move(attrs);
  json rels = json::array();
  for (const auto &r : g.relations) rels.push_back({r[0], r[1], r[2]});
  obj["relations"] = std::move(rels);
  return obj;
}

SceneGraph GraphFromJson(const json &obj) {
  SceneGraph g;
  for (const auto &o : obj.at("objects")) g.objects.insert(o.get<std::string>());
  for (const auto &a : obj.at("attributes")) {
    if (!a.is_array() || a.size() != 2)
      throw std::runtime_error("attribute tuples must be [object, attribute]");
    g.attributes.emplace(a[0].get<std::string>(), a[1].get<std::string>());
  }
  for (const auto &r : obj.at("relations")) {
    if (!r.is_array() || r.size() != 3)
      throw std::runtime_error("relation tuples must be [s, r, o]");
    g.relations.insert({r[0].get<std::string>(), r[1].get<std::string>(),
                        r[2].get<std::string>()});
  }
  return g;
}

}  // namespace

SceneMap LoadSceneMap(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception &e) {
    throw std::runtime_error("scene file " + path + ": " + e.what());
  }
  SceneMap scenes;
  for (const auto &[id, graph] : obj.items()) {
    scenes[id] = GraphFromJson(graph);
  }
  return scenes;
}

void SaveSceneMap(const SceneMap &scenes, const std::string &path) {
  json obj = json::object();
  for (const auto &[id, graph] : scenes) obj[id] = GraphToJson(graph);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << obj.dump(2) << '\n';
}

std::map<std::string, TupleEntry> LoadTupleFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tuple file: " + path);
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception &e) {
    throw std::runtime_error("tuple file " + path + ": " + e.what());
  }
  std::map<std::string, TupleEntry> out;
  for (const auto &[id, entry] : obj.items()) {
    TupleEntry e;
    for (const auto &g : entry.at("candidates")) e.candidates.push_back(GraphFromJson(g));
    for (const auto &g : entry.at("references")) e.references.push_back(GraphFromJson(g));
    out[id] = std::move(e);
  }
  return out;
}

}  // namespace divdecode
