// spice.h
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
// Scene-graph tuple extraction for the template grammar, synonym-aware
// matching, single-caption SPICE, and the AllSPICE set score.  The
// dependency-parse pipeline of the original SPICE is replaced by an exact
// extractor for the grammar the synthetic world generates; pre-parsed tuple
// files are accepted for external caption sources.

#ifndef DIVDECODE_SPICE_H_
#define DIVDECODE_SPICE_H_

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "divdecode/corpus.h"

namespace divdecode {

// All stored words are canonical synonym-class representatives.
struct SceneGraph {
  std::set<std::string> objects;
  std::set<std::pair<std::string, std::string>> attributes;  // (object, attr)
  std::set<std::array<std::string, 3>> relations;  // (subject, rel, object)

  size_t TupleCount() const {
    return objects.size() + attributes.size() + relations.size();
  }
  bool Empty() const { return TupleCount() == 0; }

  bool operator==(const SceneGraph &other) const {
    return objects == other.objects && attributes == other.attributes &&
           relations == other.relations;
  }

  // True when every tuple of this graph appears in `other`.
  bool SubsetOf(const SceneGraph &other) const;
};

struct SpiceScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long matched = 0;
  long n_candidate = 0;
  long n_reference = 0;
};

// Lexicographically smallest member of word's synonym class; identity for
// words in no class.
std::string Canonicalize(const std::string &word, const Lexicon &lexicon);

// Left-to-right scan: lexicon objects become vertices, an attribute token
// immediately before an object attaches to it, and a relation token (two-word
// relations matched first) links its nearest object on each side.  Articles,
// conjunctions, and unknown tokens are skipped; everything stored is
// canonicalized.  Ungrammatical input yields a possibly empty graph.
SceneGraph ExtractGraph(const Caption &caption, const Lexicon &lexicon);

// Per-category set union; canonical forms make the union synonym-aware.
SceneGraph MergeGraphs(const std::vector<SceneGraph> &graphs);

// Tuple-level F-score over the disjoint union of the three categories.
// Empty-vs-empty scores zero.
SpiceScore SpiceF1(const SceneGraph &candidate, const SceneGraph &reference);

// SPICE of the union graph of the candidate set against the union graph of
// the references.
SpiceScore AllSpice(const std::vector<Caption> &candidates,
                    const std::vector<Caption> &refs, const Lexicon &lexicon);

// Scene-graph JSON object (the sidecar schema):
//   {"objects": [...], "attributes": [[obj, attr], ...],
//    "relations": [[s, r, o], ...]}
using SceneMap = std::map<std::string, SceneGraph>;
SceneMap LoadSceneMap(const std::string &path);
void SaveSceneMap(const SceneMap &scenes, const std::string &path);

// Pre-parsed tuple file: {"ctx": {"candidates": [graph...],
// "references": [graph...]}} with graphs in the sidecar schema.
struct TupleEntry {
  std::vector<SceneGraph> candidates;
  std::vector<SceneGraph> references;
};
std::map<std::string, TupleEntry> LoadTupleFile(const std::string &path);

}  // namespace divdecode

#endif  // DIVDECODE_SPICE_H_
