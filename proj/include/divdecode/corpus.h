// corpus.h
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
// Tokenization, n-gram counting, reference-corpus file I/O, and the lexicon
// behind the synthetic captioning world.  All objects here are immutable
// after construction and safe to share across threads.

#ifndef DIVDECODE_CORPUS_H_
#define DIVDECODE_CORPUS_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace divdecode {

inline constexpr const char *kBos = "<bos>";
inline constexpr const char *kEos = "<eos>";
inline constexpr const char *kUnk = "<unk>";

// A token is a lowercase word with no whitespace.  Captions never contain
// <bos> or <eos>; those are decoder-side sentinels.
using Token = std::string;

struct Caption {
  std::vector<Token> tokens;
  std::optional<double> logprob;  // natural-log model score, if generated

  bool operator==(const Caption &other) const {
    return tokens == other.tokens && logprob == other.logprob;
  }
};

// Space-joins the tokens back into a sentence string.
std::string JoinTokens(const std::vector<Token> &tokens);

struct ContextRefs {
  std::vector<Caption> train_refs;
  std::vector<Caption> eval_refs;

  bool operator==(const ContextRefs &other) const {
    return train_refs == other.train_refs && eval_refs == other.eval_refs;
  }
};

struct Corpus {
  // Keyed by context id; map keeps iteration order canonical.
  std::map<std::string, ContextRefs> contexts;
  // Every train reference, in context-id order.
  std::vector<Caption> all_train;

  void RebuildAllTrain();

  bool operator==(const Corpus &other) const {
    return contexts == other.contexts;
  }
};

// Word roles for the template grammar plus the synonym table that stands in
// for WordNet when merging scene-graph vertices.  Role sets are pairwise
// disjoint; each word belongs to at most one synonym class; relations may be
// two-word items ("next to").
struct Lexicon {
  std::vector<std::string> objects;
  std::vector<std::string> attributes;
  std::vector<std::string> relations;
  std::vector<std::vector<std::string>> synonym_classes;

  // Throws std::runtime_error on any violated invariant.
  void Validate() const;

  bool IsObject(const std::string &w) const;
  bool IsAttribute(const std::string &w) const;
  bool IsRelation(const std::string &w) const;

  // Lexicographically smallest member of w's synonym class; w itself when it
  // belongs to no class.
  const std::string &CanonicalOf(const std::string &w) const;
};

// Lowercases, splits on whitespace runs, strips the punctuation characters
// .,!? from token edges, and drops tokens that become empty.
std::vector<Token> Tokenize(std::string_view line);

// Contiguous n-grams with multiplicity, keyed by the space-joined n-gram.
// Empty when tokens.size() < n.  Throws std::invalid_argument for n < 1.
std::map<std::string, long> CountNgrams(const std::vector<Token> &tokens,
                                        int n);

// JSONL with one object per line:
//   {"context_id": "...", "split": "train"|"eval", "captions": ["...", ...]}
// Captions are raw strings, tokenized on load.  Load errors name the
// offending line number.
Corpus LoadCorpus(const std::string &path);
void SaveCorpus(const Corpus &corpus, const std::string &path);
Corpus ParseCorpusJsonl(std::string_view text);
std::string CorpusToJsonl(const Corpus &corpus);

// Lexicon JSON:
//   {"objects": [...], "attributes": [...], "relations": [...],
//    "synonyms": [[...], ...]}
Lexicon LoadLexicon(const std::string &path);
void SaveLexicon(const Lexicon &lexicon, const std::string &path);

// The lexicon used when none is supplied: a small scene vocabulary with
// synonym classes in every role.
Lexicon DefaultLexicon();

}  // namespace divdecode

#endif  // DIVDECODE_CORPUS_H_
