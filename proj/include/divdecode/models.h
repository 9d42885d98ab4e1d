// models.h
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
// Next-token scoring: the interface every decoder consumes, an exact
// file-defined logit table for oracle tests, and an interpolated n-gram
// mock captioner for tradeoff experiments.  Models are immutable after
// construction; NextScores is a pure function and safe to call from any
// number of threads.

#ifndef DIVDECODE_MODELS_H_
#define DIVDECODE_MODELS_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "divdecode/corpus.h"

namespace divdecode {

// One score (logit) per vocabulary entry; <eos> is always in the vocabulary.
using LogitVector = std::vector<double>;

class ScoringModel {
 public:
  virtual ~ScoringModel() = default;

  virtual const std::vector<Token> &Vocab() const = 0;

  // Logits for the token following `prefix`.  The prefix starts with <bos>
  // and never contains <eos>.  Deterministic: equal arguments yield
  // bit-identical vectors.
  virtual LogitVector NextScores(const std::string &context_id,
                                 const std::vector<Token> &prefix) const = 0;

  int EosId() const;  // index of <eos> in Vocab()
};

// p_i = exp(v_i / T) / sum_j exp(v_j / T), computed max-shifted.
// Throws std::invalid_argument for T <= 0.
std::vector<double> SoftmaxWithTemperature(const LogitVector &v, double T);

// ln of the softmax above, computed as v/T - logsumexp(v/T).
std::vector<double> LogSoftmaxWithTemperature(const LogitVector &v, double T);

struct NGramModelParams {
  int order = 3;
  double add_k = 0.1;
  double beta = 0.7;  // context-interpolation weight in [0, 1]
};

// Exact lookup table keyed by (context, space-joined prefix).  Strict: an
// uncovered key raises "prefix not covered", so decoder oracles can rely on
// the table being exhaustive.
//
// JSON format:
//   {"vocab": ["w1", ..., "<eos>"],
//    "contexts": {"ctx": {"<bos>": [...], "<bos> w1": [...]}}}
// Duplicate object keys anywhere in the file are a load error.
std::unique_ptr<ScoringModel> LoadTableModel(const std::string &path);
std::unique_ptr<ScoringModel> ParseTableModel(const std::string &json_text);
std::unique_ptr<ScoringModel> MakeTableModel(
    std::vector<Token> vocab,
    std::map<std::string, std::map<std::string, LogitVector>> contexts);

// Interpolated add-k n-gram captioner:
//   P(w | h, ctx) = beta * P_ctx(w | h) + (1 - beta) * P_glob(w | h)
// where each component backs off to the longest history with nonzero count
// (down to unigrams) and applies add-k smoothing there.  P_ctx is trained on
// the context's train refs, P_glob on all train refs.  NextScores returns
// ln P, so softmax at T = 1 recovers P exactly.  The vocabulary is the
// sorted set of corpus tokens with <eos> appended.
std::unique_ptr<ScoringModel> TrainNgram(const Corpus &corpus,
                                         const NGramModelParams &params);

}  // namespace divdecode

#endif  // DIVDECODE_MODELS_H_
