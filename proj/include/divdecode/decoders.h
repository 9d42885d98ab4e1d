// decoders.h
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
// The five production methods: naive sampling (SP), top-K and top-p
// sampling, beam search (BS), and diverse beam search (DBS).  Every method
// applies temperature to the word posterior and reproduces bit-for-bit
// given (model, params).  Sampling draws one independent PRNG stream per
// (context, sample index), so sample i is identical no matter how many
// samples are requested.

#ifndef DIVDECODE_DECODERS_H_
#define DIVDECODE_DECODERS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "divdecode/corpus.h"
#include "divdecode/models.h"

namespace divdecode {

enum class Method { kSP, kTopK, kTopP, kBS, kDBS };

const char *MethodName(Method m);
Method ParseMethod(const std::string &name);  // accepts any letter case

struct DecodeParams {
  Method method = Method::kSP;
  double T = 1.0;       // softmax temperature, all methods
  int K = 1;            // TOPK: kept tokens
  double p = 1.0;       // TOPP: nucleus mass in (0, 1]
  int m = 1;            // BS/DBS: beam width / list size
  int G = 1;            // DBS: number of groups; m % G == 0
  double lambda = 0.0;  // DBS: diversity penalty, >= 0
  int n_samples = 1;    // sampling methods: set size
  int max_len = 20;
  uint64_t seed = 0;

  // Throws std::invalid_argument on any violated constraint.
  void Validate() const;
};

struct CaptionSet {
  std::string context_id;
  std::vector<Caption> captions;
  DecodeParams params;
};

// The per-step sampling distribution: temperature softmax of the logits,
// then any top-K / top-p truncation with renormalization.  Truncation that
// keeps the whole support returns the softmax unchanged, so TOPK(K=|V|),
// TOPP(p=1) and SP agree exactly.  Boundary ties break toward the lower
// vocabulary index.
std::vector<double> StepDistribution(const LogitVector &logits,
                                     const DecodeParams &params);

CaptionSet SampleNaive(const ScoringModel &model, const std::string &context_id,
                       const DecodeParams &params);
CaptionSet SampleTopK(const ScoringModel &model, const std::string &context_id,
                      const DecodeParams &params);
CaptionSet SampleTopP(const ScoringModel &model, const std::string &context_id,
                      const DecodeParams &params);

// Width-m search over cumulative temperature log-softmax scores.  Finished
// hypotheses (<eos> emitted within the beam, or max_len reached) retire into
// a completed pool; the search ends once m hypotheses are complete and no
// live beam can still reach the pool's worst score.  No length
// normalization.  Ties break toward the lexicographically smaller token-id
// sequence.
CaptionSet BeamSearchDecode(const ScoringModel &model,
                            const std::string &context_id,
                            const DecodeParams &params);

// m beams in G groups of m/G.  Groups expand in fixed order at each time
// step; group g's candidate scores are penalized by lambda times the number
// of times the candidate token was already selected at this step by groups
// before g.  Penalties accumulate into the selection score only; the output
// is every group's completed list, sorted by unpenalized score.
CaptionSet DiverseBeamSearchDecode(const ScoringModel &model,
                                   const std::string &context_id,
                                   const DecodeParams &params);

// Dispatch on params.method.
CaptionSet DecodeOne(const ScoringModel &model, const std::string &context_id,
                     const DecodeParams &params);

// One CaptionSet per corpus context, each decoded with per-context seed
// = params.seed + fnv1a(context_id), so outputs do not depend on context
// order.  Per-context failures are aggregated into one error naming every
// failed context.
std::vector<CaptionSet> Decode(const ScoringModel &model, const Corpus &corpus,
                               const DecodeParams &params);

// JSONL: {"context_id": ..., "params": {...},
//         "captions": [{"tokens": [...], "logprob": ...}, ...]}
void SaveCaptionSets(const std::vector<CaptionSet> &sets,
                     const std::string &path);
std::vector<CaptionSet> LoadCaptionSets(const std::string &path);

}  // namespace divdecode

#endif  // DIVDECODE_DECODERS_H_
