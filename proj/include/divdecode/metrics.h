// metrics.h
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
// N-gram accuracy and diversity measures: BLEU, mBLEU, Div-n, vocabulary
// size, %novel, CIDEr-D with corpus idf, oracle/average aggregation, and
// Self-CIDEr from the eigen-spectrum of the pairwise CIDEr kernel.  All
// operations are pure; the idf table is immutable once built.

#ifndef DIVDECODE_METRICS_H_
#define DIVDECODE_METRICS_H_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divdecode/corpus.h"
#include "divdecode/decoders.h"

namespace divdecode {

// idf(g) = ln(N / df(g)) with df clamped to >= 1; a document is one
// context's full reference set (train plus eval).
struct IdfTable {
  std::array<std::map<std::string, double>, 4> idf;  // by n-gram order - 1
  long n_documents = 0;

  double Lookup(int n, const std::string &gram) const;
};

IdfTable BuildIdf(const Corpus &corpus);

// Sentence BLEU with clipped n-gram precisions, no smoothing, and brevity
// penalty exp(min(0, 1 - r/c)) against the closest-length reference (ties
// toward the shorter).  The geometric mean runs over orders with at least
// one candidate n-gram, so a perfect match scores 1 at any length; a zero
// precision at an available order zeroes the score.  Empty candidates score
// zero.
double Bleu(const Caption &candidate, const std::vector<Caption> &refs,
            int max_n = 4);

// Mean BLEU of each caption against the rest of its set; lower = more
// diverse.  Throws std::invalid_argument for sets smaller than 2.
double MBleu(const std::vector<Caption> &set);

// Distinct n-grams across the set divided by the total word count of the
// set; zero when the set has no words.
double DivN(const std::vector<Caption> &set, int n);

// CIDEr-D: tf-idf n-gram cosine with count clipping and Gaussian length
// penalty, averaged over n = 1..4 and references, scaled to [0, 10].
double CiderD(const Caption &candidate, const std::vector<Caption> &refs,
              const IdfTable &idf, double sigma = 6.0);

using CaptionMetric =
    std::function<double(const Caption &, const std::vector<Caption> &)>;

// (max, mean) of metric(c_i, refs) over the set.
std::pair<double, double> OracleAndAverage(const std::vector<Caption> &set,
                                           const std::vector<Caption> &refs,
                                           const CaptionMetric &metric);

struct SelfCiderReport {
  std::vector<std::vector<double>> kernel;  // symmetric, k x k
  std::vector<double> eigenvalues;          // descending
  double score = 0.0;                       // in [0, 1]
};

// Kernel K_ij = symmetrized cider_d(c_i, {c_j}) / 10; score
// = -ln(lambda_1 / sum(lambda)) / ln k, clamped to [0, 1].  Requires k >= 2.
SelfCiderReport SelfCider(const std::vector<Caption> &set,
                          const IdfTable &idf);

// Distinct tokens across every caption of every set.
long VocabSize(const std::vector<CaptionSet> &sets);

// Percentage (0..100) of generated captions whose token sequence does not
// appear among the training references.
double PctNovel(const std::vector<CaptionSet> &sets, const Corpus &corpus);

// One row of the report CSV.  Cells for inapplicable values (parameters the
// method does not use, or set metrics undefined for singleton sets) stay
// empty.
struct MetricReport {
  DecodeParams params;
  std::string context_id;  // "ALL" for corpus aggregates
  std::optional<double> avg_cider, oracle_cider, mbleu4, div1, div2,
      self_cider, allspice;
  std::optional<long> vocab_size;
  std::optional<double> pct_novel;
};

// Exact column order:
// method,T,K,p,m,G,lambda,n_samples,context_id,avg_cider,oracle_cider,
// mbleu4,div1,div2,self_cider,allspice,vocab_size,pct_novel
std::string MetricCsvHeader();
std::string MetricCsvRow(const MetricReport &report);

// All per-context metrics of one caption set against its eval references.
MetricReport ComputeMetrics(const CaptionSet &set,
                            const std::vector<Caption> &eval_refs,
                            const IdfTable &idf, const Lexicon &lexicon);

}  // namespace divdecode

#endif  // DIVDECODE_METRICS_H_
