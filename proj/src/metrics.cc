// metrics.cc
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

#include "divdecode/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "divdecode/jacobi.h"
#include "divdecode/num_format.h"
#include "divdecode/spice.h"

namespace divdecode {

double IdfTable::Lookup(int n, const std::string &gram) const {
  const auto &table = idf.at(n - 1);
  auto it = table.find(gram);
  if (it != table.end()) return it->second;
  // Unseen n-gram: df clamps to 1.
  return std::log(static_cast<double>(n_documents));
}

IdfTable BuildIdf(const Corpus &corpus) {
  if (corpus.contexts.empty()) throw std::invalid_argument("empty corpus");
  IdfTable table;
  table.n_documents = static_cast<long>(corpus.contexts.size());
  std::array<std::map<std::string, long>, 4> df;
  for (const auto &[id, refs] : corpus.contexts) {
    std::array<std::set<std::string>, 4> seen;
    for (const auto &bucket : {&refs.train_refs, &refs.eval_refs}) {
      for (const auto &cap : *bucket) {
        for (int n = 1; n <= 4; ++n) {
          for (const auto &[gram, count] : CountNgrams(cap.tokens, n))
            seen[n - 1].insert(gram);
        }
      }
    }
    for (int n = 0; n < 4; ++n) {
      for (const auto &gram : seen[n]) ++df[n][gram];
    }
  }
  const double log_n = std::log(static_cast<double>(table.n_documents));
  for (int n = 0; n < 4; ++n) {
    for (const auto &[gram, count] : df[n])
      table.idf[n][gram] = log_n - std::log(static_cast<double>(count));
  }
  return table;
}

double Bleu(const Caption &candidate, const std::vector<Caption> &refs,
            int max_n) {
  if (refs.empty()) throw std::invalid_argument("bleu needs references");
  const long c_len = static_cast<long>(candidate.tokens.size());
  if (c_len == 0) return 0.0;

  // Closest reference length; ties toward the shorter reference.
  long r_len = static_cast<long>(refs[0].tokens.size());
  for (const auto &r : refs) {
    const long len = static_cast<long>(r.tokens.size());
    if (std::abs(len - c_len) < std::abs(r_len - c_len) ||
        (std::abs(len - c_len) == std::abs(r_len - c_len) && len < r_len)) {
      r_len = len;
    }
  }

  double log_prec_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand_counts = CountNgrams(candidate.tokens, n);
    long total = 0;
    for (const auto &[gram, count] : cand_counts) total += count;
    if (total == 0) break;  // shorter orders only
    long clipped = 0;
    for (const auto &[gram, count] : cand_counts) {
      long best_ref = 0;
      for (const auto &r : refs) {
        const auto rc = CountNgrams(r.tokens, n);
        auto it = rc.find(gram);
        if (it != rc.end()) best_ref = std::max(best_ref, it->second);
      }
      clipped += std::min(count, best_ref);
    }
    if (clipped == 0) return 0.0;
    log_prec_sum += std::log(static_cast<double>(clipped) / total);
    ++orders;
  }
  if (orders == 0) return 0.0;

  const double bp = std::exp(
      std::min(0.0, 1.0 - static_cast<double>(r_len) / c_len));
  return bp * std::exp(log_prec_sum / orders);
}

double MBleu(const std::vector<Caption> &set) {
  if (set.size() < 2)
    throw std::invalid_argument("mbleu needs at least 2 captions");
  double sum = 0;
  for (size_t i = 0; i < set.size(); ++i) {
    std::vector<Caption> rest;
    rest.reserve(set.size() - 1);
    for (size_t j = 0; j < set.size(); ++j) {
      if (j != i) rest.push_back(set[j]);
    }
    sum += Bleu(set[i], rest);
  }
  return sum / static_cast<double>(set.size());
}

double DivN(const std::vector<Caption> &set, int n) {
  if (set.empty()) throw std::invalid_argument("div_n needs captions");
  std::set<std::string> distinct;
  long total_words = 0;
  for (const auto &cap : set) {
    total_words += static_cast<long>(cap.tokens.size());
    for (const auto &[gram, count] : CountNgrams(cap.tokens, n))
      distinct.insert(gram);
  }
  if (total_words == 0) return 0.0;
  return static_cast<double>(distinct.size()) / total_words;
}

namespace {

// tf-idf vector of one caption, per n-gram order.
struct CiderVec {
  std::array<std::map<std::string, double>, 4> weighted;
  std::array<double, 4> norm{};
  long length = 0;
};

CiderVec BuildCiderVec(const Caption &cap, const IdfTable &idf) {
  CiderVec vec;
  vec.length = static_cast<long>(cap.tokens.size());
  for (int n = 1; n <= 4; ++n) {
    double sq = 0;
    for (const auto &[gram, count] : CountNgrams(cap.tokens, n)) {
      const double w = count * idf.Lookup(n, gram);
      vec.weighted[n - 1][gram] = w;
      sq += w * w;
    }
    vec.norm[n - 1] = std::sqrt(sq);
  }
  return vec;
}

// Clipped tf-idf cosine per order, times the Gaussian length penalty.
std::array<double, 4> CiderSim(const CiderVec &cand, const CiderVec &ref,
                               double sigma) {
  const double delta = static_cast<double>(cand.length - ref.length);
  const double gauss = std::exp(-delta * delta / (2.0 * sigma * sigma));
  std::array<double, 4> val{};
  for (int n = 0; n < 4; ++n) {
    double dot = 0;
    for (const auto &[gram, wc] : cand.weighted[n]) {
      auto it = ref.weighted[n].find(gram);
      if (it == ref.weighted[n].end()) continue;
      dot += std::min(wc, it->second) * it->second;
    }
    if (cand.norm[n] > 0 && ref.norm[n] > 0)
      val[n] = gauss * dot / (cand.norm[n] * ref.norm[n]);
  }
  return val;
}

double CiderFromVecs(const CiderVec &cand, const std::vector<CiderVec> &refs,
                     double sigma) {
  std::array<double, 4> acc{};
  for (const auto &ref : refs) {
    const auto val = CiderSim(cand, ref, sigma);
    for (int n = 0; n < 4; ++n) acc[n] += val[n];
  }
  double score = 0;
  for (int n = 0; n < 4; ++n) score += acc[n] / refs.size();
  return 10.0 * score / 4.0;
}

}  // namespace

double CiderD(const Caption &candidate, const std::vector<Caption> &refs,
              const IdfTable &idf, double sigma) {
  if (refs.empty()) throw std::invalid_argument("cider needs references");
  const CiderVec cand = BuildCiderVec(candidate, idf);
  std::vector<CiderVec> ref_vecs;
  ref_vecs.reserve(refs.size());
  for (const auto &r : refs) ref_vecs.push_back(BuildCiderVec(r, idf));
  return CiderFromVecs(cand, ref_vecs, sigma);
}

std::pair<double, double> OracleAndAverage(const std::vector<Caption> &set,
                                           const std::vector<Caption> &refs,
                                           const CaptionMetric &metric) {
  if (set.empty()) throw std::invalid_argument("empty caption set");
  double best = 0, sum = 0;
  bool first = true;
  for (const auto &cap : set) {
    const double v = metric(cap, refs);
    best = first ? v : std::max(best, v);
    sum += v;
    first = false;
  }
  return {best, sum / static_cast<double>(set.size())};
}

SelfCiderReport SelfCider(const std::vector<Caption> &set,
                          const IdfTable &idf) {
  const size_t k = set.size();
  if (k < 2) throw std::invalid_argument("self_cider needs at least 2 captions");

  std::vector<CiderVec> vecs;
  vecs.reserve(k);
  for (const auto &cap : set) vecs.push_back(BuildCiderVec(cap, idf));

  SelfCiderReport report;
  report.kernel.assign(k, std::vector<double>(k, 0.0));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      report.kernel[i][j] = CiderFromVecs(vecs[i], {vecs[j]}, 6.0) / 10.0;
    }
  }
  // CIDEr-D clipping is directionally asymmetric; symmetrize.
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      const double avg = 0.5 * (report.kernel[i][j] + report.kernel[j][i]);
      report.kernel[i][j] = avg;
      report.kernel[j][i] = avg;
    }
  }

  report.eigenvalues = JacobiEigen(report.kernel).values;
  double trace = 0;
  for (double e : report.eigenvalues) trace += e;
  const double top = report.eigenvalues.empty() ? 0.0 : report.eigenvalues[0];
  if (trace <= 0 || top <= 0) {
    report.score = 0.0;  // degenerate kernel (e.g. all-empty captions)
    return report;
  }
  const double raw = -std::log(top / trace) / std::log(static_cast<double>(k));
  report.score = std::clamp(raw, 0.0, 1.0);
  return report;
}

long VocabSize(const std::vector<CaptionSet> &sets) {
  if (sets.empty()) throw std::invalid_argument("no caption sets");
  std::set<Token> vocab;
  for (const auto &set : sets) {
    for (const auto &cap : set.captions)
      vocab.insert(cap.tokens.begin(), cap.tokens.end());
  }
  return static_cast<long>(vocab.size());
}

double PctNovel(const std::vector<CaptionSet> &sets, const Corpus &corpus) {
  if (sets.empty()) throw std::invalid_argument("no caption sets");
  std::set<std::vector<Token>> train;
  for (const auto &cap : corpus.all_train) train.insert(cap.tokens);
  long total = 0, novel = 0;
  for (const auto &set : sets) {
    for (const auto &cap : set.captions) {
      ++total;
      if (!train.count(cap.tokens)) ++novel;
    }
  }
  if (total == 0) return 0.0;
  return 100.0 * novel / total;
}

std::string MetricCsvHeader() {
  return "method,T,K,p,m,G,lambda,n_samples,context_id,avg_cider,oracle_cider,"
         "mbleu4,div1,div2,self_cider,allspice,vocab_size,pct_novel";
}

namespace {

std::string OptCell(const std::optional<double> &v) {
  return v ? FormatFixed(*v, 6) : std::string();
}

}  // namespace

std::string MetricCsvRow(const MetricReport &r) {
  const DecodeParams &p = r.params;
  const bool sampling = p.method == Method::kSP || p.method == Method::kTopK ||
                        p.method == Method::kTopP;
  std::string row = MethodName(p.method);
  row += ',';
  row += FormatShortest(p.T);
  row += ',';
  if (p.method == Method::kTopK) row += std::to_string(p.K);
  row += ',';
  if (p.method == Method::kTopP) row += FormatShortest(p.p);
  row += ',';
  if (p.method == Method::kBS || p.method == Method::kDBS)
    row += std::to_string(p.m);
  row += ',';
  if (p.method == Method::kDBS) row += std::to_string(p.G);
  row += ',';
  if (p.method == Method::kDBS) row += FormatShortest(p.lambda);
  row += ',';
  if (sampling) row += std::to_string(p.n_samples);
  row += ',';
  row += r.context_id;
  for (const auto *cell :
       {&r.avg_cider, &r.oracle_cider, &r.mbleu4, &r.div1, &r.div2,
        &r.self_cider, &r.allspice}) {
    row += ',';
    row += OptCell(*cell);
  }
  row += ',';
  if (r.vocab_size) row += std::to_string(*r.vocab_size);
  row += ',';
  row += OptCell(r.pct_novel);
  return row;
}

MetricReport ComputeMetrics(const CaptionSet &set,
                            const std::vector<Caption> &eval_refs,
                            const IdfTable &idf, const Lexicon &lexicon) {
  if (set.captions.empty())
    throw std::runtime_error("empty caption set for context " + set.context_id);
  MetricReport report;
  report.params = set.params;
  report.context_id = set.context_id;

  const auto [oracle, avg] = OracleAndAverage(
      set.captions, eval_refs,
      [&idf](const Caption &c, const std::vector<Caption> &refs) {
        return CiderD(c, refs, idf);
      });
  report.oracle_cider = oracle;
  report.avg_cider = avg;
  report.div1 = DivN(set.captions, 1);
  report.div2 = DivN(set.captions, 2);
  if (set.captions.size() >= 2) {
    report.mbleu4 = MBleu(set.captions);
    report.self_cider = SelfCider(set.captions, idf).score;
  }
  report.allspice = AllSpice(set.captions, eval_refs, lexicon).f1;
  report.vocab_size = VocabSize({set});
  return report;
}

}  // namespace divdecode
