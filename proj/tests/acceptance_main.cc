// acceptance_main.cc
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
// Integration acceptance suite.  Each criterion prints one PASS/FAIL line;
// the exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "divdecode/harness.h"
#include "divdecode/jacobi.h"
#include "divdecode/world.h"
#include "oracles.h"

using namespace divdecode;
using divdecode::testing::EnumerateTopM;
using divdecode::testing::PlantedTable;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void Expect(bool cond, const std::string &what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double SpearmanRho(const std::vector<double> &x, const std::vector<double> &y) {
  const size_t n = x.size();
  auto ranks = [n](const std::vector<double> &v) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&v](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + j) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Caption Cap(std::initializer_list<const char *> words) {
  Caption c;
  for (const char *w : words) c.tokens.emplace_back(w);
  return c;
}

Corpus MetricToyCorpus() {
  return ParseCorpusJsonl(
      R"({"context_id": "c0", "split": "train", "captions": ["a red cat on a mat", "a cat on a mat"]})" "\n"
      R"({"context_id": "c0", "split": "eval", "captions": ["a red cat sits on a mat"]})" "\n"
      R"({"context_id": "c1", "split": "train", "captions": ["a dog under a tree"]})" "\n"
      R"({"context_id": "c1", "split": "eval", "captions": ["a big dog under a tree"]})" "\n"
      R"({"context_id": "c2", "split": "train", "captions": ["a bird above a house"]})" "\n"
      R"({"context_id": "c2", "split": "eval", "captions": ["a small bird above a house"]})" "\n"
      R"({"context_id": "c3", "split": "train", "captions": ["a horse near a fence"]})" "\n"
      R"({"context_id": "c3", "split": "eval", "captions": ["a horse standing near a fence"]})" "\n");
}

// ---------------------------------------------------------------------------
// 1. Decoder oracle equivalence on 25 randomized strict table models.

Check Criterion1() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  Rng meta(1);
  for (int t = 0; t < 25; ++t) {
    const int n_words = 2 + static_cast<int>(meta.NextBelow(4));  // |V| 3..6
    const int max_len = 2 + static_cast<int>(meta.NextBelow(3));  // 2..4
    const int m = 1 + static_cast<int>(meta.NextBelow(4));        // 1..4
    const double T = t % 2 == 0 ? 1.0 : 0.5;
    Rng rng(meta.NextU64());
    const auto model = PlantedTable(n_words, max_len, m, rng, "c");

    DecodeParams p;
    p.method = Method::kBS;
    p.m = m;
    p.T = T;
    p.max_len = max_len;
    const CaptionSet beam = BeamSearchDecode(*model, "c", p);
    const auto oracle = EnumerateTopM(*model, "c", T, max_len, m);

    c.Expect(beam.captions.size() == oracle.size(),
             "beam size != enumeration size");
    for (size_t i = 0; i < oracle.size() && c.ok; ++i) {
      std::vector<Token> want;
      for (int id : oracle[i].tokens) want.push_back(model->Vocab()[id]);
      c.Expect(beam.captions[i].tokens == want, "beam sequence mismatch");
      c.Expect(*beam.captions[i].logprob == oracle[i].score,
               "beam score mismatch");
    }

    DecodeParams d = p;
    d.method = Method::kDBS;
    d.G = 1;
    d.lambda = t % 3 == 0 ? 0.0 : 1.5;
    const CaptionSet dbs = DiverseBeamSearchDecode(*model, "c", d);
    c.Expect(dbs.captions.size() == beam.captions.size(),
             "DBS(G=1) size != BS size");
    for (size_t i = 0; i < beam.captions.size() && c.ok; ++i) {
      c.Expect(dbs.captions[i].tokens == beam.captions[i].tokens &&
                   *dbs.captions[i].logprob == *beam.captions[i].logprob,
               "DBS(G=1) != BS");
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  c.Expect(secs < 5.0, "runtime " + std::to_string(secs) + "s >= 5s");
  return c;
}

// ---------------------------------------------------------------------------
// 2. Distributional identities and SP chi-square.

Check Criterion2() {
  Check c;
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + rng.NextBelow(7);
    LogitVector v(n);
    for (auto &x : v) x = 12 * (rng.NextDouble() - 0.5);
    DecodeParams sp;
    sp.method = Method::kSP;
    sp.T = 0.25 + 1.5 * rng.NextDouble();
    DecodeParams topk = sp;
    topk.method = Method::kTopK;
    topk.K = static_cast<int>(n);
    DecodeParams topp = sp;
    topp.method = Method::kTopP;
    topp.p = 1.0;
    const auto base = StepDistribution(v, sp);
    const auto k_dist = StepDistribution(v, topk);
    const auto p_dist = StepDistribution(v, topp);
    for (size_t i = 0; i < n; ++i) {
      c.Expect(std::abs(k_dist[i] - base[i]) <= 1e-12, "TOPK(|V|) != SP");
      c.Expect(std::abs(p_dist[i] - base[i]) <= 1e-12, "TOPP(1) != SP");
    }
  }

  // Chi-square at 1e5 draws on a 3-token one-step model, P = (.5, .3, .2).
  std::map<std::string, std::map<std::string, LogitVector>> rows;
  rows["c"]["<bos>"] = {std::log(0.5), std::log(0.3), std::log(0.2)};
  rows["c"]["<bos> a"] = {-100.0, -100.0, 0.0};
  rows["c"]["<bos> b"] = {-100.0, -100.0, 0.0};
  const auto model = MakeTableModel({"a", "b", kEos}, std::move(rows));
  DecodeParams p;
  p.method = Method::kSP;
  p.n_samples = 100000;
  p.max_len = 2;
  p.seed = 20;
  const CaptionSet set = SampleNaive(*model, "c", p);
  long count_a = 0, count_b = 0, count_eos = 0;
  for (const auto &cap : set.captions) {
    if (cap.tokens.empty()) {
      ++count_eos;
    } else if (cap.tokens[0] == "a") {
      ++count_a;
    } else {
      ++count_b;
    }
  }
  const double n = static_cast<double>(p.n_samples);
  const double expected[3] = {0.5 * n, 0.3 * n, 0.2 * n};
  const long observed[3] = {count_a, count_b, count_eos};
  double stat = 0;
  for (int i = 0; i < 3; ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  // chi-square(2) upper 0.001 quantile
  c.Expect(stat < 13.8155,
           "chi-square stat " + std::to_string(stat) + " >= 13.8155");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Metric identities.

Check Criterion3() {
  Check c;
  const Corpus corpus = MetricToyCorpus();
  const IdfTable idf = BuildIdf(corpus);

  const Caption cap = Cap({"a", "red", "cat", "on", "a", "mat"});
  c.Expect(Bleu(cap, {cap}) == 1.0, "bleu(c,{c}) != 1");
  c.Expect(std::abs(CiderD(cap, {cap}, idf) - 10.0) < 1e-9,
           "cider_d(c,{c}) != 10");

  const auto same = SelfCider({cap, cap, cap, cap}, idf);
  c.Expect(std::abs(same.score) < 1e-9, "self_cider(identical) != 0");
  const std::vector<Caption> ortho = {Cap({"cat", "red", "sits", "mat"}),
                                      Cap({"dog", "big", "tree", "under"}),
                                      Cap({"bird", "small", "house", "above"})};
  const auto indep = SelfCider(ortho, idf);
  c.Expect(std::abs(indep.score - 1.0) < 1e-9, "self_cider(orthogonal) != 1");

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a(8, std::vector<double>(8));
    for (int i = 0; i < 8; ++i) {
      for (int j = i; j < 8; ++j) a[i][j] = a[j][i] = 2 * rng.NextDouble() - 1;
    }
    const auto eig = JacobiEigen(a);
    double err = 0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        double sum = 0;
        for (int r = 0; r < 8; ++r)
          sum += eig.values[r] * eig.vectors[r][i] * eig.vectors[r][j];
        err += (sum - a[i][j]) * (sum - a[i][j]);
      }
    }
    c.Expect(std::sqrt(err) < 1e-9, "jacobi reconstruction error >= 1e-9");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 4. AllSPICE properties.

Check Criterion4() {
  Check c;
  const Lexicon lex = DefaultLexicon();
  const std::vector<Caption> refs = {
      Cap({"a", "red", "cat", "on", "a", "mat"}),
      Cap({"a", "big", "dog", "under", "a", "tree"})};

  const Caption covers_cat = Cap({"a", "cat", "on", "a", "mat"});
  const Caption covers_dog = Cap({"a", "big", "dog", "under", "a", "tree"});

  // Duplication invariance.
  const auto base = AllSpice({covers_cat, covers_dog}, refs, lex);
  const auto duped =
      AllSpice({covers_cat, covers_dog, covers_cat, covers_cat}, refs, lex);
  c.Expect(base.f1 == duped.f1 && base.matched == duped.matched,
           "duplication changed AllSPICE");

  // Recall-monotone improvement from a new-correct-tuple caption.
  const auto partial = AllSpice({covers_cat}, refs, lex);
  const auto extended = AllSpice({covers_cat, covers_dog}, refs, lex);
  c.Expect(extended.recall > partial.recall && extended.f1 > partial.f1,
           "new correct tuples did not raise recall/F1");

  // Strict decrease from a wrong-tuple caption.
  const auto noisy =
      AllSpice({covers_cat, Cap({"a", "horse", "inside", "a", "car"})}, refs,
               lex);
  c.Expect(noisy.precision < partial.precision && noisy.f1 < partial.f1,
           "wrong tuples did not lower precision/F1");

  // Singleton AllSPICE = SPICE.
  const auto single = AllSpice({covers_cat}, refs, lex);
  const auto direct = SpiceF1(
      ExtractGraph(covers_cat, lex),
      MergeGraphs({ExtractGraph(refs[0], lex), ExtractGraph(refs[1], lex)}));
  c.Expect(single.f1 == direct.f1 && single.precision == direct.precision &&
               single.recall == direct.recall,
           "singleton AllSPICE != SPICE");
  return c;
}

// ---------------------------------------------------------------------------
// Shared state for criteria 5-8: the default world and sweep.

struct SweepRun {
  double seconds = 0;
  std::vector<MetricReport> rows;
  std::string csv, svg_oracle, svg_allspice;
};

SweepRun RunDefault(const std::string &corpus_path, const std::string &outdir) {
  SweepConfig config;
  config.corpus_path = corpus_path;
  config.methods = DefaultMethodGrids();
  config.seed = 42;
  config.output_dir = outdir;
  SweepRun run;
  const auto start = std::chrono::steady_clock::now();
  run.rows = RunSweep(config, nullptr);
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  run.csv = ReadFile(outdir + "/report.csv");
  run.svg_oracle = ReadFile(outdir + "/tradeoff_oracle_cider.svg");
  run.svg_allspice = ReadFile(outdir + "/tradeoff_allspice.svg");
  return run;
}

// 5. Temperature trend reproduction on the default world.

Check Criterion5(const std::vector<MetricReport> &rows) {
  Check c;
  std::vector<double> t_values, self_cider, div1, mbleu, avg_cider;
  for (const auto &r : rows) {
    if (r.context_id != "ALL" || r.params.method != Method::kSP) continue;
    if (r.params.n_samples != 5) continue;
    t_values.push_back(r.params.T);
    self_cider.push_back(r.self_cider.value_or(-1));
    div1.push_back(r.div1.value_or(-1));
    mbleu.push_back(r.mbleu4.value_or(-1));
    avg_cider.push_back(r.avg_cider.value_or(-1));
  }
  c.Expect(t_values.size() == 9, "expected 9 SP temperature points");
  if (!c.ok) return c;

  const double rho_self = SpearmanRho(t_values, self_cider);
  const double rho_div1 = SpearmanRho(t_values, div1);
  const double rho_mbleu = SpearmanRho(t_values, mbleu);
  c.Expect(rho_self >= 0.95,
           "self_cider Spearman " + std::to_string(rho_self) + " < 0.95");
  c.Expect(rho_div1 >= 0.95,
           "div1 Spearman " + std::to_string(rho_div1) + " < 0.95");
  c.Expect(rho_mbleu <= -0.95,
           "mbleu4 Spearman " + std::to_string(rho_mbleu) + " > -0.95");
  c.Expect(avg_cider.front() > avg_cider.back(),
           "avg_cider(T=0.2) <= avg_cider(T=1.0)");
  return c;
}

// 6. Oracle CIDEr grows with sample size.

Check Criterion6(const Corpus &corpus) {
  Check c;
  const auto model = TrainNgram(corpus, NGramModelParams{});
  const IdfTable idf = BuildIdf(corpus);
  const CaptionMetric cider = [&idf](const Caption &cap,
                                     const std::vector<Caption> &refs) {
    return CiderD(cap, refs, idf);
  };
  for (double T : {0.5, 1.0}) {
    double prev = -1;
    for (int n : {5, 20, 100}) {
      DecodeParams p;
      p.method = Method::kSP;
      p.T = T;
      p.n_samples = n;
      p.seed = 42;
      double mean_oracle = 0;
      for (const auto &[id, refs] : corpus.contexts) {
        const CaptionSet set = DecodeOne(*model, id, p);
        mean_oracle +=
            OracleAndAverage(set.captions, refs.eval_refs, cider).first;
      }
      mean_oracle /= static_cast<double>(corpus.contexts.size());
      c.Expect(mean_oracle >= prev - 1e-12,
               "oracle CIDEr decreased at T=" + std::to_string(T) + " n=" +
                   std::to_string(n));
      prev = mean_oracle;
    }
  }
  return c;
}

// 7. Byte-identical reruns.  8. Performance budget and worker-pool identity.

}  // namespace

int main() {
  std::cout << "acceptance suite\n";
  int failures = 0;
  const auto report = [&failures](int idx, const char *name, const Check &c) {
    std::cout << (c.ok ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": "
              << name;
    if (!c.ok) std::cout << " -- " << c.detail;
    std::cout << '\n' << std::flush;
    failures += c.ok ? 0 : 1;
  };

  report(1, "beam/DBS oracle equivalence on 25 randomized tables",
         Criterion1());
  report(2, "per-step distributional identities and SP chi-square",
         Criterion2());
  report(3, "metric identities (BLEU, CIDEr-D, Self-CIDEr, Jacobi)",
         Criterion3());
  report(4, "AllSPICE set properties", Criterion4());

  // Default world, shared by criteria 5-8.
  const fs::path work = fs::path("/tmp") / "divdecode_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string corpus_path = (work / "world.jsonl").string();
  const World world = SynthesizeWorld(DefaultLexicon(), 200, 6, 42);
  SaveCorpus(world.corpus, corpus_path);

  unsetenv("DIVDECODE_THREADS");
  const SweepRun first = RunDefault(corpus_path, (work / "run1").string());
  report(5, "temperature trend reproduction (SP, 200 contexts)",
         Criterion5(first.rows));
  report(6, "oracle CIDEr non-decreasing in sample size",
         Criterion6(world.corpus));

  {
    Check c;
    const SweepRun second = RunDefault(corpus_path, (work / "run2").string());
    c.Expect(first.csv == second.csv, "CSV bytes differ between runs");
    c.Expect(first.svg_oracle == second.svg_oracle &&
                 first.svg_allspice == second.svg_allspice,
             "SVG bytes differ between runs");
    report(7, "end-to-end determinism (byte-identical CSV and SVG)", c);
  }

  {
    Check c;
    c.Expect(first.seconds < 60.0, "default sweep took " +
                                       std::to_string(first.seconds) +
                                       "s (budget 60s serial)");
    setenv("DIVDECODE_THREADS", "2", 1);
    const SweepRun pooled = RunDefault(corpus_path, (work / "run3").string());
    unsetenv("DIVDECODE_THREADS");
    c.Expect(pooled.csv == first.csv && pooled.svg_oracle == first.svg_oracle,
             "worker-pool run changed output bytes");
    report(8, "performance budget and worker-pool byte identity", c);
    std::cout << "  (default sweep: " << first.seconds << "s serial, "
              << pooled.seconds << "s with 2 workers)\n";
  }

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED"
                              : std::to_string(failures) + " CRITERIA FAILED")
            << '\n';
  return failures;
}
