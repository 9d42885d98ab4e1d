// harness.h
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
// Sweep driver, aggregate reporting, CSV/SVG emission, and the command-line
// entry point.  Grid points and contexts may run on a worker pool
// (DIVDECODE_THREADS caps workers, 0 or unset = serial); rows are emitted in
// canonical order (grid point, then context id), so concurrency never
// changes output bytes.

#ifndef DIVDECODE_HARNESS_H_
#define DIVDECODE_HARNESS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "divdecode/corpus.h"
#include "divdecode/decoders.h"
#include "divdecode/metrics.h"
#include "divdecode/models.h"
#include "divdecode/svg.h"

namespace divdecode {

struct ModelSpec {
  enum class Kind { kNgram, kTable };
  Kind kind = Kind::kNgram;
  std::string table_path;  // kTable
  NGramModelParams ngram;  // kNgram
};

// One method block of the sweep grid; list-valued parameters expand as a
// cartesian product in the fixed order n_samples, T, K, p, lambda.
struct MethodGrid {
  Method method = Method::kSP;
  std::vector<double> T{1.0};
  std::vector<int> K;       // required for TOPK
  std::vector<double> p;    // required for TOPP
  int m = 5;                // BS/DBS
  int G = 1;                // DBS
  std::vector<double> lambda{0.0};
  std::vector<int> n_samples{5};
  int max_len = 20;
};

struct SweepConfig {
  std::string corpus_path;
  std::string lexicon_path;  // empty = built-in default lexicon
  ModelSpec model;
  std::vector<MethodGrid> methods;
  uint64_t seed = 42;
  std::string output_dir = "out";
};

// TOML schema (see configs/default_sweep.toml): top-level corpus / lexicon /
// seed / output_dir, a [model] table, and one [[method]] block per grid.
SweepConfig LoadSweepConfig(const std::string &path);

// The built-in experiment preset: SP over the temperature grid, top-K and
// top-p at T=0.75, BS at T=0.75, DBS lambda sweep at T=1, five captions per
// set (about 20 grid points).
std::vector<MethodGrid> DefaultMethodGrids();

std::vector<DecodeParams> ExpandGrid(const std::vector<MethodGrid> &methods,
                                     uint64_t seed);

// Short human-readable label of one grid point ("SP T=0.5 n=5").
std::string GridPointLabel(const DecodeParams &params);

// Decodes every corpus context for every grid point and scores it against
// the eval references: per-context rows plus one corpus aggregate row with
// context_id "ALL" (mean over contexts; vocab_size and pct_novel computed
// corpus-wide).  A context failure aborts its grid point with a single row
// whose context_id is "ERROR".
std::vector<MetricReport> RunSweepGrid(const Corpus &corpus,
                                       const Lexicon &lexicon,
                                       const ScoringModel &model,
                                       const std::vector<DecodeParams> &grid,
                                       std::ostream *log);

std::string ReportsToCsv(const std::vector<MetricReport> &rows);

// Tradeoff points (x = self_cider) from the aggregate rows.
std::vector<TradeoffPoint> AggregateTradeoff(
    const std::vector<MetricReport> &rows, const std::string &y_metric);

// Full file-level sweep: loads everything, runs the grid, writes report.csv,
// tradeoff_oracle_cider.svg and tradeoff_allspice.svg into output_dir.
std::vector<MetricReport> RunSweep(const SweepConfig &config,
                                   std::ostream *log);

// DIVDECODE_THREADS environment variable; 0, 1 or unset mean serial.
int WorkerCount();

// The command-line interface: gen-world, decode, eval, sweep, plot.
// Returns 0 on success, 2 on usage errors, 1 on runtime errors.
int CliMain(int argc, const char *const *argv);

}  // namespace divdecode

#endif  // DIVDECODE_HARNESS_H_
