// harness.cc
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

#include "divdecode/harness.h"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "divdecode/num_format.h"
#include "divdecode/spice.h"
#include "divdecode/toml_lite.h"

namespace divdecode {

namespace {

void ParallelFor(size_t n, int workers,
                 const std::function<void(size_t)> &fn) {
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const size_t count = std::min<size_t>(workers, n);
  for (size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto &t : pool) t.join();
}

std::vector<int> ToInts(const std::vector<int64_t> &xs) {
  std::vector<int> out;
  for (int64_t x : xs) out.push_back(static_cast<int>(x));
  return out;
}

}  // namespace

int WorkerCount() {
  const char *env = std::getenv("DIVDECODE_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v <= 1 ? 1 : v;
}

std::vector<MethodGrid> DefaultMethodGrids() {
  std::vector<MethodGrid> grids;
  MethodGrid sp;
  sp.method = Method::kSP;
  sp.T = {0.2, 0.33, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 1.0};
  grids.push_back(sp);

  MethodGrid topk;
  topk.method = Method::kTopK;
  topk.K = {1, 3, 5, 10};
  topk.T = {0.75};
  grids.push_back(topk);

  MethodGrid topp;
  topp.method = Method::kTopP;
  topp.p = {0.5, 0.8, 0.9, 1.0};
  topp.T = {0.75};
  grids.push_back(topp);

  MethodGrid bs;
  bs.method = Method::kBS;
  bs.m = 5;
  bs.T = {0.75};
  grids.push_back(bs);

  MethodGrid dbs;
  dbs.method = Method::kDBS;
  dbs.m = 5;
  dbs.G = 5;
  dbs.lambda = {0.0, 0.3, 1.0, 3.0};
  dbs.T = {1.0};
  grids.push_back(dbs);
  return grids;
}

std::vector<DecodeParams> ExpandGrid(const std::vector<MethodGrid> &methods,
                                     uint64_t seed) {
  std::vector<DecodeParams> grid;
  for (const auto &mg : methods) {
    if (mg.T.empty()) throw std::invalid_argument("empty T grid");
    if (mg.method == Method::kTopK && mg.K.empty())
      throw std::invalid_argument("TOPK grid needs K values");
    if (mg.method == Method::kTopP && mg.p.empty())
      throw std::invalid_argument("TOPP grid needs p values");

    const std::vector<int> k_list =
        mg.method == Method::kTopK ? mg.K : std::vector<int>{1};
    const std::vector<double> p_list =
        mg.method == Method::kTopP ? mg.p : std::vector<double>{1.0};
    const std::vector<double> lambda_list =
        mg.method == Method::kDBS ? mg.lambda : std::vector<double>{0.0};
    const bool sampling = mg.method == Method::kSP ||
                          mg.method == Method::kTopK ||
                          mg.method == Method::kTopP;
    const std::vector<int> n_list = sampling ? mg.n_samples : std::vector<int>{1};
    if (sampling && n_list.empty())
      throw std::invalid_argument("sampling grid needs n_samples values");

    for (int n : n_list) {
      for (double t : mg.T) {
        for (int k : k_list) {
          for (double pv : p_list) {
            for (double lam : lambda_list) {
              DecodeParams params;
              params.method = mg.method;
              params.T = t;
              params.K = k;
              params.p = pv;
              params.m = mg.m;
              params.G = mg.method == Method::kDBS ? mg.G : 1;
              params.lambda = lam;
              params.n_samples = n;
              params.max_len = mg.max_len;
              params.seed = seed;
              params.Validate();
              grid.push_back(params);
            }
          }
        }
      }
    }
  }
  return grid;
}

std::string GridPointLabel(const DecodeParams &p) {
  std::string label = MethodName(p.method);
  switch (p.method) {
    case Method::kTopK:
      label += " K=" + std::to_string(p.K);
      break;
    case Method::kTopP:
      label += " p=" + FormatShortest(p.p);
      break;
    case Method::kBS:
      label += " m=" + std::to_string(p.m);
      break;
    case Method::kDBS:
      label += " m=" + std::to_string(p.m) + " G=" + std::to_string(p.G) +
               " lam=" + FormatShortest(p.lambda);
      break;
    case Method::kSP:
      break;
  }
  label += " T=" + FormatShortest(p.T);
  if (p.method == Method::kSP || p.method == Method::kTopK ||
      p.method == Method::kTopP) {
    label += " n=" + std::to_string(p.n_samples);
  }
  return label;
}

namespace {

std::optional<double> MeanOf(
    const std::vector<MetricReport> &rows,
    std::optional<double> MetricReport::*field) {
  double sum = 0;
  long count = 0;
  for (const auto &r : rows) {
    if (r.*field) {
      sum += *(r.*field);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace

std::vector<MetricReport> RunSweepGrid(const Corpus &corpus,
                                       const Lexicon &lexicon,
                                       const ScoringModel &model,
                                       const std::vector<DecodeParams> &grid,
                                       std::ostream *log) {
  std::vector<std::string> context_ids;
  for (const auto &[id, refs] : corpus.contexts) context_ids.push_back(id);
  const IdfTable idf = BuildIdf(corpus);
  const int workers = WorkerCount();
  if (log) {
    *log << "grid: " << grid.size() << " points x " << context_ids.size()
         << " contexts\n";
  }

  std::vector<MetricReport> rows;
  for (const auto &params : grid) {
    std::vector<CaptionSet> sets(context_ids.size());
    std::vector<MetricReport> ctx_rows(context_ids.size());
    std::vector<std::string> errors(context_ids.size());

    ParallelFor(context_ids.size(), workers, [&](size_t i) {
      const std::string &id = context_ids[i];
      try {
        sets[i] = DecodeOne(model, id, params);
        ctx_rows[i] =
            ComputeMetrics(sets[i], corpus.contexts.at(id).eval_refs, idf,
                           lexicon);
        ctx_rows[i].pct_novel = PctNovel({sets[i]}, corpus);
      } catch (const std::exception &e) {
        errors[i] = e.what();
      }
    });

    std::string error_text;
    for (size_t i = 0; i < errors.size(); ++i) {
      if (errors[i].empty()) continue;
      if (!error_text.empty()) error_text += "; ";
      error_text += context_ids[i] + ": " + errors[i];
    }
    if (!error_text.empty()) {
      if (log) {
        *log << "grid point '" << GridPointLabel(params)
             << "' failed: " << error_text << '\n';
      }
      MetricReport err;
      err.params = params;
      err.context_id = "ERROR";
      rows.push_back(std::move(err));
      continue;
    }

    rows.insert(rows.end(), ctx_rows.begin(), ctx_rows.end());

    MetricReport agg;
    agg.params = params;
    agg.context_id = "ALL";
    agg.avg_cider = MeanOf(ctx_rows, &MetricReport::avg_cider);
    agg.oracle_cider = MeanOf(ctx_rows, &MetricReport::oracle_cider);
    agg.mbleu4 = MeanOf(ctx_rows, &MetricReport::mbleu4);
    agg.div1 = MeanOf(ctx_rows, &MetricReport::div1);
    agg.div2 = MeanOf(ctx_rows, &MetricReport::div2);
    agg.self_cider = MeanOf(ctx_rows, &MetricReport::self_cider);
    agg.allspice = MeanOf(ctx_rows, &MetricReport::allspice);
    agg.vocab_size = VocabSize(sets);
    agg.pct_novel = PctNovel(sets, corpus);
    rows.push_back(std::move(agg));
  }
  return rows;
}

std::string ReportsToCsv(const std::vector<MetricReport> &rows) {
  std::string csv = MetricCsvHeader();
  csv += '\n';
  for (const auto &r : rows) {
    csv += MetricCsvRow(r);
    csv += '\n';
  }
  return csv;
}

std::vector<TradeoffPoint> AggregateTradeoff(
    const std::vector<MetricReport> &rows, const std::string &y_metric) {
  std::vector<TradeoffPoint> points;
  for (const auto &r : rows) {
    if (r.context_id != "ALL" || !r.self_cider) continue;
    std::optional<double> y;
    if (y_metric == "oracle_cider") y = r.oracle_cider;
    else if (y_metric == "avg_cider") y = r.avg_cider;
    else if (y_metric == "allspice") y = r.allspice;
    else throw std::invalid_argument("unknown tradeoff metric: " + y_metric);
    if (!y) continue;
    points.push_back({GridPointLabel(r.params), MethodName(r.params.method),
                      *r.self_cider, *y});
  }
  return points;
}

SweepConfig LoadSweepConfig(const std::string &path) {
  const TomlDoc doc = LoadToml(path);
  SweepConfig config;
  auto root = doc.root;
  if (!root.count("corpus"))
    throw std::runtime_error(path + ": missing 'corpus'");
  config.corpus_path = root.at("corpus").AsString();
  if (root.count("lexicon")) config.lexicon_path = root.at("lexicon").AsString();
  if (root.count("seed"))
    config.seed = static_cast<uint64_t>(root.at("seed").AsInt());
  if (root.count("output_dir"))
    config.output_dir = root.at("output_dir").AsString();

  if (doc.tables.count("model")) {
    const TomlTable &model = doc.tables.at("model");
    const std::string type =
        model.count("type") ? model.at("type").AsString() : "ngram";
    if (type == "table") {
      config.model.kind = ModelSpec::Kind::kTable;
      config.model.table_path = model.at("path").AsString();
    } else if (type == "ngram") {
      config.model.kind = ModelSpec::Kind::kNgram;
      if (model.count("order"))
        config.model.ngram.order = static_cast<int>(model.at("order").AsInt());
      if (model.count("add_k"))
        config.model.ngram.add_k = model.at("add_k").AsDouble();
      if (model.count("beta"))
        config.model.ngram.beta = model.at("beta").AsDouble();
    } else {
      throw std::runtime_error(path + ": unknown model type '" + type + "'");
    }
  }

  if (doc.table_arrays.count("method")) {
    for (const TomlTable &mt : doc.table_arrays.at("method")) {
      MethodGrid mg;
      mg.method = ParseMethod(mt.at("name").AsString());
      if (mt.count("T")) mg.T = mt.at("T").AsDoubleList();
      if (mt.count("K")) mg.K = ToInts(mt.at("K").AsIntList());
      if (mt.count("p")) mg.p = mt.at("p").AsDoubleList();
      if (mt.count("m")) mg.m = static_cast<int>(mt.at("m").AsInt());
      if (mt.count("G")) mg.G = static_cast<int>(mt.at("G").AsInt());
      if (mt.count("lambda")) mg.lambda = mt.at("lambda").AsDoubleList();
      if (mt.count("n_samples"))
        mg.n_samples = ToInts(mt.at("n_samples").AsIntList());
      if (mt.count("max_len"))
        mg.max_len = static_cast<int>(mt.at("max_len").AsInt());
      config.methods.push_back(std::move(mg));
    }
  }
  if (config.methods.empty()) config.methods = DefaultMethodGrids();
  return config;
}

std::vector<MetricReport> RunSweep(const SweepConfig &config,
                                   std::ostream *log) {
  const Corpus corpus = LoadCorpus(config.corpus_path);
  const Lexicon lexicon = config.lexicon_path.empty()
                              ? DefaultLexicon()
                              : LoadLexicon(config.lexicon_path);
  std::unique_ptr<ScoringModel> model;
  if (config.model.kind == ModelSpec::Kind::kTable) {
    model = LoadTableModel(config.model.table_path);
  } else {
    model = TrainNgram(corpus, config.model.ngram);
  }
  const auto grid = ExpandGrid(config.methods, config.seed);

  const auto rows = RunSweepGrid(corpus, lexicon, *model, grid, log);

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const std::string csv_path =
      (fs::path(config.output_dir) / "report.csv").string();
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << ReportsToCsv(rows);
  csv.close();

  for (const char *metric : {"oracle_cider", "allspice"}) {
    const auto points = AggregateTradeoff(rows, metric);
    if (points.empty()) continue;
    const std::string svg_path =
        (fs::path(config.output_dir) / (std::string("tradeoff_") + metric +
                                        ".svg"))
            .string();
    EmitTradeoffSvg(points, "self_cider", metric, svg_path);
  }
  return rows;
}

}  // namespace divdecode
