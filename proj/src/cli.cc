// cli.cc
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

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "divdecode/harness.h"
#include "divdecode/num_format.h"
#include "divdecode/spice.h"
#include "divdecode/world.h"

namespace divdecode {

namespace {

constexpr int kOk = 0, kRuntimeError = 1, kUsageError = 2;

struct GenWorldArgs {
  std::string lexicon_path;
  int contexts = 200;
  int refs = 6;
  uint64_t seed = 42;
  std::string out = "world.jsonl";
  std::string scenes = "scenes.json";
  std::string save_lexicon;
};

int RunGenWorld(const GenWorldArgs &args) {
  const Lexicon lexicon = args.lexicon_path.empty()
                              ? DefaultLexicon()
                              : LoadLexicon(args.lexicon_path);
  const World world =
      SynthesizeWorld(lexicon, args.contexts, args.refs, args.seed);
  SaveCorpus(world.corpus, args.out);
  SaveSceneMap(world.scenes, args.scenes);
  if (!args.save_lexicon.empty()) SaveLexicon(lexicon, args.save_lexicon);
  std::cerr << "wrote " << world.corpus.contexts.size() << " contexts to "
            << args.out << " (scenes: " << args.scenes << ")\n";
  return kOk;
}

struct DecodeArgs {
  std::string corpus_path;
  std::string table_path;
  NGramModelParams ngram;
  std::string method = "SP";
  DecodeParams params;
  std::string out = "captions.jsonl";
};

int RunDecode(const DecodeArgs &args) {
  const Corpus corpus = LoadCorpus(args.corpus_path);
  std::unique_ptr<ScoringModel> model;
  if (!args.table_path.empty()) {
    model = LoadTableModel(args.table_path);
  } else {
    model = TrainNgram(corpus, args.ngram);
  }
  DecodeParams params = args.params;
  params.method = ParseMethod(args.method);
  params.Validate();
  const auto sets = Decode(*model, corpus, params);
  SaveCaptionSets(sets, args.out);
  std::cerr << "wrote " << sets.size() << " caption sets to " << args.out
            << '\n';
  return kOk;
}

struct EvalArgs {
  std::string captions_path;
  std::string corpus_path;
  std::string lexicon_path;
  std::string out = "report.csv";
};

int RunEval(const EvalArgs &args) {
  const Corpus corpus = LoadCorpus(args.corpus_path);
  const Lexicon lexicon = args.lexicon_path.empty()
                              ? DefaultLexicon()
                              : LoadLexicon(args.lexicon_path);
  const IdfTable idf = BuildIdf(corpus);
  const auto sets = LoadCaptionSets(args.captions_path);
  if (sets.empty()) throw std::runtime_error("no caption sets in " +
                                             args.captions_path);

  // Group sets by their parameter echo so mixed files aggregate per config.
  std::map<std::string, std::vector<const CaptionSet *>> by_config;
  for (const auto &set : sets) by_config[GridPointLabel(set.params)].push_back(&set);

  std::vector<MetricReport> rows;
  for (const auto &[label, group] : by_config) {
    std::vector<MetricReport> ctx_rows;
    std::vector<CaptionSet> copies;
    for (const CaptionSet *set : group) {
      auto it = corpus.contexts.find(set->context_id);
      if (it == corpus.contexts.end())
        throw std::runtime_error("captions reference unknown context '" +
                                 set->context_id + "'");
      MetricReport r = ComputeMetrics(*set, it->second.eval_refs, idf, lexicon);
      r.pct_novel = PctNovel({*set}, corpus);
      ctx_rows.push_back(std::move(r));
      copies.push_back(*set);
    }
    rows.insert(rows.end(), ctx_rows.begin(), ctx_rows.end());
    MetricReport agg;
    agg.params = group.front()->params;
    agg.context_id = "ALL";
    auto mean = [&ctx_rows](std::optional<double> MetricReport::*field) {
      double sum = 0;
      long n = 0;
      for (const auto &r : ctx_rows) {
        if (r.*field) {
          sum += *(r.*field);
          ++n;
        }
      }
      return n ? std::optional<double>(sum / n) : std::nullopt;
    };
    agg.avg_cider = mean(&MetricReport::avg_cider);
    agg.oracle_cider = mean(&MetricReport::oracle_cider);
    agg.mbleu4 = mean(&MetricReport::mbleu4);
    agg.div1 = mean(&MetricReport::div1);
    agg.div2 = mean(&MetricReport::div2);
    agg.self_cider = mean(&MetricReport::self_cider);
    agg.allspice = mean(&MetricReport::allspice);
    agg.vocab_size = VocabSize(copies);
    agg.pct_novel = PctNovel(copies, corpus);
    rows.push_back(std::move(agg));
  }

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + args.out);
  out << ReportsToCsv(rows);
  std::cerr << "wrote " << rows.size() << " rows to " << args.out << '\n';
  return kOk;
}

struct PlotArgs {
  std::string csv_path;
  std::string x = "self_cider";
  std::string y = "oracle_cider";
  std::string out = "plot.svg";
};

int RunPlot(const PlotArgs &args) {
  std::ifstream in(args.csv_path);
  if (!in) throw std::runtime_error("cannot open csv: " + args.csv_path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty csv: " + args.csv_path);

  auto split = [](const std::string &s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };
  const auto header = split(line);
  auto column = [&header](const std::string &name) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("csv lacks column '" + name + "'");
  };
  // "mbleu4-inverted" plots 1 - mbleu4 so that right still means diverse.
  const bool invert_x = args.x == "mbleu4-inverted";
  const bool invert_y = args.y == "mbleu4-inverted";
  const size_t xi = column(invert_x ? "mbleu4" : args.x);
  const size_t yi = column(invert_y ? "mbleu4" : args.y);
  const size_t method_i = column("method"), ctx_i = column("context_id");

  std::vector<TradeoffPoint> points;
  size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() < header.size())
      throw std::runtime_error("csv row " + std::to_string(row_no) +
                               ": too few cells");
    if (cells[ctx_i] != "ALL") continue;
    if (cells[xi].empty() || cells[yi].empty()) continue;
    TradeoffPoint p;
    p.series = cells[method_i];
    p.config_id = cells[method_i];
    p.x = invert_x ? 1.0 - std::stod(cells[xi]) : std::stod(cells[xi]);
    p.y = invert_y ? 1.0 - std::stod(cells[yi]) : std::stod(cells[yi]);
    points.push_back(std::move(p));
  }
  if (points.empty())
    throw std::runtime_error("no aggregate rows with both metrics in " +
                             args.csv_path);
  EmitTradeoffSvg(points, args.x, args.y, args.out);
  std::cerr << "wrote " << points.size() << " points to " << args.out << '\n';
  return kOk;
}

}  // namespace

int CliMain(int argc, const char *const *argv) {
  CLI::App app{"diverse caption decoding and evaluation toolkit"};
  app.require_subcommand(1);

  GenWorldArgs gen;
  CLI::App *gen_cmd = app.add_subcommand(
      "gen-world", "synthesize a captioning world with scene ground truth");
  gen_cmd->add_option("--lexicon", gen.lexicon_path, "lexicon JSON (default: built-in)");
  gen_cmd->add_option("--contexts", gen.contexts, "number of contexts")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--refs", gen.refs, "references per context (>= 2)");
  gen_cmd->add_option("--seed", gen.seed, "generation seed");
  gen_cmd->add_option("--out", gen.out, "corpus JSONL output path");
  gen_cmd->add_option("--scenes", gen.scenes, "scene sidecar JSON output path");
  gen_cmd->add_option("--save-lexicon", gen.save_lexicon,
                      "write the lexicon that was used");

  DecodeArgs dec;
  CLI::App *dec_cmd =
      app.add_subcommand("decode", "decode caption sets for every context");
  dec_cmd->add_option("--corpus", dec.corpus_path, "corpus JSONL")->required();
  dec_cmd->add_option("--model-table", dec.table_path,
                      "logit-table model JSON (default: train n-gram)");
  dec_cmd->add_option("--order", dec.ngram.order, "n-gram order");
  dec_cmd->add_option("--add-k", dec.ngram.add_k, "add-k smoothing constant");
  dec_cmd->add_option("--beta", dec.ngram.beta, "context interpolation weight");
  dec_cmd->add_option("--method", dec.method, "SP|TOPK|TOPP|BS|DBS")->required();
  dec_cmd->add_option("-T,--temperature", dec.params.T, "softmax temperature");
  dec_cmd->add_option("-K", dec.params.K, "top-K cutoff");
  dec_cmd->add_option("-p", dec.params.p, "nucleus mass");
  dec_cmd->add_option("-m", dec.params.m, "beam width / list size");
  dec_cmd->add_option("--groups", dec.params.G, "DBS group count");
  dec_cmd->add_option("--lambda", dec.params.lambda, "DBS diversity penalty");
  dec_cmd->add_option("--n-samples", dec.params.n_samples, "samples per context");
  dec_cmd->add_option("--max-len", dec.params.max_len, "maximum caption length");
  dec_cmd->add_option("--seed", dec.params.seed, "sampling seed");
  dec_cmd->add_option("--out", dec.out, "caption JSONL output path");

  EvalArgs ev;
  CLI::App *eval_cmd =
      app.add_subcommand("eval", "score caption sets against eval references");
  eval_cmd->add_option("--captions", ev.captions_path, "caption JSONL")->required();
  eval_cmd->add_option("--corpus", ev.corpus_path, "corpus JSONL")->required();
  eval_cmd->add_option("--lexicon", ev.lexicon_path, "lexicon JSON");
  eval_cmd->add_option("--out", ev.out, "report CSV output path");

  std::string sweep_config_path;
  CLI::App *sweep_cmd =
      app.add_subcommand("sweep", "run a sweep config: CSV + tradeoff SVGs");
  sweep_cmd->add_option("--config", sweep_config_path, "sweep TOML")->required();

  PlotArgs plot;
  CLI::App *plot_cmd =
      app.add_subcommand("plot", "tradeoff SVG from a report CSV");
  plot_cmd->add_option("--csv", plot.csv_path, "report CSV")->required();
  plot_cmd->add_option("--x", plot.x, "x column (diversity)");
  plot_cmd->add_option("--y", plot.y, "y column (accuracy)");
  plot_cmd->add_option("--out", plot.out, "SVG output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << '\n' << app.help();
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return RunGenWorld(gen);
    if (dec_cmd->parsed()) return RunDecode(dec);
    if (eval_cmd->parsed()) return RunEval(ev);
    if (sweep_cmd->parsed()) {
      const SweepConfig config = LoadSweepConfig(sweep_config_path);
      RunSweep(config, &std::cerr);
      return kOk;
    }
    if (plot_cmd->parsed()) return RunPlot(plot);
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace divdecode
