// decoders.cc
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

#include "divdecode/decoders.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "divdecode/rng.h"
#include "json.hpp"

namespace divdecode {

using nlohmann::json;

const char *MethodName(Method m) {
  switch (m) {
    case Method::kSP:
      return "SP";
    case Method::kTopK:
      return "TOPK";
    case Method::kTopP:
      return "TOPP";
    case Method::kBS:
      return "BS";
    case Method::kDBS:
      return "DBS";
  }
  return "?";
}

Method ParseMethod(const std::string &name) {
  std::string up;
  for (char c : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "SP") return Method::kSP;
  if (up == "TOPK" || up == "TOP-K") return Method::kTopK;
  if (up == "TOPP" || up == "TOP-P") return Method::kTopP;
  if (up == "BS") return Method::kBS;
  if (up == "DBS") return Method::kDBS;
  throw std::invalid_argument("unknown method: " + name);
}

void DecodeParams::Validate() const {
  if (!(T > 0)) throw std::invalid_argument("T must be > 0");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  switch (method) {
    case Method::kSP:
      break;
    case Method::kTopK:
      if (K < 1) throw std::invalid_argument("K must be >= 1");
      break;
    case Method::kTopP:
      if (!(p > 0) || p > 1) throw std::invalid_argument("p must be in (0, 1]");
      break;
    case Method::kBS:
      if (m < 1) throw std::invalid_argument("m must be >= 1");
      break;
    case Method::kDBS:
      if (m < 1) throw std::invalid_argument("m must be >= 1");
      if (G < 1) throw std::invalid_argument("G must be >= 1");
      if (m % G != 0)
        throw std::invalid_argument("m must be divisible by G for DBS");
      if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
      break;
  }
  if (method == Method::kSP || method == Method::kTopK ||
      method == Method::kTopP) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  }
}

namespace {

// Indices ordered by probability descending, index ascending on ties.
std::vector<int> OrderByProb(const std::vector<double> &probs) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&probs](int a, int b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  return order;
}

}  // namespace

std::vector<double> StepDistribution(const LogitVector &logits,
                                     const DecodeParams &params) {
  std::vector<double> probs = SoftmaxWithTemperature(logits, params.T);
  const int v = static_cast<int>(probs.size());

  int kept = v;
  std::vector<int> order;
  switch (params.method) {
    case Method::kTopK: {
      kept = std::min(params.K, v);
      if (kept == v) return probs;
      order = OrderByProb(probs);
      break;
    }
    case Method::kTopP: {
      if (params.p >= 1.0) return probs;  // full mass, exactly SP
      order = OrderByProb(probs);
      double cum = 0;
      kept = v;
      for (int i = 0; i < v; ++i) {
        cum += probs[order[i]];
        if (cum >= params.p - 1e-12) {  // tolerate summation error at the edge
          kept = i + 1;
          break;
        }
      }
      if (kept == v) return probs;
      break;
    }
    default:
      return probs;
  }

  std::vector<double> out(probs.size(), 0.0);
  double mass = 0;
  for (int i = 0; i < kept; ++i) mass += probs[order[i]];
  for (int i = 0; i < kept; ++i) out[order[i]] = probs[order[i]] / mass;
  return out;
}

namespace {

// Inverse-CDF draw; never returns a zero-probability index.
int SampleIndex(const std::vector<double> &probs, double u) {
  double cum = 0;
  int last_positive = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    last_positive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return last_positive;
  }
  return last_positive;
}

Caption SampleOne(const ScoringModel &model, const std::string &context_id,
                  const DecodeParams &params, int eos_id, Rng &rng) {
  const auto &vocab = model.Vocab();
  std::vector<Token> prefix{kBos};
  Caption cap;
  cap.logprob = 0.0;
  while (static_cast<int>(cap.tokens.size()) < params.max_len) {
    const LogitVector logits = model.NextScores(context_id, prefix);
    const std::vector<double> probs = StepDistribution(logits, params);
    const int idx = SampleIndex(probs, rng.NextDouble());
    cap.logprob = *cap.logprob + std::log(probs[idx]);
    if (idx == eos_id) break;
    cap.tokens.push_back(vocab[idx]);
    prefix.push_back(vocab[idx]);
  }
  return cap;
}

CaptionSet RunSampler(const ScoringModel &model, const std::string &context_id,
                      const DecodeParams &params) {
  params.Validate();
  const int eos_id = model.EosId();
  CaptionSet set;
  set.context_id = context_id;
  set.params = params;
  for (int i = 0; i < params.n_samples; ++i) {
    Rng rng(StreamSeed(params.seed, context_id, static_cast<uint64_t>(i)));
    set.captions.push_back(SampleOne(model, context_id, params, eos_id, rng));
  }
  return set;
}

struct Hypo {
  std::vector<int> tokens;  // word ids, <eos> never stored
  double score = 0.0;       // cumulative ln softmax_T
  double sel = 0.0;         // score minus accumulated diversity penalties
};

// sel descending, then token-id sequence ascending.
bool SelBetter(const std::vector<int> &a_tokens, double a_sel,
               const std::vector<int> &b_tokens, double b_sel) {
  if (a_sel != b_sel) return a_sel > b_sel;
  return a_tokens < b_tokens;
}

struct GroupState {
  std::vector<Hypo> live;
  std::vector<Hypo> pool;  // completed, kept sorted by (sel desc, lex asc)
  bool done = false;
};

void SortPool(std::vector<Hypo> &pool) {
  std::sort(pool.begin(), pool.end(), [](const Hypo &a, const Hypo &b) {
    return SelBetter(a.tokens, a.sel, b.tokens, b.sel);
  });
}

// One synchronized time step for one group.  `ham` counts tokens selected at
// this step by earlier groups; the group's own selections are added to it.
void AdvanceGroup(const ScoringModel &model, const std::string &context_id,
                  const DecodeParams &params, int width, int eos_id,
                  GroupState &group, std::vector<int> &ham) {
  if (group.done) return;

  struct Cand {
    const Hypo *parent;
    int word;
    double score;
    double sel;
  };
  const auto &vocab = model.Vocab();
  std::vector<Cand> cands;
  cands.reserve(group.live.size() * vocab.size());
  for (const Hypo &h : group.live) {
    std::vector<Token> prefix;
    prefix.reserve(h.tokens.size() + 1);
    prefix.push_back(kBos);
    for (int id : h.tokens) prefix.push_back(vocab[id]);
    const std::vector<double> lsm =
        LogSoftmaxWithTemperature(model.NextScores(context_id, prefix), params.T);
    for (int w = 0; w < static_cast<int>(vocab.size()); ++w) {
      cands.push_back({&h, w, h.score + lsm[w],
                       h.sel + lsm[w] - params.lambda * ham[w]});
    }
  }

  std::sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) {
    if (a.sel != b.sel) return a.sel > b.sel;
    if (a.parent->tokens != b.parent->tokens)
      return a.parent->tokens < b.parent->tokens;
    return a.word < b.word;
  });

  // The group's selections this step: the top `width` candidates.  Finished
  // ones (<eos>, or the word that reaches max_len) retire into the pool;
  // live slots refill from lower-ranked unfinished candidates.
  std::vector<Hypo> live_next;
  std::vector<int> chosen_tokens;
  int rank = 0;
  for (const Cand &c : cands) {
    const bool finishes =
        c.word == eos_id ||
        static_cast<int>(c.parent->tokens.size()) + 1 >= params.max_len;
    if (rank < width && finishes) {
      Hypo done;
      done.tokens = c.parent->tokens;
      if (c.word != eos_id) done.tokens.push_back(c.word);
      done.score = c.score;
      done.sel = c.sel;
      group.pool.push_back(std::move(done));
      chosen_tokens.push_back(c.word);
      ++rank;
    } else if (!finishes && static_cast<int>(live_next.size()) < width) {
      Hypo h;
      h.tokens = c.parent->tokens;
      h.tokens.push_back(c.word);
      h.score = c.score;
      h.sel = c.sel;
      live_next.push_back(std::move(h));
      chosen_tokens.push_back(c.word);
      ++rank;
    }
    if (static_cast<int>(live_next.size()) >= width && rank >= width) break;
  }

  SortPool(group.pool);
  if (static_cast<int>(group.pool.size()) > width)
    group.pool.resize(width);

  for (int w : chosen_tokens) ++ham[w];

  // Terminate when nothing is live, or the pool is full and no live beam can
  // still reach its worst member (step scores are <= 0, so a live beam's
  // selection score bounds all of its completions).
  group.live = std::move(live_next);
  if (group.live.empty()) {
    group.done = true;
    return;
  }
  if (static_cast<int>(group.pool.size()) >= width) {
    double best_live = group.live.front().sel;
    for (const Hypo &h : group.live) best_live = std::max(best_live, h.sel);
    if (best_live < group.pool.back().sel) {
      group.live.clear();
      group.done = true;
    }
  }
}

CaptionSet RunGroupedBeam(const ScoringModel &model,
                          const std::string &context_id,
                          const DecodeParams &params) {
  params.Validate();
  const int eos_id = model.EosId();
  const auto &vocab = model.Vocab();
  const int groups = params.method == Method::kDBS ? params.G : 1;
  const int width = params.m / groups;

  std::vector<GroupState> states(groups);
  for (auto &g : states) g.live.push_back(Hypo{});

  for (int step = 0; step < params.max_len; ++step) {
    bool any_live = false;
    std::vector<int> ham(vocab.size(), 0);
    for (auto &g : states) {
      AdvanceGroup(model, context_id, params, width, eos_id, g, ham);
      any_live |= !g.done;
    }
    if (!any_live) break;
  }

  std::vector<Hypo> all;
  for (auto &g : states)
    all.insert(all.end(), g.pool.begin(), g.pool.end());
  std::sort(all.begin(), all.end(), [](const Hypo &a, const Hypo &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });

  CaptionSet set;
  set.context_id = context_id;
  set.params = params;
  for (const Hypo &h : all) {
    Caption cap;
    cap.logprob = h.score;
    for (int id : h.tokens) cap.tokens.push_back(vocab[id]);
    set.captions.push_back(std::move(cap));
  }
  return set;
}

}  // namespace

CaptionSet SampleNaive(const ScoringModel &model, const std::string &context_id,
                       const DecodeParams &params) {
  DecodeParams p = params;
  p.method = Method::kSP;
  return RunSampler(model, context_id, p);
}

CaptionSet SampleTopK(const ScoringModel &model, const std::string &context_id,
                      const DecodeParams &params) {
  DecodeParams p = params;
  p.method = Method::kTopK;
  return RunSampler(model, context_id, p);
}

CaptionSet SampleTopP(const ScoringModel &model, const std::string &context_id,
                      const DecodeParams &params) {
  DecodeParams p = params;
  p.method = Method::kTopP;
  return RunSampler(model, context_id, p);
}

CaptionSet BeamSearchDecode(const ScoringModel &model,
                            const std::string &context_id,
                            const DecodeParams &params) {
  DecodeParams p = params;
  p.method = Method::kBS;
  return RunGroupedBeam(model, context_id, p);
}

CaptionSet DiverseBeamSearchDecode(const ScoringModel &model,
                                   const std::string &context_id,
                                   const DecodeParams &params) {
  DecodeParams p = params;
  p.method = Method::kDBS;
  return RunGroupedBeam(model, context_id, p);
}

CaptionSet DecodeOne(const ScoringModel &model, const std::string &context_id,
                     const DecodeParams &params) {
  switch (params.method) {
    case Method::kSP:
      return SampleNaive(model, context_id, params);
    case Method::kTopK:
      return SampleTopK(model, context_id, params);
    case Method::kTopP:
      return SampleTopP(model, context_id, params);
    case Method::kBS:
      return BeamSearchDecode(model, context_id, params);
    case Method::kDBS:
      return DiverseBeamSearchDecode(model, context_id, params);
  }
  throw std::logic_error("unreachable");
}

std::vector<CaptionSet> Decode(const ScoringModel &model, const Corpus &corpus,
                               const DecodeParams &params) {
  params.Validate();
  std::vector<CaptionSet> out;
  std::string errors;
  // The per-context seed (params.seed + fnv1a(context_id)) is derived inside
  // StreamSeed by the samplers, so outputs are independent of context order.
  for (const auto &[id, refs] : corpus.contexts) {
    try {
      out.push_back(DecodeOne(model, id, params));
    } catch (const std::exception &e) {
      if (!errors.empty()) errors += "; ";
      errors += id + ": " + e.what();
    }
  }
  if (!errors.empty())
    throw std::runtime_error("decode failed for contexts: " + errors);
  return out;
}

namespace {

json ParamsToJson(const DecodeParams &p) {
  json obj;
  obj["method"] = MethodName(p.method);
  obj["T"] = p.T;
  obj["max_len"] = p.max_len;
  obj["seed"] = p.seed;
  switch (p.method) {
    case Method::kTopK:
      obj["K"] = p.K;
      break;
    case Method::kTopP:
      obj["p"] = p.p;
      break;
    case Method::kBS:
      obj["m"] = p.m;
      break;
    case Method::kDBS:
      obj["m"] = p.m;
      obj["G"] = p.G;
      obj["lambda"] = p.lambda;
      break;
    case Method::kSP:
      break;
  }
  if (p.method == Method::kSP || p.method == Method::kTopK ||
      p.method == Method::kTopP) {
    obj["n_samples"] = p.n_samples;
  }
  return obj;
}

DecodeParams ParamsFromJson(const json &obj) {
  DecodeParams p;
  p.method = ParseMethod(obj.at("method").get<std::string>());
  p.T = obj.value("T", 1.0);
  p.max_len = obj.value("max_len", 20);
  p.seed = obj.value("seed", uint64_t{0});
  p.K = obj.value("K", 1);
  p.p = obj.value("p", 1.0);
  p.m = obj.value("m", 1);
  p.G = obj.value("G", 1);
  p.lambda = obj.value("lambda", 0.0);
  p.n_samples = obj.value("n_samples", 1);
  return p;
}

}  // namespace

void SaveCaptionSets(const std::vector<CaptionSet> &sets,
                     const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write captions file: " + path);
  for (const auto &set : sets) {
    json obj;
    obj["context_id"] = set.context_id;
    obj["params"] = ParamsToJson(set.params);
    json caps = json::array();
    for (const auto &c : set.captions) {
      json cj;
      cj["tokens"] = c.tokens;
      if (c.logprob) cj["logprob"] = *c.logprob;
      caps.push_back(std::move(cj));
    }
    obj["captions"] = std::move(caps);
    out << obj.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<CaptionSet> LoadCaptionSets(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open captions file: " + path);
  std::vector<CaptionSet> sets;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      throw std::runtime_error("captions line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    CaptionSet set;
    set.context_id = obj.at("context_id").get<std::string>();
    set.params = ParamsFromJson(obj.at("params"));
    for (const auto &cj : obj.at("captions")) {
      Caption c;
      for (const auto &t : cj.at("tokens")) c.tokens.push_back(t.get<std::string>());
      if (cj.contains("logprob")) c.logprob = cj["logprob"].get<double>();
      set.captions.push_back(std::move(c));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace divdecode
