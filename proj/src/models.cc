// models.cc
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

#include "divdecode/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace divdecode {

using nlohmann::json;

int ScoringModel::EosId() const {
  const auto &vocab = Vocab();
  for (size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i] == kEos) return static_cast<int>(i);
  }
  throw std::runtime_error("model vocabulary lacks <eos>");
}

std::vector<double> SoftmaxWithTemperature(const LogitVector &v, double T) {
  if (!(T > 0)) throw std::invalid_argument("temperature must be > 0");
  if (v.empty()) return {};
  double max_scaled = v[0] / T;
  for (double x : v) max_scaled = std::max(max_scaled, x / T);
  std::vector<double> out(v.size());
  double sum = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] / T - max_scaled);
    sum += out[i];
  }
  for (double &x : out) x /= sum;
  return out;
}

std::vector<double> LogSoftmaxWithTemperature(const LogitVector &v, double T) {
  if (!(T > 0)) throw std::invalid_argument("temperature must be > 0");
  if (v.empty()) return {};
  double max_scaled = v[0] / T;
  for (double x : v) max_scaled = std::max(max_scaled, x / T);
  double sum = 0;
  for (double x : v) sum += std::exp(x / T - max_scaled);
  const double lse = max_scaled + std::log(sum);
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / T - lse;
  return out;
}

namespace {

class TableModel : public ScoringModel {
 public:
  TableModel(std::vector<Token> vocab,
             std::map<std::string, std::map<std::string, LogitVector>> contexts)
      : vocab_(std::move(vocab)), contexts_(std::move(contexts)) {
    if (vocab_.empty()) throw std::runtime_error("table model: empty vocab");
    for (const auto &[ctx, rows] : contexts_) {
      for (const auto &[prefix, row] : rows) {
        if (row.size() != vocab_.size()) {
          throw std::runtime_error("table model: row '" + prefix +
                                   "' in context '" + ctx + "' has " +
                                   std::to_string(row.size()) +
                                   " entries, vocab has " +
                                   std::to_string(vocab_.size()));
        }
        for (double x : row) {
          if (!std::isfinite(x))
            throw std::runtime_error("table model: non-finite logit in '" +
                                     prefix + "'");
        }
      }
    }
    EosId();  // validates <eos> presence
  }

  const std::vector<Token> &Vocab() const override { return vocab_; }

  LogitVector NextScores(const std::string &context_id,
                         const std::vector<Token> &prefix) const override {
    auto ctx_it = contexts_.find(context_id);
    if (ctx_it == contexts_.end())
      throw std::runtime_error("prefix not covered: unknown context '" +
                               context_id + "'");
    const std::string key = JoinTokens(prefix);
    auto row_it = ctx_it->second.find(key);
    if (row_it == ctx_it->second.end())
      throw std::runtime_error("prefix not covered: context '" + context_id +
                               "' prefix '" + key + "'");
    return row_it->second;
  }

 private:
  std::vector<Token> vocab_;
  std::map<std::string, std::map<std::string, LogitVector>> contexts_;
};

// Parse callback that rejects duplicate keys in any JSON object.
json ParseRejectingDuplicates(const std::string &text, const char *what) {
  std::vector<std::set<json>> key_stack;
  json::parser_callback_t cb = [&key_stack, what](int /*depth*/,
                                                  json::parse_event_t event,
                                                  json &parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        key_stack.emplace_back();
        break;
      case json::parse_event_t::key:
        if (!key_stack.back().insert(parsed).second) {
          throw std::runtime_error(std::string(what) + ": duplicate key " +
                                   parsed.dump());
        }
        break;
      case json::parse_event_t::object_end:
        key_stack.pop_back();
        break;
      default:
        break;
    }
    return true;
  };
  return json::parse(text, cb);
}

}  // namespace

std::unique_ptr<ScoringModel> MakeTableModel(
    std::vector<Token> vocab,
    std::map<std::string, std::map<std::string, LogitVector>> contexts) {
  return std::make_unique<TableModel>(std::move(vocab), std::move(contexts));
}

std::unique_ptr<ScoringModel> ParseTableModel(const std::string &json_text) {
  json obj;
  try {
    obj = ParseRejectingDuplicates(json_text, "table model");
  } catch (const json::exception &e) {
    throw std::runtime_error(std::string("table model: ") + e.what());
  }
  std::vector<Token> vocab;
  for (const auto &w : obj.at("vocab")) vocab.push_back(w.get<std::string>());
  std::map<std::string, std::map<std::string, LogitVector>> contexts;
  for (const auto &[ctx, rows] : obj.at("contexts").items()) {
    auto &dst = contexts[ctx];
    for (const auto &[prefix, row] : rows.items()) {
      LogitVector v;
      for (const auto &x : row) v.push_back(x.get<double>());
      dst.emplace(prefix, std::move(v));
    }
  }
  return MakeTableModel(std::move(vocab), std::move(contexts));
}

std::unique_ptr<ScoringModel> LoadTableModel(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table model: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseTableModel(ss.str());
}

namespace {

// Count store for one component (context-local or global).  Histories are
// space-joined token strings of length 0..order-1; `total` is the number of
// observed continuations of the history, so add-k distributions normalize
// exactly.
struct CountNode {
  long total = 0;
  std::unordered_map<int, long> cont;  // word id -> count
};

class CountTable {
 public:
  void AddSentence(const std::vector<int> &word_ids,
                   const std::vector<Token> &vocab, int order) {
    // Padded view: (order-1) <bos> sentinels, then words, then <eos>.
    const int eos_id = static_cast<int>(vocab.size()) - 1;
    std::vector<int> seq;
    seq.reserve(word_ids.size() + order);
    for (int i = 0; i + 1 < order; ++i) seq.push_back(-1);  // -1 = <bos>
    seq.insert(seq.end(), word_ids.begin(), word_ids.end());
    seq.push_back(eos_id);

    const int pad = order - 1;
    for (size_t i = pad; i < seq.size(); ++i) {
      const int w = seq[i];
      for (int hist_len = 0; hist_len < order; ++hist_len) {
        std::string key = HistoryKey(seq, i, hist_len, vocab);
        auto &node = nodes_[key];
        node.total += 1;
        node.cont[w] += 1;
      }
    }
  }

  // Longest suffix of `history` (word ids; -1 = <bos>, -2 = unseen word)
  // with nonzero count.  Suffixes containing an unseen word never match, so
  // the search backs off past it.
  const CountNode *BackoffNode(const std::vector<int> &history,
                               const std::vector<Token> &vocab) const {
    for (size_t start = 0; start <= history.size(); ++start) {
      std::string key;
      for (size_t i = start; i < history.size(); ++i) {
        if (!key.empty()) key += ' ';
        if (history[i] == -1) {
          key += kBos;
        } else if (history[i] < 0) {
          key += '\x01';
        } else {
          key += vocab[history[i]];
        }
      }
      auto it = nodes_.find(key);
      if (it != nodes_.end() && it->second.total > 0) return &it->second;
    }
    return nullptr;
  }

 private:
  static std::string HistoryKey(const std::vector<int> &seq, size_t pos,
                                int hist_len, const std::vector<Token> &vocab) {
    std::string key;
    for (size_t i = pos - hist_len; i < pos; ++i) {
      if (!key.empty()) key += ' ';
      key += seq[i] < 0 ? kBos : vocab[seq[i]];
    }
    return key;
  }

  std::unordered_map<std::string, CountNode> nodes_;
};

class NGramModel : public ScoringModel {
 public:
  NGramModel(const Corpus &corpus, const NGramModelParams &params)
      : params_(params) {
    if (params.order < 1) throw std::invalid_argument("order must be >= 1");
    if (!(params.add_k > 0)) throw std::invalid_argument("add_k must be > 0");
    if (params.beta < 0 || params.beta > 1)
      throw std::invalid_argument("beta must be in [0, 1]");
    if (corpus.contexts.empty()) throw std::invalid_argument("empty corpus");

    std::set<Token> words;
    for (const auto &[id, refs] : corpus.contexts) {
      for (const auto &bucket : {&refs.train_refs, &refs.eval_refs}) {
        for (const auto &cap : *bucket)
          words.insert(cap.tokens.begin(), cap.tokens.end());
      }
    }
    vocab_.assign(words.begin(), words.end());
    vocab_.push_back(kEos);
    for (size_t i = 0; i < vocab_.size(); ++i)
      word_id_[vocab_[i]] = static_cast<int>(i);

    for (const auto &[id, refs] : corpus.contexts) {
      auto &ctx_counts = context_counts_[id];
      for (const auto &cap : refs.train_refs) {
        const auto ids = ToIds(cap.tokens);
        ctx_counts.AddSentence(ids, vocab_, params_.order);
        global_counts_.AddSentence(ids, vocab_, params_.order);
      }
    }
  }

  const std::vector<Token> &Vocab() const override { return vocab_; }

  LogitVector NextScores(const std::string &context_id,
                         const std::vector<Token> &prefix) const override {
    // History: last (order-1) tokens after <bos>-padding the prefix.
    std::vector<int> history;
    const int hist_len = params_.order - 1;
    for (int i = 0; i < hist_len; ++i) {
      const int pos = static_cast<int>(prefix.size()) - hist_len + i;
      if (pos < 0) {
        history.push_back(-1);
      } else {
        auto it = word_id_.find(prefix[pos]);
        history.push_back(prefix[pos] == kBos  ? -1
                          : it != word_id_.end() ? it->second
                                                 : -2);  // unseen word
      }
    }

    auto ctx_it = context_counts_.find(context_id);
    const CountNode *ctx_node =
        ctx_it == context_counts_.end()
            ? nullptr
            : ctx_it->second.BackoffNode(history, vocab_);
    const CountNode *glob_node = global_counts_.BackoffNode(history, vocab_);
    if (!glob_node)
      throw std::runtime_error("ngram model: no global unigram counts");
    if (!ctx_node) ctx_node = glob_node;  // unknown context falls back

    const double k = params_.add_k;
    const double v = static_cast<double>(vocab_.size());
    const double ctx_denom = ctx_node->total + k * v;
    const double glob_denom = glob_node->total + k * v;

    LogitVector out(vocab_.size());
    for (size_t w = 0; w < vocab_.size(); ++w) {
      const int wid = static_cast<int>(w);
      auto cit = ctx_node->cont.find(wid);
      auto git = glob_node->cont.find(wid);
      const double p_ctx =
          ((cit != ctx_node->cont.end() ? cit->second : 0) + k) / ctx_denom;
      const double p_glob =
          ((git != glob_node->cont.end() ? git->second : 0) + k) / glob_denom;
      out[w] = std::log(params_.beta * p_ctx + (1 - params_.beta) * p_glob);
    }
    return out;
  }

 private:
  std::vector<int> ToIds(const std::vector<Token> &tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto &t : tokens) ids.push_back(word_id_.at(t));
    return ids;
  }

  NGramModelParams params_;
  std::vector<Token> vocab_;
  std::unordered_map<Token, int> word_id_;
  std::unordered_map<std::string, CountTable> context_counts_;
  CountTable global_counts_;
};

}  // namespace

std::unique_ptr<ScoringModel> TrainNgram(const Corpus &corpus,
                                         const NGramModelParams &params) {
  return std::make_unique<NGramModel>(corpus, params);
}

}  // namespace divdecode
