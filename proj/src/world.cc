// world.cc
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

#include "divdecode/world.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "divdecode/rng.h"

namespace divdecode {

namespace {

constexpr double kAttrIncludeProb = 0.9;
constexpr int kMaxRelations = 3;

// Distinct canonical forms of a role set, sorted.
std::vector<std::string> CanonicalRole(const std::vector<std::string> &words,
                                       const Lexicon &lex) {
  std::set<std::string> canon;
  for (const auto &w : words) canon.insert(lex.CanonicalOf(w));
  return {canon.begin(), canon.end()};
}

// Synonym-class members of a canonical word (the class itself, or the word).
std::vector<std::string> SurfaceForms(const std::string &canonical,
                                      const Lexicon &lex) {
  for (const auto &cls : lex.synonym_classes) {
    if (std::find(cls.begin(), cls.end(), canonical) != cls.end()) return cls;
  }
  return {canonical};
}

std::string ContextId(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%04d", index);
  return buf;
}

struct SceneObject {
  std::string word;                 // canonical
  std::vector<std::string> attrs;   // canonical
  size_t attr_cursor = 0;           // rotates through attrs on inclusion
};

}  // namespace

World SynthesizeWorld(const Lexicon &lexicon, int n_contexts,
                      int refs_per_context, uint64_t seed) {
  lexicon.Validate();
  if (refs_per_context < 2)
    throw std::invalid_argument("refs_per_context must be >= 2");
  if (n_contexts < 1) throw std::invalid_argument("n_contexts must be >= 1");

  const auto objects = CanonicalRole(lexicon.objects, lexicon);
  const auto attributes = CanonicalRole(lexicon.attributes, lexicon);
  const auto relations = CanonicalRole(lexicon.relations, lexicon);
  if (objects.size() < 4 || attributes.size() < 4 || relations.size() < 4)
    throw std::invalid_argument(
        "lexicon too small to sample a scene (need >= 4 distinct canonical "
        "words per role)");

  World world;
  for (int ci = 0; ci < n_contexts; ++ci) {
    const std::string id = ContextId(ci);
    Rng rng(MixSeed(ContextSeed(seed, id)));

    // Scene objects: 2-4 distinct canonical words.
    const int n_obj = 2 + static_cast<int>(rng.NextBelow(3));
    std::vector<size_t> obj_order(objects.size());
    for (size_t i = 0; i < obj_order.size(); ++i) obj_order[i] = i;
    rng.Shuffle(obj_order);
    std::vector<SceneObject> scene_objs;
    for (int i = 0; i < n_obj; ++i)
      scene_objs.push_back({objects[obj_order[i]], {}, 0});

    // 0-2 attributes per object, weighted toward few.
    for (auto &obj : scene_objs) {
      const uint64_t roll = rng.NextBelow(100);
      const int n_attr = roll < 45 ? 0 : roll < 90 ? 1 : 2;
      std::vector<size_t> attr_order(attributes.size());
      for (size_t i = 0; i < attr_order.size(); ++i) attr_order[i] = i;
      rng.Shuffle(attr_order);
      for (int i = 0; i < n_attr; ++i)
        obj.attrs.push_back(attributes[attr_order[i]]);
      obj.attr_cursor = rng.NextBelow(obj.attrs.empty() ? 1 : obj.attrs.size());
    }

    // Relations: a chain over a shuffled object order keeps every object
    // reachable from the references, plus optional extras up to 3 total.
    struct Rel {
      int subj, obj;
      std::string word;
    };
    std::vector<Rel> rels;
    std::vector<int> chain(n_obj);
    for (int i = 0; i < n_obj; ++i) chain[i] = i;
    rng.Shuffle(chain);
    for (int i = 0; i + 1 < n_obj; ++i) {
      rels.push_back({chain[i], chain[i + 1],
                      relations[rng.NextBelow(relations.size())]});
    }
    const int extra_budget = kMaxRelations - static_cast<int>(rels.size());
    const int extras =
        extra_budget > 0 ? static_cast<int>(rng.NextBelow(extra_budget + 1)) : 0;
    for (int e = 0; e < extras; ++e) {
      for (int attempt = 0; attempt < 8; ++attempt) {
        int s = static_cast<int>(rng.NextBelow(n_obj));
        int o = static_cast<int>(rng.NextBelow(n_obj));
        if (s == o) continue;
        Rel cand{s, o, relations[rng.NextBelow(relations.size())]};
        bool dup = false;
        for (const auto &r : rels)
          dup |= r.subj == cand.subj && r.obj == cand.obj && r.word == cand.word;
        if (dup) continue;
        rels.push_back(cand);
        break;
      }
    }

    SceneGraph scene;
    for (const auto &obj : scene_objs) {
      scene.objects.insert(obj.word);
      for (const auto &a : obj.attrs) scene.attributes.emplace(obj.word, a);
    }
    for (const auto &r : rels)
      scene.relations.insert(
          {scene_objs[r.subj].word, r.word, scene_objs[r.obj].word});

    // Realize references over a rotating relation window.
    std::vector<size_t> rel_order(rels.size());
    for (size_t i = 0; i < rel_order.size(); ++i) rel_order[i] = i;
    rng.Shuffle(rel_order);
    size_t rel_cursor = 0;

    auto mention = [&](int obj_index, std::vector<Token> *out) {
      SceneObject &obj = scene_objs[obj_index];
      out->push_back("a");
      if (!obj.attrs.empty() && rng.NextBool(kAttrIncludeProb)) {
        const std::string &attr = obj.attrs[obj.attr_cursor % obj.attrs.size()];
        ++obj.attr_cursor;
        const auto forms = SurfaceForms(attr, lexicon);
        out->push_back(forms[rng.NextBelow(forms.size())]);
      }
      const auto forms = SurfaceForms(obj.word, lexicon);
      out->push_back(forms[rng.NextBelow(forms.size())]);
    };

    ContextRefs refs;
    for (int j = 0; j < refs_per_context; ++j) {
      const int n_clauses = 1 + static_cast<int>(rng.NextBelow(rels.size()));
      Caption cap;
      for (int c = 0; c < n_clauses; ++c) {
        if (c) cap.tokens.push_back("and");
        const Rel &rel = rels[rel_order[rel_cursor % rel_order.size()]];
        ++rel_cursor;
        mention(rel.subj, &cap.tokens);
        const auto rel_forms = SurfaceForms(rel.word, lexicon);
        const auto &surface = rel_forms[rng.NextBelow(rel_forms.size())];
        for (const auto &tok : Tokenize(surface)) cap.tokens.push_back(tok);
        mention(rel.obj, &cap.tokens);
      }
      (j % 2 == 0 ? refs.train_refs : refs.eval_refs).push_back(std::move(cap));
    }

    world.corpus.contexts.emplace(id, std::move(refs));
    world.scenes.emplace(id, std::move(scene));
  }
  world.corpus.RebuildAllTrain();
  return world;
}

}  // namespace divdecode
