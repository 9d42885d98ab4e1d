// test_spice.cc
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

#include <stdexcept>
#include <fstream>

#include "divdecode/rng.h"
#include "divdecode/spice.h"
#include "divdecode/world.h"
#include "doctest.h"

using namespace divdecode;

namespace {

Caption Cap(std::initializer_list<const char *> words) {
  Caption c;
  for (const char *w : words) c.tokens.emplace_back(w);
  return c;
}

}  // namespace

TEST_CASE("canonicalize") {
  const Lexicon lex = DefaultLexicon();
  CHECK(Canonicalize("kitten", lex) == "cat");
  CHECK(Canonicalize("cat", lex) == "cat");
  CHECK(Canonicalize("unknownword", lex) == "unknownword");
  CHECK(Canonicalize(Canonicalize("kitten", lex), lex) ==
        Canonicalize("kitten", lex));
}

TEST_CASE("extract_graph on the template grammar") {
  const Lexicon lex = DefaultLexicon();
  const SceneGraph g = ExtractGraph(Cap({"a", "red", "cat", "on", "a", "mat"}), lex);
  CHECK(g.objects == std::set<std::string>{"cat", "mat"});
  CHECK(g.attributes ==
        std::set<std::pair<std::string, std::string>>{{"cat", "red"}});
  CHECK(g.relations ==
        std::set<std::array<std::string, 3>>{{"cat", "on", "mat"}});

  CHECK(ExtractGraph(Cap({}), lex).Empty());

  // Synonyms canonicalize; two-word relations are matched first.
  const SceneGraph syn =
      ExtractGraph(Cap({"a", "kitten", "next", "to", "a", "rug"}), lex);
  CHECK(syn.objects == std::set<std::string>{"cat", "mat"});
  CHECK(syn.relations ==
        std::set<std::array<std::string, 3>>{{"cat", "beside", "mat"}});

  // An attribute not immediately before an object attaches to nothing.
  const SceneGraph stray = ExtractGraph(Cap({"a", "red", "on", "a", "mat"}), lex);
  CHECK(stray.attributes.empty());

  // A relation with no object on one side yields no triple.
  const SceneGraph half = ExtractGraph(Cap({"on", "a", "mat"}), lex);
  CHECK(half.relations.empty());
  CHECK(half.objects == std::set<std::string>{"mat"});

  // Conjoined clauses attach relations to their nearest objects.
  const SceneGraph two = ExtractGraph(
      Cap({"a", "red", "cat", "on", "a", "mat", "and", "a", "big", "dog",
           "under", "a", "tree"}),
      lex);
  CHECK(two.objects == std::set<std::string>{"cat", "mat", "dog", "tree"});
  CHECK(two.attributes == std::set<std::pair<std::string, std::string>>{
                              {"cat", "red"}, {"dog", "big"}});
  CHECK(two.relations == std::set<std::array<std::string, 3>>{
                             {"cat", "on", "mat"}, {"dog", "under", "tree"}});
}

TEST_CASE("merge_graphs") {
  const Lexicon lex = DefaultLexicon();
  const SceneGraph g = ExtractGraph(Cap({"a", "cat", "on", "a", "mat"}), lex);
  CHECK(MergeGraphs({g, g}) == g);
  CHECK(MergeGraphs({g, SceneGraph{}}) == g);
  CHECK(MergeGraphs({}) == SceneGraph{});

  const SceneGraph cat = ExtractGraph(Cap({"a", "cat", "on", "a", "mat"}), lex);
  const SceneGraph kitten =
      ExtractGraph(Cap({"a", "kitten", "on", "a", "rug"}), lex);
  const SceneGraph merged = MergeGraphs({cat, kitten});
  CHECK(merged.objects == std::set<std::string>{"cat", "mat"});
  CHECK(merged.relations.size() == 1);
}

TEST_CASE("spice_f1 arithmetic") {
  SceneGraph ref;
  for (const char *o : {"cat", "dog", "mat", "tree"}) ref.objects.insert(o);
  ref.attributes = {{"cat", "red"}, {"dog", "big"}};
  ref.relations = {{"cat", "on", "mat"}, {"dog", "under", "tree"}};
  REQUIRE(ref.TupleCount() == 8);

  const auto perfect = SpiceF1(ref, ref);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  SceneGraph cand;  // 4 tuples, 2 matched
  cand.objects = {"cat", "zebra"};
  cand.attributes = {{"cat", "red"}};
  cand.relations = {{"zebra", "on", "mat"}};
  const auto partial = SpiceF1(cand, ref);
  CHECK(partial.matched == 2);
  CHECK(partial.n_candidate == 4);
  CHECK(partial.n_reference == 8);
  CHECK(partial.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(partial.recall == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(partial.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  SceneGraph other;
  other.objects = {"zebra"};
  CHECK(SpiceF1(other, ref).f1 == 0.0);

  // Empty-vs-empty is zero by convention.
  const auto empty = SpiceF1(SceneGraph{}, SceneGraph{});
  CHECK(empty.f1 == 0.0);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
}

TEST_CASE("allspice: singleton equals spice, duplication is free") {
  const Lexicon lex = DefaultLexicon();
  const std::vector<Caption> refs = {
      Cap({"a", "red", "cat", "on", "a", "mat"}),
      Cap({"a", "big", "dog", "under", "a", "tree"})};
  const Caption one = Cap({"a", "cat", "on", "a", "mat"});

  const auto single = AllSpice({one}, refs, lex);
  const auto direct = SpiceF1(
      ExtractGraph(one, lex),
      MergeGraphs({ExtractGraph(refs[0], lex), ExtractGraph(refs[1], lex)}));
  CHECK(single.f1 == direct.f1);
  CHECK(single.matched == direct.matched);

  const Caption two = Cap({"a", "big", "dog", "under", "a", "tree"});
  const auto base = AllSpice({one, two}, refs, lex);
  const auto duped = AllSpice({one, two, one, one}, refs, lex);
  CHECK(base.f1 == duped.f1);
  CHECK(base.matched == duped.matched);
  CHECK(base.n_candidate == duped.n_candidate);

  // Synonym repetition is also free.
  const Caption one_syn = Cap({"a", "kitten", "on", "a", "rug"});
  const auto syn = AllSpice({one, two, one_syn}, refs, lex);
  CHECK(syn.f1 == base.f1);

  // Reordering is free.
  const auto reordered = AllSpice({two, one}, refs, lex);
  CHECK(reordered.f1 == base.f1);
}

TEST_CASE("allspice: new correct content raises recall, wrong content cuts precision") {
  const Lexicon lex = DefaultLexicon();
  const std::vector<Caption> refs = {
      Cap({"a", "red", "cat", "on", "a", "mat"}),
      Cap({"a", "big", "dog", "under", "a", "tree"})};

  // Covers part of the reference graph with perfect precision.
  const std::vector<Caption> base_set = {Cap({"a", "cat", "on", "a", "mat"})};
  const auto base = AllSpice(base_set, refs, lex);
  CHECK(base.precision == 1.0);
  CHECK(base.recall < 1.0);

  // A caption contributing only previously-unseen correct tuples.
  std::vector<Caption> more = base_set;
  more.push_back(Cap({"a", "big", "dog", "under", "a", "tree"}));
  const auto better = AllSpice(more, refs, lex);
  CHECK(better.recall > base.recall);
  CHECK(better.f1 > base.f1);
  CHECK(better.precision == 1.0);

  // A caption contributing only non-reference tuples.
  std::vector<Caption> noisy = base_set;
  noisy.push_back(Cap({"a", "horse", "inside", "a", "car"}));
  const auto worse = AllSpice(noisy, refs, lex);
  CHECK(worse.precision < base.precision);
  CHECK(worse.f1 < base.f1);
  CHECK(worse.recall == base.recall);
}

TEST_CASE("allspice recall and candidate size are monotone in the set") {
  const Lexicon lex = DefaultLexicon();
  const World world = SynthesizeWorld(lex, 6, 6, 31);
  Rng rng(32);
  for (const auto &[id, refs] : world.corpus.contexts) {
    // Grow a random candidate set out of this world's reference pool.
    std::vector<Caption> pool = world.corpus.all_train;
    rng.Shuffle(pool);
    std::vector<Caption> set{pool[0]};
    auto prev = AllSpice(set, refs.eval_refs, lex);
    for (int i = 1; i < 5; ++i) {
      set.push_back(pool[i]);
      const auto cur = AllSpice(set, refs.eval_refs, lex);
      CHECK(cur.matched >= prev.matched);
      CHECK(cur.recall >= prev.recall - 1e-12);
      CHECK(cur.n_candidate >= prev.n_candidate);
      prev = cur;
    }
    // Re-adding tuples that are already present changes nothing.
    std::vector<Caption> again = set;
    again.push_back(set[1]);
    const auto same = AllSpice(again, refs.eval_refs, lex);
    CHECK(same.matched == prev.matched);
    CHECK(same.n_candidate == prev.n_candidate);
    CHECK(same.f1 == prev.f1);
  }
}

TEST_CASE("pre-parsed tuple files load through the sidecar schema") {
  const std::string path = "/tmp/divdecode_test_tuples.json";
  {
    std::ofstream out(path);
    out << R"({"ctx0": {
      "candidates": [{"objects": ["cat"], "attributes": [["cat", "red"]],
                      "relations": []}],
      "references": [{"objects": ["cat", "mat"], "attributes": [],
                      "relations": [["cat", "on", "mat"]]}]
    }})";
  }
  const auto tuples = LoadTupleFile(path);
  REQUIRE(tuples.count("ctx0"));
  const auto &entry = tuples.at("ctx0");
  REQUIRE(entry.candidates.size() == 1);
  REQUIRE(entry.references.size() == 1);
  CHECK(entry.candidates[0].objects == std::set<std::string>{"cat"});
  CHECK(entry.references[0].relations.size() == 1);
  const auto score = SpiceF1(entry.candidates[0], entry.references[0]);
  CHECK(score.matched == 1);
  CHECK(score.n_candidate == 2);
  CHECK(score.n_reference == 3);
}
