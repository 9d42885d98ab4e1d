// world.h
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
// Synthetic captioning world: each context gets a random ground-truth scene
// and reference captions realized from the template grammar
//
//   clause    := "a" [attribute] object relation "a" [attribute] object
//   reference := clause ("and" clause)*
//
// Scenes hold 2-4 objects (every object takes part in at least one relation),
// 0-2 attributes per object, and 1-3 relations.  Each reference verbalizes a
// rotating window of 1..R scene relations, includes an attribute slot
// independently with probability 0.9 (cycling through the object's
// attributes), and renders every word as a uniformly chosen member of its
// synonym class.  The scene record stores canonical forms, so extracted
// graphs of realized references are always subsets of the scene.

#ifndef DIVDECODE_WORLD_H_
#define DIVDECODE_WORLD_H_

#include <cstdint>

#include "divdecode/corpus.h"
#include "divdecode/spice.h"

namespace divdecode {

struct World {
  Corpus corpus;
  SceneMap scenes;  // ground truth, keyed by context id
};

// Deterministic for fixed (lexicon, n_contexts, refs_per_context, seed).
// References are split round-robin: even indices to train, odd to eval.
// Throws std::invalid_argument when the lexicon cannot support a scene or
// refs_per_context < 2.
World SynthesizeWorld(const Lexicon &lexicon, int n_contexts,
                      int refs_per_context, uint64_t seed);

}  // namespace divdecode

#endif  // DIVDECODE_WORLD_H_
