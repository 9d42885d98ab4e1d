// rng.h
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
// Seedable PRNG and seed-derivation helpers.  Every random choice in the
// toolkit goes through this generator so that runs reproduce bit-for-bit
// across platforms and implementations.  The algorithms are fixed:
//
//   generator      xoshiro256** 1.0 (Blackman & Vigna), state filled from a
//                  64-bit seed by four rounds of splitmix64
//   mix(x)         one splitmix64 output step applied to x
//   hash(s)        FNV-1a 64-bit over the bytes of s
//   below(n)       floor(next_u64 * n / 2^64)  (128-bit multiply-shift)
//   double()       (next_u64 >> 11) * 2^-53, uniform in [0, 1)
//
// Stream derivation used by the decoders:
//   context_seed(seed, ctx) = seed + hash(ctx)               (wrapping add)
//   stream_seed(seed, ctx, i) = mix(mix(context_seed) + i)   (wrapping add)

#ifndef DIVDECODE_RNG_H_
#define DIVDECODE_RNG_H_

#include <cstdint>
#include <string_view>

namespace divdecode {

inline uint64_t SplitMix64Next(uint64_t &state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// One splitmix64 output step; the stateless mixing function above.
inline uint64_t MixSeed(uint64_t x) { return SplitMix64Next(x); }

inline uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto &word : state_) word = SplitMix64Next(sm);
  }

  uint64_t NextU64() {
    const uint64_t result = Rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, n).  n must be positive.
  uint64_t NextBelow(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(NextU64()) * n) >> 64);
  }

  int NextInt(int lo, int hi) {  // inclusive range [lo, hi]
    return lo + static_cast<int>(NextBelow(static_cast<uint64_t>(hi - lo + 1)));
  }

  double NextDouble() { return (NextU64() >> 11) * 0x1.0p-53; }

  bool NextBool(double p_true) { return NextDouble() < p_true; }

  // Fisher-Yates, deterministic for a given stream position.
  template <typename T>
  void Shuffle(T &container) {
    for (size_t i = container.size(); i > 1; --i) {
      size_t j = NextBelow(i);
      std::swap(container[i - 1], container[j]);
    }
  }

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

inline uint64_t ContextSeed(uint64_t seed, std::string_view context_id) {
  return seed + Fnv1a64(context_id);
}

inline uint64_t StreamSeed(uint64_t seed, std::string_view context_id,
                           uint64_t stream_index) {
  return MixSeed(MixSeed(ContextSeed(seed, context_id)) + stream_index);
}

}  // namespace divdecode

#endif  // DIVDECODE_RNG_H_
