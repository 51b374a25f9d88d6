// Copyright 2026 The hiddenfleet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIDDENFLEET_RNG_H_
#define HIDDENFLEET_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hiddenfleet {

using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a (master, path...) pair. Episode i of a run always gets
// DeriveSeed(master, {i}), so results never depend on scheduling.
inline std::uint64_t DeriveSeed(std::uint64_t master,
                                std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = SplitMix64(master);
  for (std::uint64_t p : path) h = SplitMix64(h ^ SplitMix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline double UniformReal(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int UniformInt(Rng& rng, int lo, int hi_inclusive) {
  return std::uniform_int_distribution<int>(lo, hi_inclusive)(rng);
}

}  // namespace hiddenfleet

#endif  // HIDDENFLEET_RNG_H_
