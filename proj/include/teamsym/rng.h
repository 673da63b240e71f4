// Copyright 2026 The Teamsym Authors
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

#ifndef TEAMSYM_RNG_H_
#define TEAMSYM_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace teamsym {

// std::mt19937_64's output sequence is fixed by the standard, but the
// <random> distributions are not. The helpers below sample directly from the
// engine so seeded runs are reproducible across standard library vendors.
using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t tag) {
  return SplitMix64(SplitMix64(base) ^ (tag * 0xd1b54a32d192ed03ULL));
}

// Uniform double in [0, 1) with 53 random bits.
inline double UniformReal(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi], rejection sampled.
inline std::int64_t UniformInt(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng());
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

// Samples an index from a discrete distribution.
inline int SampleIndex(Rng& rng, const std::vector<double>& probs) {
  double u = UniformReal(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

// Dirichlet(1, ..., 1): normalized exponentials.
inline std::vector<double> UniformSimplexPoint(Rng& rng, int k) {
  std::vector<double> out(k);
  double total = 0.0;
  for (double& v : out) {
    v = -std::log1p(-UniformReal(rng));
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace teamsym

#endif  // TEAMSYM_RNG_H_
