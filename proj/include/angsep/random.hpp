// Copyright 2026 The Angsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace angsep {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for item `index` of a batch, stable regardless of how the batch is
// scheduled across workers.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  return MixSeed(MixSeed(seed) ^ MixSeed(index + 0x632BE59BD9B4E019ULL));
}

// Named sub-streams of one seed so that adding draws to one stage does not
// perturb another.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kGains = 2,
  kSignals = 3,
  kDropout = 4,
  kProbe = 5,
};

inline Rng MakeRng(std::uint64_t seed, Stream stream) {
  return Rng(DeriveSeed(seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace angsep
