// Copyright 2026 The fedsim Authors
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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedsim {

using Engine = std::mt19937_64;

// Domain tags keep independent consumers of one user seed from sharing a
// stream.
enum class Stream : std::uint64_t {
  kModelInit = 1,
  kSynthData = 2,
  kPartition = 3,
  kClientSampling = 4,
  kBatchShuffle = 5,
  kFeatureSampling = 6,
  kServerNoise = 7,
  kTransportSubsample = 8,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds a base seed, a stream tag and any number of keys (round, client id,
// epoch...) into one engine seed. Key order matters.
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::initializer_list<std::uint64_t> keys = {}) noexcept {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t seed, Stream stream,
                          std::initializer_list<std::uint64_t> keys = {}) {
  return Engine(derive_seed(seed, stream, keys));
}

}  // namespace fedsim
