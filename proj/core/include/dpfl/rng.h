/*
 * Copyright 2026 The dpfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef DPFL_RNG_H_
#define DPFL_RNG_H_

#include <array>
#include <cstdint>
#include <limits>

namespace dpfl {

// Purpose tags separating the independent random streams of one client in
// one round. Values are part of the stream key and must never be reordered.
enum class StreamPurpose : std::uint32_t {
  kBatching = 1,
  kNoise = 2,
  kMask = 3,
  kSampling = 4,
  kInit = 5,
  kData = 6,
  kPartition = 7,
  kProbe = 8,
  kSensitivity = 9,
};

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit key selects the stream family and the upper half of the 128-bit
// counter selects the substream, so any (seed, round, client, purpose) tuple
// maps to an independent sequence without shared state. Satisfies
// UniformRandomBitGenerator and can drive the <random> distributions.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t key, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01();

 private:
  void Refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int next_ = 4;
};

// SplitMix64 finalizer; used to fold stream coordinates into one word.
std::uint64_t Mix64(std::uint64_t x);

// Stream for a client-scoped purpose in a given round.
Philox4x32 MakeStream(std::uint64_t master_seed, std::uint64_t round,
                      std::uint64_t client, StreamPurpose purpose);

// Stream for a global purpose (initialization, data generation, ...).
Philox4x32 MakeStream(std::uint64_t seed, StreamPurpose purpose);

}  // namespace dpfl

#endif  // DPFL_RNG_H_
