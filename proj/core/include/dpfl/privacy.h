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
#ifndef DPFL_PRIVACY_H_
#define DPFL_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpfl/nn.h"
#include "dpfl/rng.h"

namespace dpfl {

// Client-level DP parameters. Defaults are the reference protocol:
// 500 clients, 10% sampled per round, C = 0.2, sigma = 0.95, delta = 1/M.
struct PrivacySpec {
  double clip_bound = 0.2;
  double noise_multiplier = 0.95;
  double sampling_ratio = 0.1;
  double delta = 1.0 / 500.0;
  std::size_t total_clients = 500;
  std::size_t sampled_clients = 50;

  // Fills sampled_clients = round(q * M) (at least 1).
  static PrivacySpec Make(double clip_bound, double noise_multiplier,
                          double sampling_ratio, double delta,
                          std::size_t total_clients);

  // Standard deviation of the per-coordinate client noise, sigma*C/sqrt(m).
  double NoiseStddev() const;

  // Throws InvalidArgument.
  void Validate() const;
};

struct ClipResult {
  ParameterVector clipped;
  double factor = 1.0;  // min(1, C / pre_clip_norm); 1 for a zero update
  double pre_clip_norm = 0.0;
};

// Scales `update` by min(1, C / ||update||_2).
ClipResult ClipUpdate(const ParameterVector& update, double clip_bound);

// Adds N(0, sigma^2 C^2 / m) to every coordinate. Deterministic in `seed`.
ParameterVector AddDpNoise(const ParameterVector& update,
                           const PrivacySpec& spec, std::uint64_t seed);

// Same, drawing from `rng`; when `mask` is non-empty only coordinates with a
// nonzero mask entry receive noise (one draw per retained coordinate, in index
// order).
ParameterVector AddDpNoise(const ParameterVector& update,
                           const PrivacySpec& spec, Philox4x32& rng,
                           std::span<const std::uint8_t> mask = {});

// L2 sensitivity of the server average of clipped updates: C / m.
double AggregationSensitivity(const PrivacySpec& spec);

}  // namespace dpfl

#endif  // DPFL_PRIVACY_H_
