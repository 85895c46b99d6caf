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
#include "dpfl/privacy.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dpfl/errors.h"

namespace dpfl {

PrivacySpec PrivacySpec::Make(double clip_bound, double noise_multiplier,
                              double sampling_ratio, double delta,
                              std::size_t total_clients) {
  PrivacySpec spec;
  spec.clip_bound = clip_bound;
  spec.noise_multiplier = noise_multiplier;
  spec.sampling_ratio = sampling_ratio;
  spec.delta = delta;
  spec.total_clients = total_clients;
  const double m = std::round(sampling_ratio * static_cast<double>(total_clients));
  spec.sampled_clients = static_cast<std::size_t>(std::max(1.0, m));
  spec.Validate();
  return spec;
}

double PrivacySpec::NoiseStddev() const {
  return noise_multiplier * clip_bound /
         std::sqrt(static_cast<double>(sampled_clients));
}

void PrivacySpec::Validate() const {
  if (!(clip_bound > 0.0)) throw InvalidArgument("clip bound C must be > 0");
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
    throw InvalidArgument("noise multiplier sigma must be finite and >= 0");
  }
  if (!(sampling_ratio > 0.0 && sampling_ratio <= 1.0)) {
    throw InvalidArgument("sampling ratio q must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (total_clients == 0) throw InvalidArgument("total clients M must be >= 1");
  if (sampled_clients == 0 || sampled_clients > total_clients) {
    throw InvalidArgument("sampled clients m must lie in [1, M]");
  }
}

ClipResult ClipUpdate(const ParameterVector& update, double clip_bound) {
  if (!(clip_bound > 0.0)) throw InvalidArgument("clip bound C must be > 0");
  ClipResult result;
  result.pre_clip_norm = L2Norm(update.span());
  result.factor = result.pre_clip_norm > 0.0
                      ? std::min(1.0, clip_bound / result.pre_clip_norm)
                      : 1.0;
  result.clipped = update;
  if (result.factor < 1.0) {
    for (double& v : result.clipped) v *= result.factor;
  }
  return result;
}

ParameterVector AddDpNoise(const ParameterVector& update,
                           const PrivacySpec& spec, std::uint64_t seed) {
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kNoise);
  return AddDpNoise(update, spec, rng);
}

ParameterVector AddDpNoise(const ParameterVector& update,
                           const PrivacySpec& spec, Philox4x32& rng,
                           std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != update.size()) {
    throw DimensionMismatch("noise mask length differs from update length");
  }
  ParameterVector noised = update;
  const double stddev = spec.NoiseStddev();
  if (stddev == 0.0) return noised;
  std::normal_distribution<double> gaussian(0.0, stddev);
  for (std::size_t i = 0; i < noised.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    noised[i] += gaussian(rng);
  }
  return noised;
}

double AggregationSensitivity(const PrivacySpec& spec) {
  return spec.clip_bound / static_cast<double>(spec.sampled_clients);
}

}  // namespace dpfl
