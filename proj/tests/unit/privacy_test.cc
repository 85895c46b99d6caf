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

#include <gtest/gtest.h>

#include <cmath>

#include "dpfl/errors.h"
#include "test_support.h"

namespace dpfl {
namespace {

using testing::RandomVector;

ParameterVector WithNorm(std::size_t d, double norm, std::uint64_t seed) {
  ParameterVector v = RandomVector(d, seed);
  const double scale = norm / L2Norm(v.span());
  for (double& x : v) x *= scale;
  return v;
}

TEST(ClipUpdate, HalvesWhenNormIsTwiceBound) {
  const ParameterVector v = WithNorm(10, 0.4, 1);
  const ClipResult r = ClipUpdate(v, 0.2);
  EXPECT_DOUBLE_EQ(r.factor, 0.5);
  EXPECT_DOUBLE_EQ(r.pre_clip_norm, L2Norm(v.span()));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(r.clipped[i], v[i] * r.factor);
  EXPECT_NEAR(L2Norm(r.clipped.span()), 0.2, 1e-15);
}

TEST(ClipUpdate, SmallUpdatePassesThrough) {
  const ParameterVector v = WithNorm(10, 0.1, 2);
  const ClipResult r = ClipUpdate(v, 0.2);
  EXPECT_EQ(r.factor, 1.0);
  EXPECT_EQ(r.clipped, v);
}

TEST(ClipUpdate, ZeroUpdate) {
  const ClipResult r = ClipUpdate(ParameterVector(7), 0.2);
  EXPECT_EQ(r.factor, 1.0);
  EXPECT_EQ(r.pre_clip_norm, 0.0);
  EXPECT_EQ(r.clipped, ParameterVector(7));
}

TEST(ClipUpdate, NonPositiveBoundRejected) {
  EXPECT_THROW(ClipUpdate({1.0}, 0.0), InvalidArgument);
}

TEST(ClipUpdate, LawOnRandomVectors) {
  for (const double c : {0.1, 0.2, 0.4, 0.6, 0.8}) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const double scale = std::pow(10.0, static_cast<double>(seed % 9) / 2.0 - 2.5);
      const ParameterVector v = RandomVector(1 + seed % 97, seed, scale);
      const ClipResult r = ClipUpdate(v, c);
      const double norm = L2Norm(v.span());
      ASSERT_EQ(r.factor, std::min(1.0, c / norm));
      ASSERT_LE(L2Norm(r.clipped.span()), c * (1.0 + 1e-9));
    }
  }
}

TEST(PrivacySpec, MakeRoundsSampledClients) {
  EXPECT_EQ(PrivacySpec::Make(0.2, 0.95, 0.1, 0.002, 500).sampled_clients, 50u);
  EXPECT_EQ(PrivacySpec::Make(0.2, 0.95, 0.2, 0.02, 50).sampled_clients, 10u);
  EXPECT_EQ(PrivacySpec::Make(0.2, 0.95, 0.001, 0.1, 10).sampled_clients, 1u);
}

TEST(PrivacySpec, Validation) {
  PrivacySpec s;
  s.sampling_ratio = 1.5;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = PrivacySpec{};
  s.delta = 1.0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = PrivacySpec{};
  s.noise_multiplier = -1.0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = PrivacySpec{};
  s.noise_multiplier = 0.0;
  EXPECT_NO_THROW(s.Validate());
}

TEST(AggregationSensitivity, IsClipOverM) {
  EXPECT_DOUBLE_EQ(AggregationSensitivity(PrivacySpec::Make(0.2, 1, 0.1, 0.1, 500)), 0.004);
  EXPECT_EQ(AggregationSensitivity(PrivacySpec::Make(1, 1, 1, 0.1, 1)), 1.0);
  EXPECT_DOUBLE_EQ(AggregationSensitivity(PrivacySpec::Make(0.2, 1, 0.2, 0.1, 500)),
                   0.002);
}

TEST(AddDpNoise, ZeroSigmaIsIdentity) {
  PrivacySpec s;
  s.noise_multiplier = 0.0;
  const ParameterVector v = RandomVector(20, 3);
  EXPECT_EQ(AddDpNoise(v, s, 99), v);
}

TEST(AddDpNoise, DeterministicInSeed) {
  const ParameterVector v(50);
  PrivacySpec s;
  EXPECT_EQ(AddDpNoise(v, s, 4), AddDpNoise(v, s, 4));
  EXPECT_NE(AddDpNoise(v, s, 4), AddDpNoise(v, s, 5));
}

TEST(AddDpNoise, VarianceMatchesCalibration) {
  const PrivacySpec s = PrivacySpec::Make(0.2, 0.95, 0.1, 0.002, 500);
  const std::size_t n = 1000000;
  const ParameterVector noise = AddDpNoise(ParameterVector(n), s, 2024);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double x : noise) {
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double target = 0.95 * 0.95 * 0.2 * 0.2 / 50.0;
  EXPECT_NEAR(target, 7.22e-4, 1e-15);
  EXPECT_NEAR(var / target, 1.0, 0.02);
  EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(target / n));
}

TEST(AddDpNoise, MaskSkipsDroppedCoordinates) {
  PrivacySpec s;
  const ParameterVector v = RandomVector(8, 1);
  const std::vector<std::uint8_t> mask = {1, 0, 0, 1, 1, 0, 1, 0};
  Philox4x32 rng(1, 2);
  const ParameterVector out = AddDpNoise(v, s, rng, mask);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) {
      EXPECT_NE(out[i], v[i]);
    } else {
      EXPECT_EQ(out[i], v[i]);
    }
  }
  std::vector<std::uint8_t> short_mask(3, 1);
  Philox4x32 rng2(1, 2);
  EXPECT_THROW(AddDpNoise(v, s, rng2, short_mask), DimensionMismatch);
}

TEST(AddDpNoise, FullMaskEqualsNoMask) {
  PrivacySpec s;
  const ParameterVector v = RandomVector(16, 2);
  Philox4x32 a(7, 7);
  Philox4x32 b(7, 7);
  const std::vector<std::uint8_t> full(16, 1);
  EXPECT_EQ(AddDpNoise(v, s, a), AddDpNoise(v, s, b, full));
}

}  // namespace
}  // namespace dpfl
