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
#include "dpfl/rng.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace dpfl {
namespace {

std::vector<std::uint32_t> Draw(Philox4x32 rng, int n) {
  std::vector<std::uint32_t> out;
  for (int i = 0; i < n; ++i) out.push_back(rng());
  return out;
}

TEST(Philox, KnownAnswerZeroKeyZeroCounter) {
  // Reference vector for Philox4x32-10, key = 0, counter = 0.
  Philox4x32 rng(0, 0);
  EXPECT_EQ(rng(), 0x6627e8d5u);
  EXPECT_EQ(rng(), 0xe169c58du);
  EXPECT_EQ(rng(), 0xbc57ac4cu);
  EXPECT_EQ(rng(), 0x9b00dbd8u);
}

TEST(Philox, SameKeyAndStreamRepeat) {
  EXPECT_EQ(Draw(Philox4x32(42, 7), 100), Draw(Philox4x32(42, 7), 100));
}

TEST(Philox, KeyAndStreamBothMatter) {
  const auto base = Draw(Philox4x32(42, 7), 16);
  EXPECT_NE(base, Draw(Philox4x32(43, 7), 16));
  EXPECT_NE(base, Draw(Philox4x32(42, 8), 16));
}

TEST(Philox, Uniform01InUnitIntervalWithCorrectMean) {
  Philox4x32 rng(1, 2);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Standard error of the mean is sqrt(1/12 / n).
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Philox, BitsAreBalanced) {
  Philox4x32 rng(3, 4);
  const int n = 100000;
  std::vector<int> ones(32, 0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t v = rng();
    for (int b = 0; b < 32; ++b) ones[b] += (v >> b) & 1u;
  }
  for (int b = 0; b < 32; ++b) {
    EXPECT_NEAR(ones[b] / static_cast<double>(n), 0.5, 4.0 * 0.5 / std::sqrt(n))
        << "bit " << b;
  }
}

TEST(MakeStream, DistinctCoordinatesGiveDistinctStreams) {
  std::set<std::vector<std::uint32_t>> seen;
  for (std::uint64_t round = 0; round < 5; ++round) {
    for (std::uint64_t client = 0; client < 5; ++client) {
      for (auto purpose : {StreamPurpose::kBatching, StreamPurpose::kNoise,
                           StreamPurpose::kMask}) {
        seen.insert(Draw(MakeStream(9, round, client, purpose), 4));
      }
    }
  }
  EXPECT_EQ(seen.size(), 5u * 5u * 3u);
}

TEST(MakeStream, RoundAndClientAreNotInterchangeable) {
  EXPECT_NE(Draw(MakeStream(1, 2, 3, StreamPurpose::kNoise), 8),
            Draw(MakeStream(1, 3, 2, StreamPurpose::kNoise), 8));
}

TEST(MakeStream, MasterSeedChangesEveryStream) {
  EXPECT_NE(Draw(MakeStream(1, StreamPurpose::kInit), 8),
            Draw(MakeStream(2, StreamPurpose::kInit), 8));
  EXPECT_NE(Draw(MakeStream(1, 0, 0, StreamPurpose::kNoise), 8),
            Draw(MakeStream(2, 0, 0, StreamPurpose::kNoise), 8));
}

TEST(Mix64, IsInjectiveOnSmallRange) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(Mix64(i));
  EXPECT_EQ(seen.size(), 10000u);
}

}  // namespace
}  // namespace dpfl
