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
#include "dpfl/probes.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dpfl/errors.h"
#include "test_support.h"

namespace dpfl {
namespace {

double HalfSquaredNorm(const ParameterVector& w) {
  const double n = L2Norm(w.span());
  return 0.5 * n * n;
}

TEST(SampleDirection, UnitNorm) {
  const ParameterVector w = testing::RandomVector(30, 1);
  Philox4x32 rng(1, 1);
  const ParameterVector u = SampleDirection(w, {}, DirectionNorm::kUnit, rng);
  EXPECT_NEAR(L2Norm(u.span()), 1.0, 1e-14);
}

TEST(SampleDirection, FilterNormalizedPerLayer) {
  MlpArchitecture arch({5, 4, 3});
  const ParameterVector w = InitParams(arch, 2);
  Philox4x32 rng(1, 1);
  const ParameterVector u = SampleDirection(w, arch.layers(), DirectionNorm::kFilter, rng);
  for (const LayerBlock& b : arch.layers()) {
    EXPECT_NEAR(L2Norm(u.span().subspan(b.begin(), b.size())),
                L2Norm(w.span().subspan(b.begin(), b.size())), 1e-14);
  }
}

TEST(ProbeSharpness, QuadraticClosedForm) {
  const ParameterVector w = testing::RandomVector(12, 4);
  const std::vector<double> radii = {0.0, 0.1, 0.5, 2.0};
  const SharpnessProbe probe =
      ProbeSharpness(HalfSquaredNorm, w, {}, radii, 7, 11, DirectionNorm::kUnit);
  ASSERT_EQ(probe.mean_increase.size(), radii.size());
  std::vector<double> expected(radii.size(), 0.0);
  Philox4x32 rng = MakeStream(11, StreamPurpose::kProbe);
  for (int k = 0; k < 7; ++k) {
    const ParameterVector u = SampleDirection(w, {}, DirectionNorm::kUnit, rng);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      expected[r] += (radii[r] * Dot(w.span(), u.span()) + radii[r] * radii[r] / 2) / 7;
    }
  }
  for (std::size_t r = 0; r < radii.size(); ++r) {
    EXPECT_NEAR(probe.mean_increase[r], expected[r], 1e-10);
  }
  EXPECT_EQ(probe.mean_increase[0], 0.0);
}

TEST(ProbeSharpness, RadiusZeroIsExactlyZeroOnMlp) {
  MlpArchitecture arch({4, 6, 3});
  const ParameterVector w = testing::RandomVector(arch.parameter_count(), 3);
  const Batch data = testing::RandomBatch(4, 3, 40, 3);
  const std::vector<double> radii = {0.5, 0.0, 1.0};
  const SharpnessProbe probe = ProbeSharpness(w, arch, data, radii, 5, 1);
  EXPECT_EQ(probe.mean_increase[1], 0.0);
}

TEST(ProbeSharpness, ReadOnlyAndDeterministic) {
  MlpArchitecture arch({4, 6, 3});
  const ParameterVector w = testing::RandomVector(arch.parameter_count(), 3);
  const ParameterVector copy = w;
  const Batch data = testing::RandomBatch(4, 3, 40, 3);
  const Batch data_copy = data;
  const std::vector<double> radii = {0.0, 0.2};
  const SharpnessProbe a = ProbeSharpness(w, arch, data, radii, 5, 1);
  const SharpnessProbe b = ProbeSharpness(w, arch, data, radii, 5, 1);
  EXPECT_EQ(a.mean_increase, b.mean_increase);
  EXPECT_EQ(w, copy);
  EXPECT_EQ(data.inputs, data_copy.inputs);
  EXPECT_EQ(data.labels, data_copy.labels);
}

TEST(ProbeSharpness, Preconditions) {
  const ParameterVector w(3);
  const std::vector<double> no_zero = {0.1};
  const std::vector<double> radii = {0.0};
  EXPECT_THROW(ProbeSharpness(HalfSquaredNorm, w, {}, no_zero, 1, 0), InvalidArgument);
  EXPECT_THROW(ProbeSharpness(HalfSquaredNorm, w, {}, radii, 0, 0), InvalidArgument);
}

TEST(ProbeLandscape, ShapeAndCenter) {
  MlpArchitecture arch({4, 6, 3});
  const ParameterVector w = testing::RandomVector(arch.parameter_count(), 3);
  const Batch data = testing::RandomBatch(4, 3, 40, 3);
  const LandscapeSlice slice = ProbeLandscape(w, arch, data, 1.0, 5, 2);
  EXPECT_EQ(slice.loss.size(), 25u);
  EXPECT_EQ(slice.coords.front(), -1.0);
  EXPECT_EQ(slice.coords.back(), 1.0);
  EXPECT_EQ(slice.coords[2], 0.0);
  EXPECT_EQ(slice.at(2, 2), Loss(w, arch, data));
}

TEST(ProbeLandscape, ConvexOptimumIsGridMinimum) {
  const ParameterVector w(6);
  const LandscapeSlice slice =
      ProbeLandscape(HalfSquaredNorm, w, {}, 2.0, 7, 5, DirectionNorm::kUnit);
  const double center = slice.at(3, 3);
  for (const double v : slice.loss) EXPECT_GE(v, center);
}

TEST(ProbeLandscape, Preconditions) {
  EXPECT_THROW(ProbeLandscape(HalfSquaredNorm, ParameterVector(2), {}, 1.0, 1, 0),
               InvalidArgument);
  EXPECT_THROW(ProbeLandscape(HalfSquaredNorm, ParameterVector(2), {}, 0.0, 3, 0),
               InvalidArgument);
}

TEST(ProbeCsv, SelfDescribingOutputs) {
  SharpnessProbe probe;
  probe.radii = {0.0, 0.5};
  probe.mean_increase = {0.0, 0.25};
  probe.directions = 3;
  std::ostringstream out;
  WriteSharpnessCsv(out, probe);
  EXPECT_EQ(out.str(), "# sharpness probe, directions=3\nradius,mean_loss_increase\n0,0\n0.5,0.25\n");
  const LandscapeSlice slice = ProbeLandscape(HalfSquaredNorm, ParameterVector(2), {}, 1.0, 2, 0,
                                              DirectionNorm::kUnit);
  std::ostringstream grid;
  WriteLandscapeCsv(grid, slice);
  std::istringstream in(grid.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2 + 2);
}

class SensitivityTest : public ::testing::Test {
 protected:
  Federation Make(double lr) {
    const TrainTestSplit split = SplitTrainTest(GenerateSynthetic(3, 4, 300, 3.0, 1), 0.2, 1);
    FederationConfig config;
    config.method = Method::kDpFedSam;
    config.local_epochs = 1;
    config.batch_size = 8;
    config.hidden_widths = {6};
    config.privacy = PrivacySpec::Make(0.2, 0.95, 0.5, 0.1, 4);
    config.optimizer.learning_rate = lr;
    return Federation(config, split.train, split.test, PartitionIid(split.train, 4, 1));
  }
};

TEST_F(SensitivityTest, NoSwapIsZero) {
  const Federation f = Make(0.1);
  EXPECT_EQ(EmpiricalSensitivity(f, 1, f.InitialModel(), 0, 5, false), 0.0);
}

TEST_F(SensitivityTest, ZeroLearningRateIsZero) {
  const Federation f = Make(0.0);
  EXPECT_EQ(EmpiricalSensitivity(f, 1, f.InitialModel(), 0, 5), 0.0);
}

TEST_F(SensitivityTest, SwapGivesPositiveDeterministicValue) {
  const Federation f = Make(0.1);
  const double a = EmpiricalSensitivity(f, 2, f.InitialModel(), 0, 5);
  EXPECT_GT(a, 0.0);
  EXPECT_EQ(a, EmpiricalSensitivity(f, 2, f.InitialModel(), 0, 5));
}

TEST_F(SensitivityTest, BadClient) {
  const Federation f = Make(0.1);
  EXPECT_THROW(EmpiricalSensitivity(f, 9, f.InitialModel(), 0, 5), InvalidArgument);
}

}  // namespace
}  // namespace dpfl
