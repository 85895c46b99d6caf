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
#include "dpfl/optim.h"

#include <gtest/gtest.h>

#include <cmath>

#include "dpfl/errors.h"
#include "test_support.h"

namespace dpfl {
namespace {

using testing::RandomBatch;
using testing::RandomVector;

OptimizerConfig Plain(double lr) {
  OptimizerConfig c;
  c.learning_rate = lr;
  c.decay = 0.0;
  c.momentum = 0.0;
  return c;
}

TEST(SamPerturbation, ScalesToRadius) {
  const ParameterVector d = SamPerturbation({3.0, 4.0}, 0.5);
  EXPECT_DOUBLE_EQ(d[0], 0.3);
  EXPECT_DOUBLE_EQ(d[1], 0.4);
}

TEST(SamPerturbation, ZeroGradientGivesZero) {
  EXPECT_EQ(SamPerturbation(ParameterVector(5), 0.7), ParameterVector(5));
  EXPECT_EQ(SamPerturbation(ParameterVector{1e-13, 0.0}, 0.7), ParameterVector(2));
}

TEST(SamPerturbation, NormEqualsRho) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ParameterVector g = RandomVector(40, seed, std::pow(10.0, seed % 7 - 3.0));
    EXPECT_NEAR(L2Norm(SamPerturbation(g, 0.5).span()), 0.5, 1e-12);
  }
}

TEST(SamPerturbation, NegativeRhoRejected) {
  EXPECT_THROW(SamPerturbation({1.0}, -0.1), InvalidArgument);
}

TEST(Schedule, InverseTimeDecayIsNonIncreasing) {
  OptimizerConfig c;
  EXPECT_EQ(OptimizerState::ScheduledRate(c, 0), 0.1);
  EXPECT_DOUBLE_EQ(OptimizerState::ScheduledRate(c, 200), 0.1 / 2.0);
  for (std::size_t t = 1; t < 1000; ++t) {
    EXPECT_LE(OptimizerState::ScheduledRate(c, t),
              OptimizerState::ScheduledRate(c, t - 1));
    EXPECT_GT(OptimizerState::ScheduledRate(c, t), 0.0);
  }
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig c;
  c.momentum = 1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = OptimizerConfig{};
  c.rho = -1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = OptimizerConfig{};
  c.decay = -0.1;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(OptimizerState, HeavyBallUpdate) {
  OptimizerConfig c = Plain(0.1);
  c.momentum = 0.5;
  OptimizerState state(c, 1);
  state.ResetForRound(0);
  ParameterVector w = {1.0};
  state.ApplyUpdate(w, {2.0});  // v = 2, w = 1 - 0.2
  EXPECT_DOUBLE_EQ(w[0], 0.8);
  state.ApplyUpdate(w, {2.0});  // v = 3, w = 0.8 - 0.3
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  state.ResetForRound(1);
  EXPECT_EQ(state.momentum_buffer(), ParameterVector(1));
  EXPECT_EQ(state.step(), 0u);
}

class StepTest : public ::testing::Test {
 protected:
  MlpArchitecture arch_{std::vector<std::size_t>{4, 5, 3}};
  ParameterVector w_ = RandomVector(arch_.parameter_count(), 3, 0.5);
  Batch batch_ = RandomBatch(4, 3, 10, 4);
};

TEST_F(StepTest, SgdWithoutMomentumIsGradientStep) {
  OptimizerState state(Plain(0.05), w_.size());
  state.ResetForRound(0);
  ParameterVector w = w_;
  SgdStep(w, state, batch_, arch_);
  const ParameterVector g = LossAndGrad(w_, arch_, batch_).grad;
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i], w_[i] - 0.05 * g[i]);
}

TEST_F(StepTest, HalvingRateHalvesDisplacement) {
  ParameterVector a = w_;
  ParameterVector b = w_;
  OptimizerState sa(Plain(0.1), w_.size());
  OptimizerState sb(Plain(0.05), w_.size());
  sa.ResetForRound(0);
  sb.ResetForRound(0);
  SgdStep(a, sa, batch_, arch_);
  SgdStep(b, sb, batch_, arch_);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i] - w_[i], 2.0 * (b[i] - w_[i]), 1e-15);
  }
}

TEST_F(StepTest, ZeroGradientIsFixedPoint) {
  // Zero inputs and balanced labels make w = 0 stationary.
  MlpArchitecture arch({2, 2});
  Batch batch;
  batch.dim = 2;
  batch.inputs = {0.0, 0.0, 0.0, 0.0};
  batch.labels = {0, 1};
  ParameterVector w(arch.parameter_count());
  ASSERT_EQ(L2Norm(LossAndGrad(w, arch, batch).grad.span()), 0.0);
  OptimizerState state(OptimizerConfig{}, w.size());
  state.ResetForRound(0);
  SgdStep(w, state, batch, arch);
  EXPECT_EQ(w, ParameterVector(arch.parameter_count()));
}

TEST_F(StepTest, SamWithZeroRhoIsSgdBitExact) {
  OptimizerConfig c;
  c.rho = 0.0;
  OptimizerState s1(c, w_.size());
  OptimizerState s2(c, w_.size());
  s1.ResetForRound(3);
  s2.ResetForRound(3);
  ParameterVector a = w_;
  ParameterVector b = w_;
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(SamStep(a, s1, batch_, arch_), SgdStep(b, s2, batch_, arch_));
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(s1.momentum_buffer(), s2.momentum_buffer());
}

TEST_F(StepTest, SamUsesGradientAtPerturbedPoint) {
  OptimizerConfig c = Plain(0.1);
  c.rho = 0.3;
  OptimizerState state(c, w_.size());
  state.ResetForRound(0);
  ParameterVector w = w_;
  SamStep(w, state, batch_, arch_);

  const ParameterVector g = LossAndGrad(w_, arch_, batch_).grad;
  const ParameterVector delta = SamPerturbation(g, 0.3);
  ParameterVector perturbed = w_;
  for (std::size_t i = 0; i < w_.size(); ++i) perturbed[i] += delta[i];
  // Finite-difference gradient at the perturbed point as the oracle.
  const double h = 1e-5;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    ParameterVector plus = perturbed;
    ParameterVector minus = perturbed;
    plus[i] += h;
    minus[i] -= h;
    const double fd =
        (Loss(plus, arch_, batch_) - Loss(minus, arch_, batch_)) / (2 * h);
    EXPECT_NEAR(w[i], w_[i] - 0.1 * fd, 1e-8) << i;
  }
}

TEST_F(StepTest, GradientEvaluationCounts) {
  OptimizerState state(OptimizerConfig{}, w_.size());
  state.ResetForRound(0);
  ParameterVector w = w_;
  ResetGradientEvaluationCount();
  SgdStep(w, state, batch_, arch_);
  EXPECT_EQ(GradientEvaluationCount(), 1u);
  ResetGradientEvaluationCount();
  SamStep(w, state, batch_, arch_);
  EXPECT_EQ(GradientEvaluationCount(), 2u);
}

TEST_F(StepTest, StepsAreDeterministic) {
  OptimizerState s1(OptimizerConfig{}, w_.size());
  OptimizerState s2(OptimizerConfig{}, w_.size());
  s1.ResetForRound(0);
  s2.ResetForRound(0);
  ParameterVector a = w_;
  ParameterVector b = w_;
  SamStep(a, s1, batch_, arch_);
  SamStep(b, s2, batch_, arch_);
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace dpfl
