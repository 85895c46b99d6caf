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

#include <algorithm>
#include <cmath>

#include "dpfl/errors.h"

namespace dpfl {

void OptimizerConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be finite and >= 0");
  }
  if (!(decay >= 0.0)) throw InvalidArgument("decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("momentum must lie in [0, 1)");
  }
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
}

OptimizerState::OptimizerState(const OptimizerConfig& config, std::size_t dim)
    : config_(config), buffer_(dim), learning_rate_(config.learning_rate) {
  config_.Validate();
}

double OptimizerState::ScheduledRate(const OptimizerConfig& config,
                                     std::size_t round) {
  return config.learning_rate /
         (1.0 + config.decay * static_cast<double>(round));
}

void OptimizerState::ResetForRound(std::size_t round) {
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  step_ = 0;
  learning_rate_ = ScheduledRate(config_, round);
}

void OptimizerState::ApplyUpdate(ParameterVector& w,
                                 const ParameterVector& direction) {
  if (w.size() != buffer_.size() || direction.size() != buffer_.size()) {
    throw DimensionMismatch("optimizer state dimension mismatch");
  }
  const double mu = config_.momentum;
  for (std::size_t i = 0; i < w.size(); ++i) {
    buffer_[i] = mu * buffer_[i] + direction[i];
    w[i] -= learning_rate_ * buffer_[i];
  }
  ++step_;
}

ParameterVector SamPerturbation(const ParameterVector& g, double rho) {
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be >= 0");
  ParameterVector delta(g.size());
  const double norm = L2Norm(g.span());
  if (norm <= kSamNormFloor) return delta;
  const double scale = rho / norm;
  for (std::size_t i = 0; i < g.size(); ++i) delta[i] = scale * g[i];
  return delta;
}

double SgdStep(ParameterVector& w, OptimizerState& state, BatchView batch,
               const MlpArchitecture& arch) {
  LossAndGradient lg = LossAndGrad(w, arch, batch);
  state.ApplyUpdate(w, lg.grad);
  return lg.loss;
}

double SamStep(ParameterVector& w, OptimizerState& state, BatchView batch,
               const MlpArchitecture& arch) {
  const LossAndGradient at_w = LossAndGrad(w, arch, batch);
  const ParameterVector delta = SamPerturbation(at_w.grad, state.rho());
  ParameterVector perturbed = w;
  for (std::size_t i = 0; i < w.size(); ++i) perturbed[i] += delta[i];
  const LossAndGradient at_perturbed = LossAndGrad(perturbed, arch, batch);
  state.ApplyUpdate(w, at_perturbed.grad);
  return at_w.loss;
}

}  // namespace dpfl
