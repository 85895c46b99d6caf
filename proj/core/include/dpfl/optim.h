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
#ifndef DPFL_OPTIM_H_
#define DPFL_OPTIM_H_

#include <cstddef>

#include "dpfl/nn.h"

namespace dpfl {

// Gradient norms at or below this are treated as zero by SamPerturbation.
inline constexpr double kSamNormFloor = 1e-12;

struct OptimizerConfig {
  double learning_rate = 0.1;  // base rate eta_0
  double decay = 0.005;        // eta_t = eta_0 / (1 + decay * t), per round
  double momentum = 0.5;       // heavy-ball coefficient, in [0, 1)
  double rho = 0.5;            // SAM perturbation radius

  // Throws InvalidArgument.
  void Validate() const;
};

// Local optimizer state for one client in one round.
class OptimizerState {
 public:
  OptimizerState(const OptimizerConfig& config, std::size_t dim);

  // Zeroes the momentum buffer and step counter and fixes the learning rate
  // for communication round `round`.
  void ResetForRound(std::size_t round);

  double learning_rate() const { return learning_rate_; }
  double momentum() const { return config_.momentum; }
  double rho() const { return config_.rho; }
  std::size_t step() const { return step_; }
  const ParameterVector& momentum_buffer() const { return buffer_; }
  const OptimizerConfig& config() const { return config_; }

  // Learning rate of round `round` under the inverse-time schedule.
  static double ScheduledRate(const OptimizerConfig& config,
                              std::size_t round);

  // v <- mu * v + direction; w <- w - eta * v.
  void ApplyUpdate(ParameterVector& w, const ParameterVector& direction);

 private:
  OptimizerConfig config_;
  ParameterVector buffer_;
  double learning_rate_;
  std::size_t step_ = 0;
};

// rho * g / ||g||_2, or zero when ||g||_2 <= kSamNormFloor.
ParameterVector SamPerturbation(const ParameterVector& g, double rho);

// One plain step; returns the mini-batch loss at w. One gradient call.
double SgdStep(ParameterVector& w, OptimizerState& state, BatchView batch,
               const MlpArchitecture& arch);

// One sharpness-aware step: gradient at w, ascend to w + delta, gradient at
// the perturbed point on the same batch, then the momentum update with that
// second gradient. Returns the loss at the unperturbed w. Two gradient calls.
double SamStep(ParameterVector& w, OptimizerState& state, BatchView batch,
               const MlpArchitecture& arch);

}  // namespace dpfl

#endif  // DPFL_OPTIM_H_
