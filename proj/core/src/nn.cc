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
#include "dpfl/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpfl/errors.h"
#include "dpfl/rng.h"

namespace dpfl {
namespace {

thread_local std::uint64_t gradient_evaluations = 0;

std::size_t CheckedMulAdd(std::size_t a, std::size_t b, std::size_t c) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  if (b != 0 && a > (kMax - c) / b) {
    throw InvalidArgument("MLP parameter count overflows");
  }
  return a * b + c;
}

void CheckInputs(const ParameterVector& w, const MlpArchitecture& arch,
                 const BatchView& batch) {
  if (arch.num_layers() == 0) {
    throw InvalidArgument("architecture has no layers");
  }
  if (w.size() != arch.parameter_count()) {
    throw DimensionMismatch("parameter vector has " + std::to_string(w.size()) +
                            " entries, architecture needs " +
                            std::to_string(arch.parameter_count()));
  }
  if (batch.dim != arch.input_dim()) {
    throw DimensionMismatch("batch input dim " + std::to_string(batch.dim) +
                            " != architecture input dim " +
                            std::to_string(arch.input_dim()));
  }
  if (batch.inputs.size() != batch.labels.size() * batch.dim) {
    throw DimensionMismatch("batch input rows do not match label count");
  }
  if (batch.size() == 0) throw InvalidArgument("empty batch");
  const auto classes = static_cast<std::int64_t>(arch.num_classes());
  for (const std::int32_t label : batch.labels) {
    if (label < 0 || label >= classes) {
      throw InvalidArgument("label " + std::to_string(label) +
                            " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

// Per-sample forward pass. activations[0] is the input; activations[l+1] is
// the post-activation output of layer l (raw logits for the last layer).
class Forward {
 public:
  explicit Forward(const MlpArchitecture& arch) : arch_(arch) {
    activations_.resize(arch.widths().size());
    for (std::size_t l = 0; l < arch.widths().size(); ++l) {
      activations_[l].resize(arch.widths()[l]);
    }
  }

  void Run(const ParameterVector& w, std::span<const double> input) {
    std::copy(input.begin(), input.end(), activations_[0].begin());
    const auto& layers = arch_.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const LayerBlock& block = layers[l];
      const std::vector<double>& in = activations_[l];
      std::vector<double>& out = activations_[l + 1];
      const double* weights = w.data() + block.weight_offset;
      const double* bias = w.data() + block.bias_offset;
      const bool hidden = l + 1 < layers.size();
      for (std::size_t o = 0; o < block.fan_out; ++o) {
        const double* row = weights + o * block.fan_in;
        double z = bias[o];
        for (std::size_t i = 0; i < block.fan_in; ++i) z += row[i] * in[i];
        out[o] = hidden ? std::max(z, 0.0) : z;
      }
    }
  }

  const std::vector<double>& logits() const { return activations_.back(); }
  const std::vector<double>& activation(std::size_t l) const {
    return activations_[l];
  }

 private:
  const MlpArchitecture& arch_;
  std::vector<std::vector<double>> activations_;
};

// log-sum-exp(z) - z[label], written so the result is never negative.
double CrossEntropy(const std::vector<double>& logits, std::int32_t label) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (const double z : logits) sum += std::exp(z - top);
  return (top - logits[label]) + std::log(sum);
}

std::size_t ArgMax(const std::vector<double>& v) {
  return static_cast<std::size_t>(
      std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

}  // namespace

double L2Norm(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x * x;
  return std::sqrt(sum);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

MlpArchitecture::MlpArchitecture(std::vector<std::size_t> widths,
                                 Activation activation)
    : widths_(std::move(widths)), activation_(activation) {
  if (widths_.size() < 2) {
    throw InvalidArgument("MLP needs at least input and output widths");
  }
  if (std::find(widths_.begin(), widths_.end(), 0u) != widths_.end()) {
    throw InvalidArgument("MLP widths must be positive");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    LayerBlock block;
    block.fan_in = widths_[l];
    block.fan_out = widths_[l + 1];
    block.weight_offset = offset;
    block.bias_offset = CheckedMulAdd(block.fan_in, block.fan_out, offset);
    offset = CheckedMulAdd(1, block.fan_out, block.bias_offset);
    layers_.push_back(block);
  }
  parameter_count_ = offset;
}

std::string MlpArchitecture::ToString() const {
  std::ostringstream out;
  for (std::size_t l = 0; l < widths_.size(); ++l) {
    if (l > 0) out << '-';
    out << widths_[l];
  }
  return out.str();
}

ParameterVector InitParams(const MlpArchitecture& arch, std::uint64_t seed) {
  if (arch.num_layers() == 0) throw InvalidArgument("empty architecture");
  ParameterVector w(arch.parameter_count());
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kInit);
  for (const LayerBlock& block : arch.layers()) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(block.fan_in + block.fan_out));
    for (std::size_t i = block.weight_offset; i < block.bias_offset; ++i) {
      w[i] = limit * (2.0 * rng.Uniform01() - 1.0);
    }
  }
  return w;
}

LossAndGradient LossAndGrad(const ParameterVector& w,
                            const MlpArchitecture& arch, BatchView batch) {
  CheckInputs(w, arch, batch);
  ++gradient_evaluations;

  const auto& layers = arch.layers();
  Forward forward(arch);
  LossAndGradient result;
  result.grad = ParameterVector(w.size());
  double* grad = result.grad.data();

  // delta holds dLoss/dz for the layer currently being back-propagated.
  std::vector<double> delta(*std::max_element(arch.widths().begin(),
                                              arch.widths().end()));
  std::vector<double> upstream(delta.size());
  double loss_sum = 0.0;

  for (std::size_t n = 0; n < batch.size(); ++n) {
    forward.Run(w, batch.row(n));
    const std::vector<double>& logits = forward.logits();
    const std::int32_t label = batch.labels[n];
    loss_sum += CrossEntropy(logits, label);

    const double top = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
      delta[c] = std::exp(logits[c] - top);
      norm += delta[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) delta[c] /= norm;
    delta[static_cast<std::size_t>(label)] -= 1.0;

    for (std::size_t l = layers.size(); l-- > 0;) {
      const LayerBlock& block = layers[l];
      const std::vector<double>& in = forward.activation(l);
      double* gw = grad + block.weight_offset;
      double* gb = grad + block.bias_offset;
      for (std::size_t o = 0; o < block.fan_out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        if (d == 0.0) continue;
        double* row = gw + o * block.fan_in;
        for (std::size_t i = 0; i < block.fan_in; ++i) row[i] += d * in[i];
      }
      if (l == 0) break;
      // Back through W^T and the ReLU of the previous layer (derivative 0 at
      // 0, matching the forward max(z, 0) which stores exactly 0 there).
      const double* weights = w.data() + block.weight_offset;
      std::fill(upstream.begin(), upstream.begin() + block.fan_in, 0.0);
      for (std::size_t o = 0; o < block.fan_out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = weights + o * block.fan_in;
        for (std::size_t i = 0; i < block.fan_in; ++i) upstream[i] += row[i] * d;
      }
      for (std::size_t i = 0; i < block.fan_in; ++i) {
        delta[i] = in[i] > 0.0 ? upstream[i] : 0.0;
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  result.loss = loss_sum * scale;
  for (double& g : result.grad) g *= scale;
  return result;
}

Evaluation Evaluate(const ParameterVector& w, const MlpArchitecture& arch,
                    BatchView data) {
  CheckInputs(w, arch, data);
  Forward forward(arch);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    forward.Run(w, data.row(n));
    loss_sum += CrossEntropy(forward.logits(), data.labels[n]);
    if (ArgMax(forward.logits()) == static_cast<std::size_t>(data.labels[n])) {
      ++correct;
    }
  }
  const auto n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

double Loss(const ParameterVector& w, const MlpArchitecture& arch,
            BatchView data) {
  return Evaluate(w, arch, data).loss;
}

std::vector<double> Logits(const ParameterVector& w,
                           const MlpArchitecture& arch, BatchView data) {
  CheckInputs(w, arch, data);
  Forward forward(arch);
  std::vector<double> out;
  out.reserve(data.size() * arch.num_classes());
  for (std::size_t n = 0; n < data.size(); ++n) {
    forward.Run(w, data.row(n));
    out.insert(out.end(), forward.logits().begin(), forward.logits().end());
  }
  return out;
}

std::uint64_t GradientEvaluationCount() { return gradient_evaluations; }
void ResetGradientEvaluationCount() { gradient_evaluations = 0; }

}  // namespace dpfl
