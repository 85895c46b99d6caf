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
#ifndef DPFL_NN_H_
#define DPFL_NN_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dpfl {

// Flat vector holding every weight of a model, or anything living in the
// same space (updates, gradients, perturbations, noise).
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t size, double fill = 0.0)
      : values_(size, fill) {}
  explicit ParameterVector(std::vector<double> values)
      : values_(std::move(values)) {}
  ParameterVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  const std::vector<double>& values() const { return values_; }

  // Bitwise element equality.
  friend bool operator==(const ParameterVector&,
                         const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

double L2Norm(std::span<const double> v);
double Dot(std::span<const double> a, std::span<const double> b);
// y += a * x
void Axpy(double a, std::span<const double> x, std::span<double> y);
bool AllFinite(std::span<const double> v);

enum class Activation { kRelu };

// Index range of one dense layer inside a ParameterVector. Weights are
// stored row-major as fan_out x fan_in, immediately followed by the bias.
struct LayerBlock {
  std::size_t weight_offset;
  std::size_t bias_offset;
  std::size_t fan_in;
  std::size_t fan_out;

  std::size_t begin() const { return weight_offset; }
  std::size_t end() const { return bias_offset + fan_out; }
  std::size_t size() const { return end() - begin(); }
};

// Fully connected network: widths = {input, hidden..., classes}.
class MlpArchitecture {
 public:
  MlpArchitecture() = default;
  // Throws InvalidArgument on fewer than two widths, a zero width, or a
  // parameter count that overflows.
  explicit MlpArchitecture(std::vector<std::size_t> widths,
                           Activation activation = Activation::kRelu);

  const std::vector<std::size_t>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t num_classes() const { return widths_.back(); }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t parameter_count() const { return parameter_count_; }
  const std::vector<LayerBlock>& layers() const { return layers_; }

  std::string ToString() const;
  friend bool operator==(const MlpArchitecture& a, const MlpArchitecture& b) {
    return a.widths_ == b.widths_ && a.activation_ == b.activation_;
  }

 private:
  std::vector<std::size_t> widths_;
  Activation activation_ = Activation::kRelu;
  std::vector<LayerBlock> layers_;
  std::size_t parameter_count_ = 0;
};

// Non-owning view of examples: row-major inputs (rows x dim) and labels.
struct BatchView {
  std::span<const double> inputs;
  std::span<const std::int32_t> labels;
  std::size_t dim = 0;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return inputs.subspan(i * dim, dim);
  }
};

struct Batch {
  std::vector<double> inputs;
  std::vector<std::int32_t> labels;
  std::size_t dim = 0;

  std::size_t size() const { return labels.size(); }
  BatchView view() const { return {inputs, labels, dim}; }
  operator BatchView() const { return view(); }  // NOLINT
};

// Glorot-uniform weights, zero biases; a pure function of (arch, seed).
ParameterVector InitParams(const MlpArchitecture& arch, std::uint64_t seed);

struct LossAndGradient {
  double loss = 0.0;
  ParameterVector grad;
};

// Mean softmax cross-entropy over the batch and its exact gradient.
// Samples are reduced in index order. Throws DimensionMismatch or
// InvalidArgument (empty batch, label out of range).
LossAndGradient LossAndGrad(const ParameterVector& w,
                            const MlpArchitecture& arch, BatchView batch);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean loss and argmax accuracy; ties resolve to the lowest class index.
Evaluation Evaluate(const ParameterVector& w, const MlpArchitecture& arch,
                    BatchView data);

// Mean loss only (no gradient).
double Loss(const ParameterVector& w, const MlpArchitecture& arch,
            BatchView data);

// Logits for every row, row-major (rows x classes).
std::vector<double> Logits(const ParameterVector& w,
                           const MlpArchitecture& arch, BatchView data);

// Number of LossAndGrad calls made on the calling thread.
std::uint64_t GradientEvaluationCount();
void ResetGradientEvaluationCount();

}  // namespace dpfl

#endif  // DPFL_NN_H_
