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
#ifndef DPFL_PROBES_H_
#define DPFL_PROBES_H_

// Read-only diagnostics on trained models: sensitivity of local updates to a
// one-example change, and loss-landscape sharpness around a model.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "dpfl/federation.h"
#include "dpfl/nn.h"
#include "dpfl/rng.h"

namespace dpfl {

// Squared L2 distance between the local updates a client computes from
// `global` on its shard and on the same shard with one example swapped for
// an example outside the shard. Both runs share every random stream and
// skip clipping and noise. The swapped position and replacement are chosen
// by `sample_seed`; with `swap` false both runs use the unmodified shard.
// Throws InvalidArgument for shards smaller than two examples.
double EmpiricalSensitivity(const Federation& federation, std::size_t client,
                            const ParameterVector& global, std::size_t round,
                            std::uint64_t sample_seed, bool swap = true);

using LossFunction = std::function<double(const ParameterVector&)>;

enum class DirectionNorm {
  kFilter,  // each block rescaled to the model's norm on that block
  kUnit,    // whole direction rescaled to unit L2 norm
};

// Gaussian random direction in parameter space. With kFilter, each block's
// slice is rescaled to ||w_block||; coordinates outside every block are 0.
ParameterVector SampleDirection(const ParameterVector& w,
                                std::span<const LayerBlock> blocks,
                                DirectionNorm norm, Philox4x32& rng);

struct SharpnessProbe {
  std::vector<double> radii;
  std::vector<double> mean_increase;  // mean loss(w + r u) - loss(w)
  std::size_t directions = 0;
};

// Directions are drawn from MakeStream(seed, kProbe) in order.
SharpnessProbe ProbeSharpness(const LossFunction& loss,
                              const ParameterVector& w,
                              std::span<const LayerBlock> blocks,
                              std::span<const double> radii,
                              std::size_t directions, std::uint64_t seed,
                              DirectionNorm norm = DirectionNorm::kFilter);

// MLP loss on `data`, filter-normalized per layer.
SharpnessProbe ProbeSharpness(const ParameterVector& w,
                              const MlpArchitecture& arch, BatchView data,
                              std::span<const double> radii,
                              std::size_t directions, std::uint64_t seed);

struct LandscapeSlice {
  std::vector<double> coords;  // shared by both axes
  std::vector<double> loss;    // row-major, loss[i * n + j] at (coords[i], coords[j])
  std::size_t resolution = 0;

  double at(std::size_t i, std::size_t j) const {
    return loss[i * resolution + j];
  }
};

// Loss on the grid w + a u + b v, a, b in [-extent, extent] with
// `resolution` points per axis (odd resolutions contain a = b = 0 exactly).
// Throws InvalidArgument for resolution < 2.
LandscapeSlice ProbeLandscape(const LossFunction& loss,
                              const ParameterVector& w,
                              std::span<const LayerBlock> blocks,
                              double extent, std::size_t resolution,
                              std::uint64_t seed,
                              DirectionNorm norm = DirectionNorm::kFilter);

LandscapeSlice ProbeLandscape(const ParameterVector& w,
                              const MlpArchitecture& arch, BatchView data,
                              double extent, std::size_t resolution,
                              std::uint64_t seed);

void WriteSharpnessCsv(std::ostream& out, const SharpnessProbe& probe);
void WriteLandscapeCsv(std::ostream& out, const LandscapeSlice& slice);

}  // namespace dpfl

#endif  // DPFL_PROBES_H_
