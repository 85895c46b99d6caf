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

#include <algorithm>
#include <cmath>
#include <random>

#include "dpfl/errors.h"
#include "dpfl/io.h"

namespace dpfl {
namespace {

ParameterVector Shifted(const ParameterVector& w, double a,
                        const ParameterVector& u) {
  ParameterVector out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * u[i];
  return out;
}

}  // namespace

double EmpiricalSensitivity(const Federation& federation, std::size_t client,
                            const ParameterVector& global, std::size_t round,
                            std::uint64_t sample_seed, bool swap) {
  const Partition& partition = federation.partition();
  if (client >= partition.num_clients()) {
    throw InvalidArgument("client id out of range");
  }
  const std::vector<std::size_t>& shard = partition.shards[client];
  if (shard.size() < 2) {
    throw InvalidArgument("sensitivity probe needs a shard of >= 2 examples");
  }
  const std::size_t n = federation.train().size();
  if (shard.size() >= n) {
    throw InvalidArgument("no example outside the shard to swap in");
  }

  std::vector<std::size_t> neighbor = shard;
  if (swap) {
    Philox4x32 rng = MakeStream(sample_seed, StreamPurpose::kSensitivity);
    std::uniform_int_distribution<std::size_t> position(0, shard.size() - 1);
    std::uniform_int_distribution<std::size_t> example(0, n - 1);
    const std::size_t slot = position(rng);
    std::size_t replacement = example(rng);
    // Shards are sorted ascending.
    while (std::binary_search(shard.begin(), shard.end(), replacement)) {
      replacement = example(rng);
    }
    neighbor[slot] = replacement;
  }

  const ParameterVector a = federation.LocalTrain(shard, global, round, client);
  const ParameterVector b =
      federation.LocalTrain(neighbor, global, round, client);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

ParameterVector SampleDirection(const ParameterVector& w,
                                std::span<const LayerBlock> blocks,
                                DirectionNorm norm, Philox4x32& rng) {
  std::normal_distribution<double> gaussian(0.0, 1.0);
  ParameterVector d(w.size());
  if (norm == DirectionNorm::kUnit) {
    for (double& v : d) v = gaussian(rng);
    const double length = L2Norm(d.span());
    if (length > 0.0) {
      for (double& v : d) v /= length;
    }
    return d;
  }
  for (const LayerBlock& block : blocks) {
    if (block.end() > w.size()) {
      throw DimensionMismatch("probe block exceeds model length");
    }
    auto slice = d.span().subspan(block.begin(), block.size());
    for (double& v : slice) v = gaussian(rng);
    const double target = L2Norm(w.span().subspan(block.begin(), block.size()));
    const double length = L2Norm(slice);
    const double scale = length > 0.0 ? target / length : 0.0;
    for (double& v : slice) v *= scale;
  }
  return d;
}

SharpnessProbe ProbeSharpness(const LossFunction& loss,
                              const ParameterVector& w,
                              std::span<const LayerBlock> blocks,
                              std::span<const double> radii,
                              std::size_t directions, std::uint64_t seed,
                              DirectionNorm norm) {
  if (directions == 0) throw InvalidArgument("need at least one direction");
  if (std::find(radii.begin(), radii.end(), 0.0) == radii.end()) {
    throw InvalidArgument("sharpness radii must include 0");
  }
  SharpnessProbe probe;
  probe.radii.assign(radii.begin(), radii.end());
  probe.mean_increase.assign(radii.size(), 0.0);
  probe.directions = directions;

  const double base = loss(w);
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kProbe);
  for (std::size_t k = 0; k < directions; ++k) {
    const ParameterVector u = SampleDirection(w, blocks, norm, rng);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      probe.mean_increase[r] += loss(Shifted(w, radii[r], u)) - base;
    }
  }
  for (double& v : probe.mean_increase) v /= static_cast<double>(directions);
  return probe;
}

SharpnessProbe ProbeSharpness(const ParameterVector& w,
                              const MlpArchitecture& arch, BatchView data,
                              std::span<const double> radii,
                              std::size_t directions, std::uint64_t seed) {
  auto loss = [&](const ParameterVector& p) { return Loss(p, arch, data); };
  return ProbeSharpness(loss, w, arch.layers(), radii, directions, seed,
                        DirectionNorm::kFilter);
}

LandscapeSlice ProbeLandscape(const LossFunction& loss,
                              const ParameterVector& w,
                              std::span<const LayerBlock> blocks,
                              double extent, std::size_t resolution,
                              std::uint64_t seed, DirectionNorm norm) {
  if (resolution < 2) throw InvalidArgument("landscape resolution must be >= 2");
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw InvalidArgument("landscape extent must be finite and > 0");
  }
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kProbe);
  const ParameterVector u = SampleDirection(w, blocks, norm, rng);
  const ParameterVector v = SampleDirection(w, blocks, norm, rng);

  LandscapeSlice slice;
  slice.resolution = resolution;
  slice.coords.resize(resolution);
  const double span = static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    // Numerator is exactly 0 at the middle index of odd resolutions.
    slice.coords[i] = extent * (2.0 * static_cast<double>(i) - span) / span;
  }
  slice.loss.resize(resolution * resolution);
  ParameterVector point(w.size());
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; j < resolution; ++j) {
      const double a = slice.coords[i];
      const double b = slice.coords[j];
      for (std::size_t k = 0; k < w.size(); ++k) {
        point[k] = w[k] + a * u[k] + b * v[k];
      }
      slice.loss[i * resolution + j] = loss(point);
    }
  }
  return slice;
}

LandscapeSlice ProbeLandscape(const ParameterVector& w,
                              const MlpArchitecture& arch, BatchView data,
                              double extent, std::size_t resolution,
                              std::uint64_t seed) {
  auto loss = [&](const ParameterVector& p) { return Loss(p, arch, data); };
  return ProbeLandscape(loss, w, arch.layers(), extent, resolution, seed,
                        DirectionNorm::kFilter);
}

void WriteSharpnessCsv(std::ostream& out, const SharpnessProbe& probe) {
  out << "# sharpness probe, directions=" << probe.directions << '\n';
  out << "radius,mean_loss_increase\n";
  for (std::size_t i = 0; i < probe.radii.size(); ++i) {
    out << FormatDouble(probe.radii[i]) << ','
        << FormatDouble(probe.mean_increase[i]) << '\n';
  }
}

void WriteLandscapeCsv(std::ostream& out, const LandscapeSlice& slice) {
  out << "# landscape slice, resolution=" << slice.resolution
      << ", rows=a, columns=b\n";
  out << "a\\b";
  for (const double b : slice.coords) out << ',' << FormatDouble(b);
  out << '\n';
  for (std::size_t i = 0; i < slice.resolution; ++i) {
    out << FormatDouble(slice.coords[i]);
    for (std::size_t j = 0; j < slice.resolution; ++j) {
      out << ',' << FormatDouble(slice.at(i, j));
    }
    out << '\n';
  }
}

}  // namespace dpfl
