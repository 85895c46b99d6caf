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
#ifndef DPFL_DATA_H_
#define DPFL_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpfl/nn.h"

namespace dpfl {

// Labeled examples, row-major inputs (n x dim).
struct Dataset {
  std::vector<double> inputs;
  std::vector<std::int32_t> labels;
  std::size_t dim = 0;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  BatchView view() const { return {inputs, labels, dim}; }

  // Copies the listed rows, in the order given.
  Batch Gather(std::span<const std::size_t> indices) const;
  Dataset Subset(std::span<const std::size_t> indices) const;

  std::vector<std::size_t> ClassCounts() const;

  // Throws InvalidArgument when shapes or labels are inconsistent.
  void Validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Gaussian blobs: class c ~ N(mu_c, I) where the class means are random unit
// directions scaled so that the expected distance between two means equals
// `separation`. Labels are balanced (n / classes each, +-1) and shuffled.
Dataset GenerateSynthetic(std::size_t classes, std::size_t dim, std::size_t n,
                          double separation, std::uint64_t seed);

// Shuffled train/test split; the last round(test_fraction * n) shuffled
// rows become the test set.
struct TrainTestSplit {
  Dataset train;
  Dataset test;
};
TrainTestSplit SplitTrainTest(const Dataset& ds, double test_fraction,
                              std::uint64_t seed);

// Binary dataset format (little-endian):
//   "DPDS" | u32 n | u32 dim | u32 classes | n*dim f32 inputs | n u32 labels
inline constexpr char kDatasetMagic[4] = {'D', 'P', 'D', 'S'};

std::string EncodeDataset(const Dataset& ds);
// Throws MalformedHeader, TruncatedPayload or LabelOutOfRange.
Dataset DecodeDataset(std::string_view bytes);
void SaveDataset(const std::filesystem::path& path, const Dataset& ds);
Dataset LoadDataset(const std::filesystem::path& path);

// Per-client example indices.
struct Partition {
  std::vector<std::vector<std::size_t>> shards;

  std::size_t num_clients() const { return shards.size(); }
  // Throws InvalidArgument unless shards are non-empty, pairwise disjoint,
  // in range, and (when `require_cover`) cover all n indices.
  void Validate(std::size_t n, bool require_cover = true) const;
};

// Random split into sizes that differ by at most one.
Partition PartitionIid(const Dataset& ds, std::size_t clients,
                       std::uint64_t seed);

// Per class, client proportions ~ Dir(alpha * 1_M); the shuffled class
// examples are cut in proportion (largest-remainder rounding). Clients left
// empty take one example from the currently largest shard.
Partition PartitionDirichlet(const Dataset& ds, std::size_t clients,
                             double alpha, std::uint64_t seed);

// Mean over clients of the total-variation distance between the client's
// class distribution and the global one.
double MeanLabelDistance(const Dataset& ds, const Partition& partition);

// Per-client class histograms, clients x classes.
std::vector<std::vector<std::size_t>> ClientClassCounts(
    const Dataset& ds, const Partition& partition);

// {"clients": [[idx, ...], ...]} with one array per client.
std::string PartitionToJson(const Partition& partition);

}  // namespace dpfl

#endif  // DPFL_DATA_H_
