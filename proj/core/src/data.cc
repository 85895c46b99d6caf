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
#include "dpfl/data.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "dpfl/errors.h"
#include "dpfl/io.h"
#include "dpfl/rng.h"
#include "json.hpp"

namespace dpfl {
namespace {

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

Batch Dataset::Gather(std::span<const std::size_t> indices) const {
  Batch batch;
  batch.dim = dim;
  batch.inputs.reserve(indices.size() * dim);
  batch.labels.reserve(indices.size());
  for (const std::size_t i : indices) {
    const auto row = inputs.begin() + static_cast<std::ptrdiff_t>(i * dim);
    batch.inputs.insert(batch.inputs.end(), row,
                        row + static_cast<std::ptrdiff_t>(dim));
    batch.labels.push_back(labels[i]);
  }
  return batch;
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Batch batch = Gather(indices);
  Dataset out;
  out.inputs = std::move(batch.inputs);
  out.labels = std::move(batch.labels);
  out.dim = dim;
  out.classes = classes;
  return out;
}

std::vector<std::size_t> Dataset::ClassCounts() const {
  std::vector<std::size_t> counts(classes, 0);
  for (const std::int32_t label : labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

void Dataset::Validate() const {
  if (dim == 0) throw InvalidArgument("dataset input dim must be > 0");
  if (classes == 0) throw InvalidArgument("dataset needs at least one class");
  if (inputs.size() != labels.size() * dim) {
    throw DimensionMismatch("dataset inputs do not match n * dim");
  }
  for (const std::int32_t label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw InvalidArgument("dataset label " + std::to_string(label) +
                            " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

Dataset GenerateSynthetic(std::size_t classes, std::size_t dim, std::size_t n,
                          double separation, std::uint64_t seed) {
  if (classes < 2) throw InvalidArgument("synthetic data needs >= 2 classes");
  if (dim == 0) throw InvalidArgument("synthetic data needs dim >= 1");
  if (n < classes) throw InvalidArgument("synthetic data needs n >= classes");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw InvalidArgument("separation must be finite and >= 0");
  }

  Philox4x32 rng = MakeStream(seed, StreamPurpose::kData);
  std::normal_distribution<double> gaussian(0.0, 1.0);

  // Independent random unit vectors have E||u - u'||^2 = 2.
  const double radius = separation / std::sqrt(2.0);
  std::vector<double> means(classes * dim);
  for (std::size_t c = 0; c < classes; ++c) {
    double* mean = means.data() + c * dim;
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        mean[j] = gaussian(rng);
        norm += mean[j] * mean[j];
      }
    } while (norm == 0.0);
    const double scale = radius / std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) mean[j] *= scale;
  }

  Dataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = static_cast<std::int32_t>(i % classes);
  }
  std::shuffle(ds.labels.begin(), ds.labels.end(), rng);
  ds.inputs.resize(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double* mean = means.data() + static_cast<std::size_t>(ds.labels[i]) * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      // Stored at f32 precision so the binary format round-trips exactly.
      ds.inputs[i * dim + j] =
          static_cast<double>(static_cast<float>(mean[j] + gaussian(rng)));
    }
  }
  return ds;
}

TrainTestSplit SplitTrainTest(const Dataset& ds, double test_fraction,
                              std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order = Iota(ds.size());
  Philox4x32 rng = MakeStream(seed ^ 0x5eed5eedULL, StreamPurpose::kData);
  std::shuffle(order.begin(), order.end(), rng);
  const auto test_n = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(ds.size())));
  if (test_n == 0 || test_n >= ds.size()) {
    throw InvalidArgument("train/test split leaves an empty side");
  }
  const std::size_t train_n = ds.size() - test_n;
  std::span<const std::size_t> all(order);
  return {ds.Subset(all.first(train_n)), ds.Subset(all.subspan(train_n))};
}

std::string EncodeDataset(const Dataset& ds) {
  ds.Validate();
  std::string out(kDatasetMagic, 4);
  le::PutU32(out, static_cast<std::uint32_t>(ds.size()));
  le::PutU32(out, static_cast<std::uint32_t>(ds.dim));
  le::PutU32(out, static_cast<std::uint32_t>(ds.classes));
  out.reserve(out.size() + 4 * ds.inputs.size() + 4 * ds.labels.size());
  for (const double v : ds.inputs) le::PutF32(out, static_cast<float>(v));
  for (const std::int32_t label : ds.labels) {
    le::PutU32(out, static_cast<std::uint32_t>(label));
  }
  return out;
}

Dataset DecodeDataset(std::string_view bytes) {
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < kHeader) {
    throw MalformedHeader("dataset header needs 16 bytes, got " +
                          std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kDatasetMagic, 4) != 0) {
    throw MalformedHeader("dataset magic mismatch");
  }
  const std::uint32_t n = le::GetU32(bytes.data() + 4);
  const std::uint32_t dim = le::GetU32(bytes.data() + 8);
  const std::uint32_t classes = le::GetU32(bytes.data() + 12);
  if (dim == 0 || classes == 0) {
    throw MalformedHeader("dataset header has zero dim or class count");
  }
  const std::size_t payload = 4 * (static_cast<std::size_t>(n) * dim + n);
  if (bytes.size() < kHeader + payload) {
    throw TruncatedPayload("dataset truncated: expected " +
                           std::to_string(kHeader + payload) + " bytes, got " +
                           std::to_string(bytes.size()));
  }
  if (bytes.size() > kHeader + payload) {
    throw MalformedHeader("dataset has trailing bytes after payload");
  }
  Dataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.inputs.resize(static_cast<std::size_t>(n) * dim);
  const char* p = bytes.data() + kHeader;
  for (double& v : ds.inputs) {
    v = le::GetF32(p);
    p += 4;
  }
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    const std::uint32_t label = le::GetU32(p);
    if (label >= classes) {
      throw LabelOutOfRange("label " + std::to_string(label) + " at row " +
                            std::to_string(i) + " >= classes " +
                            std::to_string(classes));
    }
    ds.labels[i] = static_cast<std::int32_t>(label);
  }
  return ds;
}

void SaveDataset(const std::filesystem::path& path, const Dataset& ds) {
  WriteFileAtomic(path, EncodeDataset(ds));
}

Dataset LoadDataset(const std::filesystem::path& path) {
  return DecodeDataset(ReadFile(path));
}

void Partition::Validate(std::size_t n, bool require_cover) const {
  std::vector<char> seen(n, 0);
  std::size_t total = 0;
  for (std::size_t c = 0; c < shards.size(); ++c) {
    if (shards[c].empty()) {
      throw InvalidArgument("client " + std::to_string(c) + " has no examples");
    }
    for (const std::size_t i : shards[c]) {
      if (i >= n) throw InvalidArgument("partition index out of range");
      if (seen[i]) throw InvalidArgument("partition shards overlap");
      seen[i] = 1;
      ++total;
    }
  }
  if (require_cover && total != n) {
    throw InvalidArgument("partition does not cover the dataset");
  }
}

Partition PartitionIid(const Dataset& ds, std::size_t clients,
                       std::uint64_t seed) {
  if (clients == 0) throw InvalidArgument("need at least one client");
  if (ds.size() < clients) {
    throw InvalidArgument("fewer examples than clients");
  }
  std::vector<std::size_t> order = Iota(ds.size());
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kPartition);
  std::shuffle(order.begin(), order.end(), rng);
  Partition partition;
  partition.shards.resize(clients);
  const std::size_t base = ds.size() / clients;
  const std::size_t extra = ds.size() % clients;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < clients; ++c) {
    const std::size_t count = base + (c < extra ? 1 : 0);
    partition.shards[c].assign(order.begin() + static_cast<std::ptrdiff_t>(offset),
                               order.begin() +
                                   static_cast<std::ptrdiff_t>(offset + count));
    offset += count;
  }
  return partition;
}

Partition PartitionDirichlet(const Dataset& ds, std::size_t clients,
                             double alpha, std::uint64_t seed) {
  if (clients == 0) throw InvalidArgument("need at least one client");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("Dirichlet alpha must be finite and > 0");
  }
  if (ds.size() < clients) {
    throw InvalidArgument("fewer examples than clients");
  }
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kPartition);

  std::vector<std::vector<std::size_t>> by_class(ds.classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }

  Partition partition;
  partition.shards.resize(clients);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> proportions(clients);
  std::vector<std::size_t> counts(clients);
  std::vector<std::size_t> by_remainder(clients);
  for (std::vector<std::size_t>& members : by_class) {
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);

    double sum = 0.0;
    for (double& p : proportions) {
      p = gamma(rng);
      sum += p;
    }
    if (sum == 0.0) {
      // Every gamma draw underflowed (tiny alpha): the limit puts all mass
      // on one client.
      std::uniform_int_distribution<std::size_t> pick(0, clients - 1);
      std::fill(proportions.begin(), proportions.end(), 0.0);
      proportions[pick(rng)] = 1.0;
      sum = 1.0;
    }

    const auto n_class = static_cast<double>(members.size());
    std::size_t assigned = 0;
    std::vector<double> remainders(clients);
    for (std::size_t c = 0; c < clients; ++c) {
      const double exact = proportions[c] / sum * n_class;
      counts[c] = static_cast<std::size_t>(std::floor(exact));
      remainders[c] = exact - static_cast<double>(counts[c]);
      assigned += counts[c];
    }
    std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) {
                       return remainders[a] > remainders[b];
                     });
    for (std::size_t k = 0; assigned < members.size(); ++k, ++assigned) {
      ++counts[by_remainder[k % clients]];
    }

    std::size_t offset = 0;
    for (std::size_t c = 0; c < clients; ++c) {
      auto& shard = partition.shards[c];
      shard.insert(shard.end(), members.begin() + static_cast<std::ptrdiff_t>(offset),
                   members.begin() + static_cast<std::ptrdiff_t>(offset + counts[c]));
      offset += counts[c];
    }
  }

  for (auto& shard : partition.shards) {
    if (!shard.empty()) continue;
    auto largest = std::max_element(
        partition.shards.begin(), partition.shards.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    shard.push_back(largest->back());
    largest->pop_back();
  }
  for (auto& shard : partition.shards) std::sort(shard.begin(), shard.end());
  return partition;
}

std::vector<std::vector<std::size_t>> ClientClassCounts(
    const Dataset& ds, const Partition& partition) {
  std::vector<std::vector<std::size_t>> counts(
      partition.num_clients(), std::vector<std::size_t>(ds.classes, 0));
  for (std::size_t c = 0; c < partition.num_clients(); ++c) {
    for (const std::size_t i : partition.shards[c]) {
      ++counts[c][static_cast<std::size_t>(ds.labels[i])];
    }
  }
  return counts;
}

double MeanLabelDistance(const Dataset& ds, const Partition& partition) {
  if (partition.num_clients() == 0) return 0.0;
  const std::vector<std::size_t> global = ds.ClassCounts();
  const auto n = static_cast<double>(ds.size());
  const auto per_client = ClientClassCounts(ds, partition);
  double total = 0.0;
  for (std::size_t c = 0; c < per_client.size(); ++c) {
    const auto shard_n = static_cast<double>(partition.shards[c].size());
    double tv = 0.0;
    for (std::size_t k = 0; k < ds.classes; ++k) {
      tv += std::abs(static_cast<double>(per_client[c][k]) / shard_n -
                     static_cast<double>(global[k]) / n);
    }
    total += 0.5 * tv;
  }
  return total / static_cast<double>(per_client.size());
}

std::string PartitionToJson(const Partition& partition) {
  nlohmann::json doc;
  doc["num_clients"] = partition.num_clients();
  doc["clients"] = partition.shards;
  return doc.dump() + "\n";
}

}  // namespace dpfl
