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
#ifndef DPFL_FEDERATION_H_
#define DPFL_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpfl/accountant.h"
#include "dpfl/data.h"
#include "dpfl/metrics.h"
#include "dpfl/nn.h"
#include "dpfl/optim.h"
#include "dpfl/privacy.h"
#include "dpfl/rng.h"

namespace dpfl {

enum class Method {
  kDpFedAvg,      // SGD locally, dense updates
  kDpFedSam,      // SAM locally, dense updates
  kDpFedSamTopK,  // SAM locally, per-layer top-k updates
  kFedSmpTopK,    // SGD locally, per-layer top-k updates
  kFedSmpRandK,   // SGD locally, per-layer random-k updates
};

std::string_view MethodName(Method method);
// Accepts the names MethodName produces. Throws InvalidArgument.
Method ParseMethod(std::string_view name);
bool UsesSam(Method method);
bool IsSparsified(Method method);

enum class SparsifyMode { kTopK, kRandK };

struct FederationConfig {
  Method method = Method::kDpFedSam;
  std::size_t rounds = 200;
  std::size_t local_epochs = 30;
  std::size_t batch_size = 32;
  double sparsity = 1.0;  // fraction p of each layer kept by sparsified methods
  std::vector<std::size_t> hidden_widths = {32};
  PrivacySpec privacy;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t histogram_bins = 32;

  // Throws InvalidArgument.
  void Validate() const;
};

struct LocalUpdateReport {
  std::size_t client = 0;
  ParameterVector raw_update;       // w^{t,K} - w^{t,0}
  double pre_clip_norm = 0.0;       // norm of the (masked) update being clipped
  double clip_factor = 1.0;
  ParameterVector noised_update;    // clipped, plus noise on retained coords
  std::vector<std::uint8_t> mask;   // empty for dense methods
  double train_loss = 0.0;          // mean mini-batch loss over local steps
  std::size_t steps = 0;
};

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::size_t> clients;
  double alpha_bar = 0.0;
  double alpha_tilde = 0.0;
  double mean_norm = 0.0;
  double fraction_below_clip = 0.0;
  NormHistogram histogram;
  std::vector<double> norms;  // pre-clip norms in client order
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double epsilon = 0.0;
  double best_order = 0.0;
};

// m distinct ids from [0, M) uniformly without replacement, sorted
// ascending. Throws InvalidArgument unless 1 <= m <= M.
std::vector<std::size_t> SampleClients(std::size_t total, std::size_t sampled,
                                       Philox4x32& rng);
std::vector<std::size_t> SampleClients(std::size_t total, std::size_t sampled,
                                       std::uint64_t seed);

struct SparsifyResult {
  ParameterVector masked;
  std::vector<std::uint8_t> mask;
};

// Keeps ceil(p * layer_size) coordinates of every layer block (weights and
// bias together): the largest magnitudes (ties to the lower index) for
// kTopK, a uniform random subset for kRandK. Throws InvalidArgument unless
// p is in (0, 1].
SparsifyResult Sparsify(const ParameterVector& update,
                        std::span<const LayerBlock> layers, double p,
                        SparsifyMode mode, Philox4x32& rng);

// w + (1/normalizer) * sum of noised updates, accumulated in ascending
// client-id order. `normalizer` is the number of sampled clients m.
ParameterVector Aggregate(std::span<const LocalUpdateReport> reports,
                          const ParameterVector& global,
                          std::size_t normalizer);
// Normalizes by reports.size().
ParameterVector Aggregate(std::span<const LocalUpdateReport> reports,
                          const ParameterVector& global);

// Knobs that switch off parts of the client pipeline, for probes.
struct LocalOptions {
  bool clip = true;
  bool noise = true;
};

struct RunResult {
  std::vector<RoundRecord> records;
  ParameterVector final_model;
};

// Runs the client-level DP federated training loop over a fixed partition of
// the training set.
class Federation {
 public:
  // Throws InvalidArgument when the partition does not match `train`.
  Federation(FederationConfig config, Dataset train, Dataset test,
             Partition partition);

  const FederationConfig& config() const { return config_; }
  const MlpArchitecture& architecture() const { return arch_; }
  const Dataset& train() const { return train_; }
  const Dataset& test() const { return test_; }
  const Partition& partition() const { return partition_; }

  ParameterVector InitialModel() const;

  // Local steps count for a shard of the given size.
  std::size_t LocalSteps(std::size_t shard_size) const;

  // K local optimizer steps from `global` on the given examples; returns
  // the update w^{t,K} - w^{t,0}. `mean_loss` receives the average
  // mini-batch loss when non-null.
  ParameterVector LocalTrain(std::span<const std::size_t> shard,
                             const ParameterVector& global, std::size_t round,
                             std::size_t client,
                             double* mean_loss = nullptr) const;

  // Full client pipeline: local training, optional sparsification, clip,
  // noise on retained coordinates.
  LocalUpdateReport LocalRound(std::size_t client,
                               const ParameterVector& global,
                               std::size_t round,
                               const LocalOptions& options = {}) const;
  LocalUpdateReport LocalRound(std::size_t client,
                               std::span<const std::size_t> shard,
                               const ParameterVector& global,
                               std::size_t round,
                               const LocalOptions& options) const;

  // One communication round. Advances `global` and `ledger`.
  RoundRecord RunRound(std::size_t round, ParameterVector& global,
                       PrivacyLedger& ledger, std::size_t workers,
                       std::vector<LocalUpdateReport>* reports = nullptr) const;

  using RoundCallback = std::function<void(const RoundRecord&)>;
  RunResult Run(std::size_t workers = 1,
                const RoundCallback& on_round = nullptr) const;

 private:
  FederationConfig config_;
  Dataset train_;
  Dataset test_;
  Partition partition_;
  MlpArchitecture arch_;
  std::vector<double> rdp_curve_;
  std::vector<double> histogram_edges_;
};

// Header line and one row per round:
// t,eps,alpha_bar,alpha_tilde,mean_norm,train_loss,test_loss,test_acc
void WriteRecordsCsvHeader(std::ostream& out);
void WriteRecordCsvRow(std::ostream& out, const RoundRecord& record);

}  // namespace dpfl

#endif  // DPFL_FEDERATION_H_
