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
#include "dpfl/federation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "dpfl/errors.h"
#include "dpfl/io.h"

namespace dpfl {
namespace {

constexpr struct {
  Method method;
  std::string_view name;
} kMethodNames[] = {
    {Method::kDpFedAvg, "dp-fedavg"},
    {Method::kDpFedSam, "dp-fedsam"},
    {Method::kDpFedSamTopK, "dp-fedsam-topk"},
    {Method::kFedSmpTopK, "fed-smp-topk"},
    {Method::kFedSmpRandK, "fed-smp-randk"},
};

std::size_t KeepCount(std::size_t layer_size, double p) {
  const double exact = p * static_cast<double>(layer_size);
  auto keep = static_cast<std::size_t>(std::ceil(exact));
  return std::clamp<std::size_t>(keep, 1, layer_size);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads join.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> threads;
    const std::size_t count = std::min(workers, n);
    threads.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      threads.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(n);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view MethodName(Method method) {
  for (const auto& entry : kMethodNames) {
    if (entry.method == method) return entry.name;
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (const auto& entry : kMethodNames) {
    if (entry.name == name) return entry.method;
  }
  std::string valid;
  for (const auto& entry : kMethodNames) {
    if (!valid.empty()) valid += ", ";
    valid += entry.name;
  }
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (valid: " + valid + ")");
}

bool UsesSam(Method method) {
  return method == Method::kDpFedSam || method == Method::kDpFedSamTopK;
}

bool IsSparsified(Method method) {
  return method == Method::kDpFedSamTopK || method == Method::kFedSmpTopK ||
         method == Method::kFedSmpRandK;
}

void FederationConfig::Validate() const {
  if (rounds == 0) throw InvalidArgument("rounds T must be >= 1");
  if (local_epochs == 0) throw InvalidArgument("local epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw InvalidArgument("sparsity p must lie in (0, 1]");
  }
  if (!IsSparsified(method) && sparsity != 1.0) {
    throw InvalidArgument(std::string(MethodName(method)) +
                          " does not sparsify; sparsity must be 1");
  }
  for (const std::size_t w : hidden_widths) {
    if (w == 0) throw InvalidArgument("hidden widths must be positive");
  }
  if (histogram_bins == 0) throw InvalidArgument("histogram bins must be >= 1");
  privacy.Validate();
  optimizer.Validate();
}

std::vector<std::size_t> SampleClients(std::size_t total, std::size_t sampled,
                                       Philox4x32& rng) {
  if (sampled == 0 || sampled > total) {
    throw InvalidArgument("cannot sample " + std::to_string(sampled) +
                          " of " + std::to_string(total) + " clients");
  }
  std::vector<std::size_t> ids(total);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `sampled` slots become a uniform subset.
  for (std::size_t i = 0; i < sampled; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(sampled);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::size_t> SampleClients(std::size_t total, std::size_t sampled,
                                       std::uint64_t seed) {
  Philox4x32 rng = MakeStream(seed, StreamPurpose::kSampling);
  return SampleClients(total, sampled, rng);
}

SparsifyResult Sparsify(const ParameterVector& update,
                        std::span<const LayerBlock> layers, double p,
                        SparsifyMode mode, Philox4x32& rng) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidArgument("sparsity p must lie in (0, 1]");
  }
  SparsifyResult result;
  result.masked = ParameterVector(update.size());
  result.mask.assign(update.size(), 0);
  std::vector<std::size_t> order;
  for (const LayerBlock& layer : layers) {
    if (layer.end() > update.size()) {
      throw DimensionMismatch("layer block exceeds update length");
    }
    const std::size_t size = layer.size();
    const std::size_t keep = KeepCount(size, p);
    order.resize(size);
    std::iota(order.begin(), order.end(), layer.begin());
    if (keep < size) {
      if (mode == SparsifyMode::kTopK) {
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                         order.end(), [&](std::size_t a, std::size_t b) {
                           const double ma = std::abs(update[a]);
                           const double mb = std::abs(update[b]);
                           return ma != mb ? ma > mb : a < b;
                         });
      } else {
        for (std::size_t i = 0; i < keep; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, size - 1);
          std::swap(order[i], order[pick(rng)]);
        }
      }
    }
    for (std::size_t i = 0; i < keep; ++i) result.mask[order[i]] = 1;
  }
  for (std::size_t i = 0; i < update.size(); ++i) {
    if (result.mask[i]) result.masked[i] = update[i];
  }
  return result;
}

ParameterVector Aggregate(std::span<const LocalUpdateReport> reports,
                          const ParameterVector& global,
                          std::size_t normalizer) {
  if (reports.empty()) throw InvalidArgument("no client updates to aggregate");
  if (normalizer == 0) throw InvalidArgument("aggregation normalizer is zero");
  std::vector<const LocalUpdateReport*> ordered;
  ordered.reserve(reports.size());
  for (const LocalUpdateReport& r : reports) {
    if (r.noised_update.size() != global.size()) {
      throw DimensionMismatch("client update length differs from model");
    }
    ordered.push_back(&r);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->client < b->client; });
  ParameterVector sum(global.size());
  for (const LocalUpdateReport* r : ordered) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += r->noised_update[i];
  }
  const double scale = 1.0 / static_cast<double>(normalizer);
  ParameterVector next = global;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += scale * sum[i];
  return next;
}

ParameterVector Aggregate(std::span<const LocalUpdateReport> reports,
                          const ParameterVector& global) {
  return Aggregate(reports, global, reports.size());
}

Federation::Federation(FederationConfig config, Dataset train, Dataset test,
                       Partition partition)
    : config_(std::move(config)),
      train_(std::move(train)),
      test_(std::move(test)),
      partition_(std::move(partition)) {
  config_.Validate();
  train_.Validate();
  if (test_.size() > 0) {
    test_.Validate();
    if (test_.dim != train_.dim || test_.classes != train_.classes) {
      throw DimensionMismatch("train and test sets have different shapes");
    }
  }
  partition_.Validate(train_.size(), /*require_cover=*/false);
  if (partition_.num_clients() != config_.privacy.total_clients) {
    throw InvalidArgument("partition has " +
                          std::to_string(partition_.num_clients()) +
                          " clients, config expects " +
                          std::to_string(config_.privacy.total_clients));
  }
  std::vector<std::size_t> widths = {train_.dim};
  widths.insert(widths.end(), config_.hidden_widths.begin(),
                config_.hidden_widths.end());
  widths.push_back(train_.classes);
  arch_ = MlpArchitecture(std::move(widths));
  const PrivacySpec& privacy = config_.privacy;
  if (privacy.noise_multiplier > 0.0) {
    rdp_curve_ = RdpCurve(privacy.sampling_ratio, privacy.noise_multiplier,
                          DefaultOrders());
  } else {
    rdp_curve_.assign(DefaultOrders().size(),
                      std::numeric_limits<double>::infinity());
  }
  histogram_edges_ =
      DefaultHistogramEdges(privacy.clip_bound, config_.histogram_bins);
}

ParameterVector Federation::InitialModel() const {
  return InitParams(arch_, config_.seed);
}

std::size_t Federation::LocalSteps(std::size_t shard_size) const {
  const std::size_t batches =
      (shard_size + config_.batch_size - 1) / config_.batch_size;
  return config_.local_epochs * batches;
}

ParameterVector Federation::LocalTrain(std::span<const std::size_t> shard,
                                       const ParameterVector& global,
                                       std::size_t round, std::size_t client,
                                       double* mean_loss) const {
  if (shard.empty()) {
    throw InvalidArgument("client " + std::to_string(client) +
                          " has an empty shard");
  }
  if (global.size() != arch_.parameter_count()) {
    throw DimensionMismatch("global model length differs from architecture");
  }
  OptimizerState state(config_.optimizer, global.size());
  state.ResetForRound(round);
  Philox4x32 rng =
      MakeStream(config_.seed, round, client, StreamPurpose::kBatching);

  const bool sam = UsesSam(config_.method);
  ParameterVector w = global;
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> rows;
  rows.reserve(config_.batch_size);
  double loss_sum = 0.0;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < config_.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config_.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config_.batch_size);
      rows.clear();
      for (std::size_t k = start; k < stop; ++k) rows.push_back(shard[order[k]]);
      const Batch batch = train_.Gather(rows);
      loss_sum += sam ? SamStep(w, state, batch, arch_)
                      : SgdStep(w, state, batch, arch_);
      ++steps;
    }
  }
  if (mean_loss != nullptr) *mean_loss = loss_sum / static_cast<double>(steps);

  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= global[i];
  return w;
}

LocalUpdateReport Federation::LocalRound(std::size_t client,
                                         const ParameterVector& global,
                                         std::size_t round,
                                         const LocalOptions& options) const {
  if (client >= partition_.num_clients()) {
    throw InvalidArgument("client id " + std::to_string(client) +
                          " out of range");
  }
  return LocalRound(client, partition_.shards[client], global, round, options);
}

LocalUpdateReport Federation::LocalRound(std::size_t client,
                                         std::span<const std::size_t> shard,
                                         const ParameterVector& global,
                                         std::size_t round,
                                         const LocalOptions& options) const {
  LocalUpdateReport report;
  report.client = client;
  report.steps = LocalSteps(shard.size());
  report.raw_update = LocalTrain(shard, global, round, client, &report.train_loss);

  const ParameterVector* to_clip = &report.raw_update;
  SparsifyResult sparse;
  if (IsSparsified(config_.method)) {
    Philox4x32 mask_rng =
        MakeStream(config_.seed, round, client, StreamPurpose::kMask);
    const SparsifyMode mode = config_.method == Method::kFedSmpRandK
                                  ? SparsifyMode::kRandK
                                  : SparsifyMode::kTopK;
    sparse = Sparsify(report.raw_update, arch_.layers(), config_.sparsity, mode,
                      mask_rng);
    to_clip = &sparse.masked;
    report.mask = std::move(sparse.mask);
  }

  ClipResult clipped;
  if (options.clip) {
    clipped = ClipUpdate(*to_clip, config_.privacy.clip_bound);
  } else {
    clipped.clipped = *to_clip;
    clipped.pre_clip_norm = L2Norm(to_clip->span());
    clipped.factor = 1.0;
  }
  report.pre_clip_norm = clipped.pre_clip_norm;
  report.clip_factor = clipped.factor;

  if (options.noise) {
    Philox4x32 noise_rng =
        MakeStream(config_.seed, round, client, StreamPurpose::kNoise);
    report.noised_update =
        AddDpNoise(clipped.clipped, config_.privacy, noise_rng, report.mask);
  } else {
    report.noised_update = std::move(clipped.clipped);
  }
  return report;
}

RoundRecord Federation::RunRound(std::size_t round, ParameterVector& global,
                                 PrivacyLedger& ledger, std::size_t workers,
                                 std::vector<LocalUpdateReport>* reports_out) const {
  const PrivacySpec& privacy = config_.privacy;
  Philox4x32 sampling_rng =
      MakeStream(config_.seed, round, 0, StreamPurpose::kSampling);
  RoundRecord record;
  record.round = round;
  record.clients = SampleClients(privacy.total_clients,
                                 privacy.sampled_clients, sampling_rng);

  std::vector<LocalUpdateReport> reports(record.clients.size());
  ParallelFor(record.clients.size(), workers, [&](std::size_t i) {
    reports[i] = LocalRound(record.clients[i], global, round);
  });

  global = Aggregate(reports, global, privacy.sampled_clients);
  if (!AllFinite(global.span())) {
    throw Error("global model diverged to a non-finite value in round " +
                std::to_string(round));
  }

  std::vector<double> factors;
  factors.reserve(reports.size());
  record.norms.reserve(reports.size());
  for (const LocalUpdateReport& r : reports) {
    factors.push_back(r.clip_factor);
    record.norms.push_back(r.pre_clip_norm);
  }
  const ClipFactorStats stats = ComputeClipFactorStats(factors);
  record.alpha_bar = stats.mean;
  record.alpha_tilde = stats.deviation;
  record.mean_norm = Mean(record.norms);
  record.fraction_below_clip = FractionBelow(record.norms, privacy.clip_bound);
  record.histogram = UpdateNormHistogram(record.norms, histogram_edges_, round);

  const Evaluation train_eval = Evaluate(global, arch_, train_.view());
  record.train_loss = train_eval.loss;
  record.train_accuracy = train_eval.accuracy;
  if (test_.size() > 0) {
    const Evaluation test_eval = Evaluate(global, arch_, test_.view());
    record.test_loss = test_eval.loss;
    record.test_accuracy = test_eval.accuracy;
  }

  ledger = ledger.Compose(1, rdp_curve_);
  const EpsilonResult eps = ledger.Epsilon(privacy.delta);
  record.epsilon = eps.epsilon;
  record.best_order = eps.order;

  if (reports_out != nullptr) *reports_out = std::move(reports);
  return record;
}

RunResult Federation::Run(std::size_t workers,
                          const RoundCallback& on_round) const {
  RunResult result;
  result.final_model = InitialModel();
  PrivacyLedger ledger;
  result.records.reserve(config_.rounds);
  for (std::size_t t = 0; t < config_.rounds; ++t) {
    result.records.push_back(RunRound(t, result.final_model, ledger, workers));
    if (on_round) on_round(result.records.back());
  }
  return result;
}

void WriteRecordsCsvHeader(std::ostream& out) {
  out << "t,eps,alpha_bar,alpha_tilde,mean_norm,train_loss,test_loss,test_acc\n";
}

void WriteRecordCsvRow(std::ostream& out, const RoundRecord& r) {
  out << r.round << ',' << FormatDouble(r.epsilon) << ','
      << FormatDouble(r.alpha_bar) << ',' << FormatDouble(r.alpha_tilde) << ','
      << FormatDouble(r.mean_norm) << ',' << FormatDouble(r.train_loss) << ','
      << FormatDouble(r.test_loss) << ',' << FormatDouble(r.test_accuracy)
      << '\n';
}

}  // namespace dpfl
