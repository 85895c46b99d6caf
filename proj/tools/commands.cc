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
#include "commands.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <random>
#include <sstream>

#include "dpfl/accountant.h"
#include "dpfl/errors.h"
#include "dpfl/federation.h"
#include "dpfl/io.h"
#include "dpfl/metrics.h"
#include "dpfl/probes.h"
#include "json.hpp"

#ifndef DPFL_VERSION
#define DPFL_VERSION "unknown"
#endif

namespace dpfl::tools {
namespace {

using nlohmann::ordered_json;

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory " + dir.string() + ": " +
                ec.message());
  }
}

ordered_json ConfigJson(const RunConfig& config) {
  ordered_json out = ordered_json::object();
  for (const auto& [key, value] : ResolvedKeyValues(config)) out[key] = value;
  return out;
}

ParameterVector LoadCheckedModel(const std::filesystem::path& path,
                                 const MlpArchitecture& arch) {
  ParameterVector w = LoadModel(path);
  if (w.size() != arch.parameter_count()) {
    throw DimensionMismatch("model file " + path.string() + " holds " +
                            std::to_string(w.size()) +
                            " parameters but architecture " + arch.ToString() +
                            " needs " +
                            std::to_string(arch.parameter_count()));
  }
  return w;
}

std::string ProbeNameList() {
  std::string out;
  for (const char* name : kProbeNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

std::vector<std::string> ReadManifestOverrides(
    const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) {
    throw ConfigError("manifest", "file not found: " + manifest.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ReadFile(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.contains("config") || !doc["config"].is_object()) {
    throw ConfigError("manifest", "missing \"config\" object");
  }
  std::vector<std::string> overrides;
  for (const auto& [key, value] : doc["config"].items()) {
    if (!value.is_string()) {
      throw ConfigError(key, "manifest values must be strings");
    }
    overrides.push_back(key + "=" + value.get<std::string>());
  }
  return overrides;
}

RunConfig ResolveConfig(const ConfigSource& source) {
  std::vector<std::string> overrides;
  if (!source.manifest.empty()) {
    overrides = ReadManifestOverrides(source.manifest);
  }
  std::string text;
  if (!source.config.empty()) {
    if (!std::filesystem::exists(source.config)) {
      throw ConfigError("config", "file not found: " + source.config.string());
    }
    text = ReadFile(source.config);
  }
  // Manifest values sit below the config file, so they are applied as text
  // ahead of it.
  std::string merged;
  for (const std::string& item : overrides) merged += item + "\n";
  merged += text;
  std::vector<std::string> sets = source.overrides;
  if (source.seed) sets.push_back("seed=" + std::to_string(*source.seed));
  return ParseConfigText(merged, sets);
}

int RunTrain(const TrainOptions& options, std::ostream& log) {
  const RunConfig config = ResolveConfig(options.source);
  LoadedData data = LoadData(config);

  namespace fs = std::filesystem;
  EnsureDirectory(options.out);
  const fs::path records_path = options.out / "records.csv";
  const fs::path histograms_path = options.out / "histograms.csv";
  const fs::path model_path = options.out / "model.bin";
  const fs::path privacy_path = options.out / "privacy.json";

  ordered_json manifest;
  manifest["version"] = DPFL_VERSION;
  manifest["started"] = UtcTimestamp();
  manifest["seed"] = config.federation.seed;
  manifest["config"] = ConfigJson(config);
  manifest["outputs"] = {{"records", records_path.filename().string()},
                         {"histograms", histograms_path.filename().string()},
                         {"model", model_path.filename().string()},
                         {"privacy", privacy_path.filename().string()}};
  WriteFileAtomic(options.out / "manifest.json", manifest.dump(2) + "\n");

  Federation federation(config.federation, std::move(data.train),
                        std::move(data.test), std::move(data.partition));
  std::ostringstream records;
  std::ostringstream histograms;
  WriteRecordsCsvHeader(records);
  histograms << "t,bin_lo,bin_hi,count\n";
  const std::size_t total = config.federation.rounds;
  const std::size_t every = std::max<std::size_t>(1, total / 10);
  const RunResult result =
      federation.Run(options.workers, [&](const RoundRecord& record) {
        WriteRecordCsvRow(records, record);
        const NormHistogram& h = record.histogram;
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
          histograms << record.round << ',' << FormatDouble(h.edges[i]) << ','
                     << FormatDouble(h.edges[i + 1]) << ',' << h.counts[i]
                     << '\n';
        }
        if (!options.quiet && (record.round % every == 0 || record.round == total)) {
          log << "round " << record.round << '/' << total
              << " eps=" << FormatDouble(record.epsilon)
              << " test_acc=" << FormatDouble(record.test_accuracy)
              << " mean_norm=" << FormatDouble(record.mean_norm) << '\n';
        }
      });

  WriteFileAtomic(records_path, records.str());
  WriteFileAtomic(histograms_path, histograms.str());
  SaveModel(model_path, result.final_model);

  const PrivacySpec& privacy = config.federation.privacy;
  ordered_json report;
  report["rounds"] = total;
  report["q"] = privacy.sampling_ratio;
  report["sigma"] = privacy.noise_multiplier;
  report["delta"] = privacy.delta;
  report["clip"] = privacy.clip_bound;
  report["total_clients"] = privacy.total_clients;
  report["sampled_clients"] = privacy.sampled_clients;
  if (result.records.empty()) {
    report["epsilon"] = 0.0;
  } else {
    report["epsilon"] = result.records.back().epsilon;
    report["order"] = result.records.back().best_order;
    report["final_train_loss"] = result.records.back().train_loss;
    report["final_test_accuracy"] = result.records.back().test_accuracy;
  }
  WriteFileAtomic(privacy_path, report.dump(2) + "\n");
  if (!options.quiet) log << "wrote " << options.out.string() << '\n';
  return 0;
}

std::vector<std::size_t> ParseRounds(const std::string& text) {
  auto number = [&](const std::string& item) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      if (item.empty() || item.front() == '-') throw std::invalid_argument("");
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw InvalidArgument("rounds: not a non-negative integer: '" + item + "'");
    }
    if (pos != item.size()) {
      throw InvalidArgument("rounds: not a non-negative integer: '" + item + "'");
    }
    return static_cast<std::size_t>(v);
  };
  std::vector<std::size_t> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() != 3) {
      throw InvalidArgument("rounds range must be first:last:step");
    }
    const std::size_t first = number(parts[0]);
    const std::size_t last = number(parts[1]);
    const std::size_t step = number(parts[2]);
    if (step == 0 || last < first) {
      throw InvalidArgument("rounds range needs step > 0 and last >= first");
    }
    for (std::size_t t = first; t <= last; t += step) out.push_back(t);
  } else {
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(number(item));
    if (out.empty()) throw InvalidArgument("rounds list is empty");
  }
  return out;
}

int RunBudget(const BudgetOptions& options, std::ostream& out) {
  if (!(options.q > 0.0 && options.q <= 1.0)) {
    throw InvalidArgument("q must be in (0, 1]");
  }
  if (!(options.sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (!(options.delta > 0.0 && options.delta < 1.0)) {
    throw InvalidArgument("delta must be in (0, 1)");
  }
  const std::vector<std::size_t> rounds = ParseRounds(options.rounds);
  const std::vector<BudgetRow> rows =
      BudgetTable(options.q, options.sigma, options.delta, rounds);
  std::ostringstream csv;
  WriteBudgetCsv(csv, rows);
  out << csv.str();
  if (!options.out.empty()) {
    EnsureDirectory(options.out);
    WriteFileAtomic(options.out / "budget.csv", csv.str());
  }
  return 0;
}

int RunProbe(const ProbeOptions& options, std::ostream& log) {
  if (std::find(std::begin(kProbeNames), std::end(kProbeNames),
                options.probe) == std::end(kProbeNames)) {
    throw InvalidArgument("unknown probe '" + options.probe +
                          "'; valid probes: " + ProbeNameList());
  }
  if (options.data != "train" && options.data != "test") {
    throw InvalidArgument("probe data must be 'train' or 'test'");
  }
  if (options.model.empty()) throw InvalidArgument("probe needs --model");
  const RunConfig config = ResolveConfig(options.source);
  LoadedData data = LoadData(config);
  Federation federation(config.federation, std::move(data.train),
                        std::move(data.test), std::move(data.partition));
  const MlpArchitecture& arch = federation.architecture();
  const ParameterVector w = LoadCheckedModel(options.model, arch);
  const Dataset& eval =
      options.data == "train" ? federation.train() : federation.test();

  EnsureDirectory(options.out);
  std::ostringstream csv;
  std::filesystem::path path;
  if (options.probe == "sharpness") {
    const double base = Loss(w, arch, eval.view());
    const SharpnessProbe probe =
        ProbeSharpness(w, arch, eval.view(), options.radii, options.directions,
                       options.probe_seed);
    csv << "# sharpness probe, directions=" << probe.directions
        << ", data=" << options.data << '\n';
    csv << "radius,mean_loss_increase,mean_loss\n";
    for (std::size_t i = 0; i < probe.radii.size(); ++i) {
      csv << FormatDouble(probe.radii[i]) << ','
          << FormatDouble(probe.mean_increase[i]) << ','
          << FormatDouble(base + probe.mean_increase[i]) << '\n';
    }
    path = options.out / "sharpness.csv";
  } else if (options.probe == "landscape") {
    const LandscapeSlice slice =
        ProbeLandscape(w, arch, eval.view(), options.extent,
                       options.resolution, options.probe_seed);
    WriteLandscapeCsv(csv, slice);
    path = options.out / "landscape.csv";
  } else {
    if (options.trials == 0) throw InvalidArgument("trials must be >= 1");
    std::vector<std::size_t> eligible;
    const Partition& partition = federation.partition();
    for (std::size_t c = 0; c < partition.num_clients(); ++c) {
      if (partition.shards[c].size() >= 2) eligible.push_back(c);
    }
    if (eligible.empty()) {
      throw InvalidArgument("no client has a shard of >= 2 examples");
    }
    Philox4x32 rng = MakeStream(options.probe_seed, StreamPurpose::kProbe);
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    csv << "# sensitivity probe, method="
        << MethodName(config.federation.method) << ", round=" << options.round
        << '\n';
    csv << "trial,client,squared_sensitivity\n";
    double sum = 0.0;
    for (std::size_t k = 0; k < options.trials; ++k) {
      const std::size_t client = eligible[pick(rng)];
      const double s = EmpiricalSensitivity(federation, client, w, options.round,
                                            options.probe_seed + k);
      sum += s;
      csv << k << ',' << client << ',' << FormatDouble(s) << '\n';
    }
    log << "mean squared sensitivity "
        << FormatDouble(sum / static_cast<double>(options.trials)) << '\n';
    path = options.out / "sensitivity.csv";
  }
  WriteFileAtomic(path, csv.str());
  log << "wrote " << path.string() << '\n';
  return 0;
}

int RunPartitionAudit(const AuditOptions& options, std::ostream& log) {
  const RunConfig config = ResolveConfig(options.source);
  const LoadedData data = LoadData(config);
  data.partition.Validate(data.train.size());
  EnsureDirectory(options.out);
  WriteFileAtomic(options.out / "partition.json",
                  PartitionToJson(data.partition) + "\n");

  const auto counts = ClientClassCounts(data.train, data.partition);
  std::ostringstream csv;
  csv << "client,size";
  for (std::size_t c = 0; c < data.train.classes; ++c) csv << ",class_" << c;
  csv << '\n';
  std::size_t smallest = data.train.size();
  std::size_t largest = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t size = data.partition.shards[i].size();
    smallest = std::min(smallest, size);
    largest = std::max(largest, size);
    csv << i << ',' << size;
    for (const std::size_t n : counts[i]) csv << ',' << n;
    csv << '\n';
  }
  WriteFileAtomic(options.out / "client_classes.csv", csv.str());
  log << "clients " << data.partition.num_clients() << ", examples "
      << data.train.size() << ", shard sizes [" << smallest << ", " << largest
      << "], mean label distance "
      << FormatDouble(MeanLabelDistance(data.train, data.partition)) << '\n';
  return 0;
}

}  // namespace dpfl::tools
