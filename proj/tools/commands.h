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
#ifndef DPFL_TOOLS_COMMANDS_H_
#define DPFL_TOOLS_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.h"

namespace dpfl::tools {

// Config sources shared by every subcommand. A manifest, when given, is
// read first; --config and --set then apply on top of it.
struct ConfigSource {
  std::filesystem::path manifest;
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

RunConfig ResolveConfig(const ConfigSource& source);

// Key/value pairs stored under "config" in a run manifest.
std::vector<std::string> ReadManifestOverrides(
    const std::filesystem::path& manifest);

struct TrainOptions {
  ConfigSource source;
  std::filesystem::path out = "run";
  std::size_t workers = 1;
  bool quiet = false;
};

// Writes manifest.json (before training), then records.csv, histograms.csv,
// model.bin and privacy.json into `out`. Returns the process exit status.
int RunTrain(const TrainOptions& options, std::ostream& log);

struct BudgetOptions {
  double q = 0.1;
  double sigma = 0.95;
  double delta = 1.0 / 500.0;
  std::string rounds = "0:300:50";  // "a,b,c" or "first:last:step"
  std::filesystem::path out;        // budget.csv written here when set
};

// Parses "100,200,300" or "0:300:50" (inclusive). Throws InvalidArgument.
std::vector<std::size_t> ParseRounds(const std::string& text);

int RunBudget(const BudgetOptions& options, std::ostream& out);

inline constexpr const char* kProbeNames[] = {"sharpness", "landscape",
                                              "sensitivity"};

struct ProbeOptions {
  ConfigSource source;
  std::filesystem::path model;
  std::string probe;
  std::string data = "train";  // "train" or "test"
  std::filesystem::path out = "probe";
  std::vector<double> radii = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::size_t directions = 20;
  double extent = 1.0;
  std::size_t resolution = 21;
  std::size_t trials = 20;
  std::size_t round = 0;
  std::uint64_t probe_seed = 0;
};

int RunProbe(const ProbeOptions& options, std::ostream& log);

struct AuditOptions {
  ConfigSource source;
  std::filesystem::path out = "audit";
};

// partition.json plus per-client class counts as client_classes.csv.
int RunPartitionAudit(const AuditOptions& options, std::ostream& log);

}  // namespace dpfl::tools

#endif  // DPFL_TOOLS_COMMANDS_H_
