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
#ifndef DPFL_TOOLS_RUN_CONFIG_H_
#define DPFL_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dpfl/data.h"
#include "dpfl/federation.h"

namespace dpfl::tools {

// Where the examples come from and how they are split across clients.
struct DataConfig {
  std::string dataset = "synthetic";  // "synthetic" or a binary dataset path
  std::string test_dataset;           // optional; otherwise a held-out split
  std::size_t synthetic_classes = 10;
  std::size_t synthetic_dim = 20;
  std::size_t synthetic_n = 20000;
  double synthetic_separation = 3.0;
  double test_fraction = 0.2;
  std::string partition = "dirichlet";  // "dirichlet" or "iid"
  double dirichlet_alpha = 0.6;
};

struct RunConfig {
  FederationConfig federation;
  DataConfig data;
};

// Defaults: M = 500, q = 0.1, eta = 0.1 (decay 0.005, momentum 0.5), 30
// local epochs, sigma = 0.95, C = 0.2, rho = 0.5, delta = 1/M, 200 rounds.
RunConfig DefaultRunConfig();

// Flat "key = value" text, one pair per line, '#' starts a comment.
// Defaults <- file <- overrides. An empty `path` skips the file. Throws
// UnknownKey, OutOfRange or ConflictingOptions (each naming the key), or
// ConfigError for syntax problems.
RunConfig ParseConfig(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides);
RunConfig ParseConfigText(const std::string& text,
                          const std::vector<std::string>& overrides);

// Every key with its resolved value, in a fixed order. Feeding the result
// back through ParseConfigText reproduces the config exactly.
std::vector<std::pair<std::string, std::string>> ResolvedKeyValues(
    const RunConfig& config);
std::string ToConfigText(const RunConfig& config);

// Known keys, for help text.
std::vector<std::string> ConfigKeys();

struct LoadedData {
  Dataset train;
  Dataset test;
  Partition partition;
};

// Materializes the datasets and partition described by `config`.
LoadedData LoadData(const RunConfig& config);

}  // namespace dpfl::tools

#endif  // DPFL_TOOLS_RUN_CONFIG_H_
