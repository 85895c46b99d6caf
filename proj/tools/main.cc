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
#include <iostream>

#include "CLI11.hpp"
#include "commands.h"
#include "dpfl/errors.h"

namespace {

using dpfl::tools::ConfigSource;

void AddConfigFlags(CLI::App* cmd, ConfigSource& source) {
  cmd->add_option("--config", source.config, "key = value config file");
  cmd->add_option("--set", source.overrides, "override, key=value (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("--manifest", source.manifest,
                  "manifest.json of an earlier run to take the config from");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&source](const std::uint64_t& v) { source.seed = v; },
      "master seed");
}

std::string KeyList() {
  std::string out = "config keys:";
  for (const std::string& key : dpfl::tools::ConfigKeys()) out += " " + key;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Client-level differentially private federated learning "
               "simulator"};
  app.footer(KeyList());
  app.require_subcommand(1);

  dpfl::tools::TrainOptions train;
  CLI::App* train_cmd = app.add_subcommand("train", "run federated training");
  AddConfigFlags(train_cmd, train.source);
  train_cmd->add_option("--out", train.out, "run directory");
  train_cmd->add_option("--workers", train.workers, "client worker threads")
      ->check(CLI::PositiveNumber);
  train_cmd->add_flag("--quiet", train.quiet, "no progress lines");

  dpfl::tools::BudgetOptions budget;
  CLI::App* budget_cmd =
      app.add_subcommand("budget", "print the epsilon(T) table");
  budget_cmd->add_option("--q", budget.q, "client sampling ratio");
  budget_cmd->add_option("--sigma", budget.sigma, "noise multiplier");
  budget_cmd->add_option("--delta", budget.delta, "target delta");
  budget_cmd->add_option("--rounds", budget.rounds,
                         "list a,b,c or inclusive range first:last:step");
  budget_cmd->add_option("--out", budget.out, "also write budget.csv here");

  dpfl::tools::ProbeOptions probe;
  CLI::App* probe_cmd =
      app.add_subcommand("probe", "sharpness, landscape or sensitivity probe");
  AddConfigFlags(probe_cmd, probe.source);
  probe_cmd->add_option("--model", probe.model, "model.bin")->required();
  probe_cmd->add_option("--probe", probe.probe,
                        "sharpness | landscape | sensitivity")
      ->required();
  probe_cmd->add_option("--data", probe.data, "train or test");
  probe_cmd->add_option("--out", probe.out, "output directory");
  probe_cmd->add_option("--radii", probe.radii, "sharpness radii, must include 0")
      ->delimiter(',');
  probe_cmd->add_option("--directions", probe.directions,
                        "random directions for sharpness");
  probe_cmd->add_option("--extent", probe.extent, "landscape half-width");
  probe_cmd->add_option("--resolution", probe.resolution,
                        "landscape points per axis");
  probe_cmd->add_option("--trials", probe.trials, "sensitivity trials");
  probe_cmd->add_option("--round", probe.round,
                        "round index whose streams the sensitivity probe uses");
  probe_cmd->add_option("--probe-seed", probe.probe_seed, "probe seed");

  dpfl::tools::AuditOptions audit;
  CLI::App* audit_cmd = app.add_subcommand(
      "partition-audit", "write the client partition and class counts");
  AddConfigFlags(audit_cmd, audit.source);
  audit_cmd->add_option("--out", audit.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return dpfl::tools::RunTrain(train, std::cerr);
    if (*budget_cmd) return dpfl::tools::RunBudget(budget, std::cout);
    if (*probe_cmd) return dpfl::tools::RunProbe(probe, std::cerr);
    if (*audit_cmd) return dpfl::tools::RunPartitionAudit(audit, std::cerr);
  } catch (const dpfl::Error& e) {
    std::cerr << "dpfl: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dpfl: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
