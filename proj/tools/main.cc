// Copyright 2026 The bdmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bdmatch: generate scenarios, run policies and sweep the fairness trade-off.

#include <iostream>

#include "CLI11.hpp"
#include "commands.h"

namespace {

void AddNormalizationFlags(CLI::App* cmd, bdmatch::cli::NormalizationFlags& f) {
  cmd->add_option("--norm-trials", f.trials,
                  "Rand trials for normalization scores when the scenario "
                  "has none")
      ->capture_default_str();
  cmd->add_option("--norm-protocol", f.protocol,
                  "Normalization protocol: fixed, resampled or exact")
      ->capture_default_str();
  cmd->add_option("--realization", f.realization,
                  "Evaluation realizations: fixed (one per scenario) or "
                  "resampled (one per trial)")
      ->capture_default_str();
  cmd->add_option("--beta-trials", f.beta_trials,
                  "Trials per round when estimating rate-limit availability")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bdmatch::cli;
  CLI::App app{"Donor notification matching simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master random seed")
      ->capture_default_str();
  app.add_option("--mode", global.mode, "Donor availability: fixed or rate")
      ->capture_default_str();
  app.add_option("--trials", global.trials, "Monte Carlo trials per policy")
      ->capture_default_str();
  app.add_option("--out-dir", global.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--threads", global.threads,
                 "Worker threads (0: hardware concurrency)")
      ->capture_default_str();

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic city");
  generate->add_option("config", gen.config, "Generator config (JSON)")
      ->required();
  generate->add_option("-o,--output", gen.output,
                       "Scenario path (default <out-dir>/scenario.json)");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Evaluate one policy");
  run_cmd->add_option("scenario", run.scenario, "Scenario (JSON)")->required();
  run_cmd->add_option("policy", run.policy,
                      "Policy, e.g. max, rand, randmax:0.3, adaptmatch:0.5, "
                      "nadaplp:alpha=0.1,gamma=0.5, nadaplp_rate:gamma=0.2")
      ->required();
  AddNormalizationFlags(run_cmd, run.norm);

  SweepOptions sweep;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Max, Rand and AdaptMatch over a gamma grid");
  sweep_cmd->add_option("scenario", sweep.scenario, "Scenario (JSON)")
      ->required();
  sweep_cmd->add_option("--gammas", sweep.gammas,
                        "Comma-separated gamma values (default 0,0.1,...,1)")
      ->delimiter(',');
  sweep_cmd->add_flag("--lp-bound", sweep.lp_bound,
                      "Add the LP relaxation bound per row");
  AddNormalizationFlags(sweep_cmd, sweep.norm);

  OracleOptions oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force references");
  oracle_cmd->group("");
  oracle_cmd->add_option("scenario", oracle.scenario, "Scenario (JSON)")
      ->required();
  oracle_cmd->add_option("--what", oracle.what, "opt, expectation or allocation")
      ->capture_default_str();
  oracle_cmd->add_option("--gamma", oracle.gamma, "Proportionality level")
      ->capture_default_str();
  oracle_cmd->add_option("--policy", oracle.policy, "Policy for expectation")
      ->capture_default_str();
  AddNormalizationFlags(oracle_cmd, oracle.norm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  absl::Status status;
  if (generate->parsed()) {
    if (app.count("--seed") > 0) gen.seed = global.seed;
    status = Generate(global, gen);
  } else if (run_cmd->parsed()) {
    status = Run(global, run);
  } else if (sweep_cmd->parsed()) {
    status = Sweep(global, sweep);
  } else if (oracle_cmd->parsed()) {
    status = Oracle(global, oracle);
  }
  if (!status.ok()) {
    std::cerr << "error: " << status.message() << "\n";
  }
  return ExitCode(status);
}
