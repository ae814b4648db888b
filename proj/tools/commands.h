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

#ifndef BDMATCH_TOOLS_COMMANDS_H_
#define BDMATCH_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"

namespace bdmatch::cli {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string mode = "fixed";
  int trials = 50;
  std::string out_dir = "out";
  int threads = 0;
};

// How normalization scores are obtained when the scenario has none.
struct NormalizationFlags {
  int trials = 50;
  std::string protocol = "fixed";
  std::string realization = "fixed";  // evaluation realization protocol
  int beta_trials = 2000;
};

struct GenerateOptions {
  std::string config;
  std::string output;  // defaults to <out-dir>/scenario.json
  std::optional<std::uint64_t> seed;
};

struct RunOptions {
  std::string scenario;
  std::string policy;
  NormalizationFlags norm;
};

struct SweepOptions {
  std::string scenario;
  std::vector<double> gammas;
  bool lp_bound = false;
  NormalizationFlags norm;
};

struct OracleOptions {
  std::string scenario;
  std::string what = "opt";  // opt | expectation | allocation
  double gamma = 0.0;
  std::string policy = "rand";
  NormalizationFlags norm;
};

// Each returns OK or the error to report; ExitCode() maps it to a status.
absl::Status Generate(const GlobalOptions& global, const GenerateOptions& o);
absl::Status Run(const GlobalOptions& global, const RunOptions& o);
absl::Status Sweep(const GlobalOptions& global, const SweepOptions& o);
absl::Status Oracle(const GlobalOptions& global, const OracleOptions& o);

// 0 for OK, 2 for input and configuration errors, 1 otherwise.
int ExitCode(const absl::Status& status);

}  // namespace bdmatch::cli

#endif  // BDMATCH_TOOLS_COMMANDS_H_
