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

// CSV tables and the sweep plot written by the command-line tool.

#ifndef BDMATCH_TOOLS_REPORT_H_
#define BDMATCH_TOOLS_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/metrics.h"
#include "bdmatch/scenario.h"
#include "bdmatch/simulator.h"

namespace bdmatch::cli {

// Numbers are written with "%.9g".
std::string FormatNumber(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name, or -1.
  int Column(const std::string& name) const;
};

std::string ToCsv(const CsvTable& table);
absl::StatusOr<CsvTable> ParseCsv(const std::string& text);
absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path);

// trial, policy, gamma, total_weight, then Y_v per recipient id.
CsvTable TrialsTable(const Scenario& s,
                     const std::vector<AggregateResult>& results);

// policy, gamma_param, trial_count, mean_total_weight, std_err_total,
// gamma_empirical, then mean Y_v per recipient id.
CsvTable AggregateTable(const Scenario& s,
                        const std::vector<AggregateResult>& results);

struct SweepRow {
  std::string policy;
  double gamma_param = 0.0;
  double total_weight = 0.0;
  FairnessReport report;
};

// policy, gamma_param, total_weight, weight_fraction_of_max,
// gamma_empirical, min_normalized, max_normalized, lp_bound (empty if absent).
CsvTable SweepTable(const std::vector<SweepRow>& rows);

// Weight fraction of Max against Gamma: max as a red circle, rand as a blue
// cross, adaptmatch points as green plus signs labelled with their gamma.
std::string RenderSweepSvg(const std::vector<SweepRow>& rows,
                           const std::string& title);

}  // namespace bdmatch::cli

#endif  // BDMATCH_TOOLS_REPORT_H_
