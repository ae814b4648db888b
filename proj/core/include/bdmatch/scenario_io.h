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

// JSON scenario files.
//
//   {
//     "horizon": 30,
//     "rate_limit": 7,
//     "donors":     [{"id": "d0", "lat": 1.0, "lon": 2.0,
//                     "first_notify_day": 3}, ...],
//     "recipients": [{"id": "r0", "lat": 1.0, "lon": 2.0,
//                     "kind": "static" | "dynamic"}, ...],
//     "edges":      [["d0", "r0"], ...],
//     "weights":    [w, ...],
//     "availability": {"r1": p, ...},
//     "normalization": {"r0": 0.31, ...}          // optional
//   }
//
// `weights[i]` belongs to `edges[i]` and is one of
//   - a number: constant over all steps,
//   - an array of `horizon` numbers: per-step values,
//   - an object {"<t>": value}: per-step entries; every step must be present.
// `availability` maps recipient ids to the same three forms. Steps missing
// from an object (or recipients missing from the map) default to 0 for
// dynamic recipients and 1 for static ones.

#ifndef BDMATCH_SCENARIO_IO_H_
#define BDMATCH_SCENARIO_IO_H_

#include <string>

#include "absl/status/statusor.h"
#include "bdmatch/scenario.h"
#include "nlohmann/json.hpp"

namespace bdmatch {

absl::StatusOr<Scenario> ScenarioFromJson(const nlohmann::json& doc);
nlohmann::json ScenarioToJson(const Scenario& s);

// Load parses and then runs ValidateScenario(); any violation is an error.
absl::StatusOr<Scenario> LoadScenario(const std::string& path);
absl::Status SaveScenario(const Scenario& s, const std::string& path);

absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path);
absl::Status WriteTextFile(const std::string& path, const std::string& text);

}  // namespace bdmatch

#endif  // BDMATCH_SCENARIO_IO_H_
