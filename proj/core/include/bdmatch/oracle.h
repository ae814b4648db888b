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

// Exhaustive reference computations for tiny instances. Exceeding an
// enumeration bound is an OutOfRange error, never a truncated answer.

#ifndef BDMATCH_ORACLE_H_
#define BDMATCH_ORACLE_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/policy.h"
#include "bdmatch/scenario.h"

namespace bdmatch {

// Upper bound on the number of complete assignments BruteForceOpt and
// FindProportionalAllocation may enumerate (product over (donor, step) slots
// of the number of choices).
inline constexpr std::int64_t kOracleEnumerationLimit = std::int64_t{1} << 22;

// Upper bound on the availability subsets enumerated per (donor, step) by
// BruteForcePolicyExpectation.
inline constexpr std::int64_t kOracleSubsetLimit = std::int64_t{1} << 16;

struct BruteForceResult {
  double objective = 0.0;
  std::vector<std::pair<int, int>> matching;  // (edge, t)
  std::int64_t leaves = 0;
};

// Best gamma-proportional matching on realization `r` among all per-(donor,
// step) choices of "none" or an available edge, under the donor availability
// rule of `mode`.
absl::StatusOr<BruteForceResult> BruteForceOpt(const Scenario& s,
                                               const DemandRealization& r,
                                               Mode mode, double gamma);

// Exact E[Y_v] of `policy` by dynamic programming over each donor's
// rate-limit state. With `r` the realization is fixed; without it every
// availability pattern of the donor's neighbours is enumerated with its
// probability. Supports every policy kind; plan-based kinds need their plan
// distribution.
absl::StatusOr<std::vector<double>> BruteForcePolicyExpectation(
    const Scenario& s, const PreparedPolicy& policy,
    const std::optional<DemandRealization>& r);

// Some non-empty set of edges at step 1, at most one per donor, whose
// normalized weights are gamma-proportional; nullopt if none exists. Uses the
// scenario's normalization scores when present, else m_v = 1.
absl::StatusOr<std::optional<std::vector<int>>> FindProportionalAllocation(
    const Scenario& s, double gamma);

}  // namespace bdmatch

#endif  // BDMATCH_ORACLE_H_
