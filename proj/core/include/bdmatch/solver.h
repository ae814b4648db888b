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

// Optimization models over a Scenario.
//
// All five models maximize matched weight subject to per-donor capacity and,
// when gamma > 0, gamma-proportionality of the normalized matched weights
//   s_v = (1/m_v) * sum_t sum_{e in E_:v} c_et x_et,
// i.e. gamma * s_v <= s_v' for every ordered pair of recipients.
//
//   kind             variables          availability bound      capacity
//   fixedtime_milp   x_et in {0,1}      x_et <= p̂_vt a_ut       sum_e x_et <= a_ut
//   fixedtime_lp     x_et in [0,1]      x_et <= p_vt a_ut       sum_e x_et <= a_ut
//   nadapopt_lp      y_et in [0,1]      (objective w p y)       sum_e y_et <= a_ut
//   ratelimit_milp   x_et in {0,1}      x_et <= p̂_vt           K-step window <= 1
//   ratelimit_lp     x_et in [0,1]      x_et <= p_vt            K-step window <= 1
//
// In the rate-limited models the donor availability
//   a_ut = 1 - sum_{t'=max(1,t-K+1)}^{t-1} sum_{e in E_u:} x_et'
// is eliminated: sum_e x_et <= a_ut becomes "at most one match in any K
// consecutive steps". It is reported back in LpSolution::a.
//
// c_et is w_et, except for nadapopt_lp where it is w_et p_vt.

#ifndef BDMATCH_SOLVER_H_
#define BDMATCH_SOLVER_H_

#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/lp.h"
#include "bdmatch/scenario.h"
#include "nlohmann/json.hpp"

namespace bdmatch {

enum class ProblemKind {
  kFixedTimeMilp,
  kFixedTimeLp,
  kNAdapOptLp,
  kRateLimitMilp,
  kRateLimitLp,
};

const char* ProblemKindName(ProblemKind kind);
bool IsMilp(ProblemKind kind);

// kMinMax introduces s_min, s_max with 2|V|+1 rows; kPairwise writes the
// |V|(|V|-1) pairwise rows directly. Both describe the same feasible set.
enum class ProportionalityEncoding { kMinMax, kPairwise };

struct SolveOptions {
  double gamma = 0.0;
  // Recipients subject to the proportionality constraints. Unset means all.
  std::optional<std::vector<int>> fairness_recipients;
  ProportionalityEncoding encoding = ProportionalityEncoding::kMinMax;
  const LpBackend* backend = nullptr;  // DefaultLpBackend() if null
  MipOptions mip;
};

struct LpSolution {
  ProblemKind kind = ProblemKind::kFixedTimeLp;
  int horizon = 0;
  double gamma = 0.0;
  double objective = 0.0;
  std::vector<double> x;  // x_et (or y_et) at [e * T + t - 1]
  std::vector<double> s;  // s_v; 0 where m_v is absent or zero
  std::vector<double> a;  // a_ut at [u * T + t - 1]; rate-limited kinds only
  std::int64_t nodes = 0;

  double x_at(int e, int t) const {
    return x[static_cast<std::size_t>(e) * horizon + (t - 1)];
  }
  double a_at(int u, int t) const {
    return a[static_cast<std::size_t>(u) * horizon + (t - 1)];
  }
};

inline constexpr double kFeasibilityTolerance = 1e-7;
inline constexpr double kIntegralityTolerance = 1e-6;

// OPT(gamma) on a known realization.
absl::StatusOr<LpSolution> SolveOfflineOpt(const Scenario& s,
                                           const DemandRealization& r,
                                           const SolveOptions& options);
// LP relaxation of the above with p̂ replaced by p.
absl::StatusOr<LpSolution> SolveFixedTimeLp(const Scenario& s,
                                            const SolveOptions& options);
// Optimal gamma-proportional non-adaptive policy statistics y*_et.
absl::StatusOr<LpSolution> SolveNAdapOptLp(const Scenario& s,
                                           const SolveOptions& options);
// Rate-limited offline optimum on a known realization.
absl::StatusOr<LpSolution> SolveRateLimitOpt(const Scenario& s,
                                             const DemandRealization& r,
                                             const SolveOptions& options);
// LP relaxation of the rate-limited problem with p̂ replaced by p.
absl::StatusOr<LpSolution> SolveRateLimitLp(const Scenario& s,
                                            const SolveOptions& options);

// {"kind", "gamma", "objective", "x": [{donor, recipient, t, value}...],
//  "s": {recipient: value}} with only nonzero x entries.
nlohmann::json LpSolutionToJson(const Scenario& s, const LpSolution& solution);

}  // namespace bdmatch

#endif  // BDMATCH_SOLVER_H_
