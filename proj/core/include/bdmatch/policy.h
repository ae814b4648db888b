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

// Notification policies.
//
// Myopic policies decide per (donor, step) from the currently available edges:
//   rand       uniform over available edges
//   max        maximum weight, uniform among exact ties
//   randmax    rand with probability gamma, otherwise max
//
// Non-adaptive policies sample a pre-match plan M_ut before the horizon starts
// from the solution of an LP and execute M_ut only if its recipient turns out
// to be available:
//   nadaplp       P[M_ut = e] = alpha x*_et / p_vt        x* of fixedtime_lp
//   nadapopt      P[M_ut = e] = y*_et                     y* of nadapopt_lp
//   nadaplp_rate  P[M_ut = e] = alpha x*_et / (beta_ut p_vt)   ratelimit_lp
//
// adaptmatch executes NAdapOpt's plan and, when the pre-match is missing or
// unavailable, falls back to randmax(fallback_gamma).

#ifndef BDMATCH_POLICY_H_
#define BDMATCH_POLICY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/lp.h"
#include "bdmatch/rng.h"
#include "bdmatch/scenario.h"
#include "bdmatch/solver.h"

namespace bdmatch {

enum class PolicyKind {
  kRand,
  kMax,
  kRandMax,
  kNAdapLp,
  kNAdapOpt,
  kAdaptMatch,
  kNAdapLpRate,
};

const char* PolicyKindName(PolicyKind kind);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kMax;
  // randmax: probability of behaving as rand. LP-based kinds: proportionality
  // level of the underlying LP (adaptmatch: of its NAdapOpt plan).
  double gamma = 0.0;
  // nadaplp / nadaplp_rate only. Unset means 1/D resp. 1/(2D).
  std::optional<double> alpha;
  // adaptmatch only.
  double fallback_gamma = 0.0;
  Mode mode = Mode::kFixedTime;

  // Canonical text form, e.g. "adaptmatch:gamma=0.5,fallback=0.5".
  std::string ToString() const;
  // The gamma reported next to results: 1 for rand, 0 for max, else gamma.
  double gamma_param() const;
};

// Accepts "rand", "max", "randmax:0.3", "adaptmatch:0.5" (gamma = fallback),
// "nadapopt:0.5" and key=value lists such as "nadaplp:alpha=0.1,gamma=0.5",
// "adaptmatch:gamma=0.5,fallback=0.2", "nadaplp_rate:gamma=0.2".
absl::StatusOr<PolicySpec> ParsePolicySpec(const std::string& text,
                                           Mode mode = Mode::kFixedTime);
absl::Status ValidatePolicySpec(const PolicySpec& spec);

bool UsesPlan(PolicyKind kind);

// --- Myopic decisions --------------------------------------------------------

// `edges` are the donor's available edges E^t_u: at step t.
std::optional<int> RandDecide(std::span<const int> edges, Rng& rng);
std::optional<int> MaxDecide(const Scenario& s, int t,
                             std::span<const int> edges, Rng& rng);
std::optional<int> RandMaxDecide(const Scenario& s, int t,
                                 std::span<const int> edges, double gamma,
                                 Rng& rng);

// Convenience forms that collect E^t_u: from the realization.
std::optional<int> RandDecide(const Scenario& s, int u, int t,
                              const DemandRealization& r, Rng& rng);
std::optional<int> MaxDecide(const Scenario& s, int u, int t,
                             const DemandRealization& r, Rng& rng);
std::optional<int> RandMaxDecide(const Scenario& s, int u, int t,
                                 const DemandRealization& r, double gamma,
                                 Rng& rng);

// Exact probability of each entry of `edges` being chosen by
// randmax(gamma); rand is gamma = 1 and max is gamma = 0.
std::vector<double> RandMaxProbabilities(const Scenario& s, int t,
                                         std::span<const int> edges,
                                         double gamma);

// --- Pre-match plans ---------------------------------------------------------

// M_ut, or -1 where nothing is pre-matched.
struct PreMatchPlan {
  int horizon = 0;
  std::vector<int> assignment;  // [u * T + t - 1]

  int at(int u, int t) const {
    return assignment[static_cast<std::size_t>(u) * horizon + (t - 1)];
  }
};

// Categorical distribution of M_ut per (u, t); the residual mass is "none".
struct PlanDistribution {
  int horizon = 0;
  std::vector<std::vector<std::pair<int, double>>> slots;  // [u * T + t - 1]

  std::span<const std::pair<int, double>> at(int u, int t) const {
    return slots[static_cast<std::size_t>(u) * horizon + (t - 1)];
  }
};

// beta_ut: probability that donor u is rate-limit available at t.
struct BetaEstimate {
  int horizon = 0;
  std::vector<double> beta;     // [u * T + t - 1], in (0, 1]
  std::vector<double> std_err;  // binomial standard error of each entry

  double at(int u, int t) const {
    return beta[static_cast<std::size_t>(u) * horizon + (t - 1)];
  }
  static BetaEstimate Ones(const Scenario& s);
};

inline constexpr double kPlanValidityTolerance = 1e-6;

// alpha x*_et / p_vt from a fixedtime_lp solution. A (u, t) whose mass
// exceeds 1 + tolerance is an InvalidArgument error naming it.
absl::StatusOr<PlanDistribution> NAdapLpDistribution(const Scenario& s,
                                                     const LpSolution& x,
                                                     double alpha);
// y*_et from a nadapopt_lp solution.
absl::StatusOr<PlanDistribution> NAdapOptDistribution(const Scenario& s,
                                                      const LpSolution& y);
// alpha x*_et / (beta_ut p_vt) from a ratelimit_lp solution.
absl::StatusOr<PlanDistribution> NAdapLpRateDistribution(
    const Scenario& s, const LpSolution& x, double alpha,
    const BetaEstimate& beta);

// One independent draw per (u, t); slot (u, t) uses the stream
// DeriveSeed(seed, kPlanStream, u, t).
PreMatchPlan SamplePlan(const Scenario& s, const PlanDistribution& dist,
                        std::uint64_t seed);

// Solve-and-sample helpers.
absl::StatusOr<PreMatchPlan> NAdapLpPlan(const Scenario& s, double gamma,
                                         double alpha, std::uint64_t seed,
                                         const SolveOptions& base = {});
absl::StatusOr<PreMatchPlan> NAdapOptPlan(const Scenario& s, double gamma,
                                          std::uint64_t seed,
                                          const SolveOptions& base = {});
absl::StatusOr<PreMatchPlan> NAdapLpRatePlan(const Scenario& s, double gamma,
                                             double alpha,
                                             const BetaEstimate& beta,
                                             std::uint64_t seed,
                                             const SolveOptions& base = {});

// M_ut if present and its recipient is available at t.
std::optional<int> ExecutePrematch(const Scenario& s, const PreMatchPlan& plan,
                                   int u, int t, const DemandRealization& r);

std::optional<int> AdaptMatchDecide(const Scenario& s, const PreMatchPlan& plan,
                                    int u, int t, const DemandRealization& r,
                                    double fallback_gamma, Rng& rng);

// Runs a plan over the horizon with no fallback, honoring the donor
// availability rule of `mode`.
MatchingOutcome ExecutePlan(const Scenario& s, const PreMatchPlan& plan,
                            const DemandRealization& r, Mode mode);

struct BetaOptions {
  int trials = 2000;
  int rounds = 3;
  std::uint64_t seed = 0;
};

// Fixed-point estimate of beta_ut under nadaplp_rate(alpha) with x* from a
// ratelimit_lp solution: start from beta = 1; each round simulates `trials`
// horizons on fresh realizations with plans drawn from the current estimate
// and replaces beta by the empirical availability frequencies. beta_u1 = 1.
// Intermediate rounds rescale any over-full slot instead of failing.
BetaEstimate EstimateBeta(const Scenario& s, const LpSolution& x, double alpha,
                          const BetaOptions& options = {});

// --- Prepared policies -------------------------------------------------------

struct PrepareOptions {
  // Recipients under the LP proportionality constraints. Unset means all.
  std::optional<std::vector<int>> fairness_recipients;
  const LpBackend* backend = nullptr;
  BetaOptions beta;
};

// A policy with its LP solved and its plan distribution built. Plans are
// sampled per trial from the trial seed.
struct PreparedPolicy {
  PolicySpec spec;
  double alpha = 0.0;  // resolved alpha for nadaplp kinds
  std::optional<LpSolution> lp;
  std::optional<PlanDistribution> plan;
  std::optional<BetaEstimate> beta;
};

absl::StatusOr<PreparedPolicy> PreparePolicy(const Scenario& s,
                                             const PolicySpec& spec,
                                             const PrepareOptions& options = {});

// One decision of `policy` for an available donor. `plan` is required for the
// plan-based kinds.
std::optional<int> Decide(const Scenario& s, const PreparedPolicy& policy,
                          const PreMatchPlan* plan, int u, int t,
                          const DemandRealization& r,
                          std::vector<int>& scratch, Rng& rng);

}  // namespace bdmatch

#endif  // BDMATCH_POLICY_H_
