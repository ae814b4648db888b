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

// Time-stepped runs and Monte Carlo evaluation.
//
// Trial i of an evaluation with master seed S uses the trial seed
// TrialSeed(S, i). The seed does not depend on the policy, so two policies
// evaluated with the same S see the same realizations, the same pre-match
// draws (when their plan distributions agree) and the same decision streams.

#ifndef BDMATCH_SIMULATOR_H_
#define BDMATCH_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/policy.h"
#include "bdmatch/rng.h"
#include "bdmatch/scenario.h"

namespace bdmatch {

// p̂_vt ~ Bernoulli(p_vt) independently; static recipients always available.
DemandRealization DrawRealization(const Scenario& s, Rng& rng);

inline std::uint64_t TrialSeed(std::uint64_t master, int trial) {
  return DeriveSeed(master, kTrialStream, static_cast<std::uint64_t>(trial));
}
// Realization used by the fixed-realization protocol.
inline std::uint64_t FixedRealizationSeed(std::uint64_t master) {
  return DeriveSeed(master, kRealizationStream, 0);
}
// Realization of trial i under the resampled protocol.
inline std::uint64_t TrialRealizationSeed(std::uint64_t trial_seed) {
  return DeriveSeed(trial_seed, kRealizationStream);
}

enum class RealizationMode { kFixed, kResampled };

const char* RealizationModeName(RealizationMode mode);
absl::StatusOr<RealizationMode> ParseRealizationMode(const std::string& text);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  MatchingOutcome outcome;
};

// Iterates t = 1..T and lets every available donor act. Donor availability
// follows the policy's mode: the fixed schedule a_ut, or no match in the
// previous K - 1 steps.
absl::StatusOr<TrialResult> RunPolicy(const Scenario& s,
                                      const PreparedPolicy& policy,
                                      const DemandRealization& r,
                                      std::uint64_t trial_seed, int trial = 0);

struct EvaluateOptions {
  int trials = 50;
  RealizationMode realization_mode = RealizationMode::kFixed;
  // Used by kFixed; drawn from FixedRealizationSeed(seed) when unset.
  std::optional<DemandRealization> realization;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 means hardware concurrency
  bool keep_trials = true;
  // Check every outcome with ValidateOutcome (slow; for tests).
  bool validate = false;
};

struct AggregateResult {
  PolicySpec policy;
  int trial_count = 0;
  double mean_total_weight = 0.0;
  double std_err_total = 0.0;
  std::vector<double> mean_recipient_weight;  // Ȳ_v
  std::vector<double> std_err_recipient;
  std::vector<TrialResult> trials;  // sorted by trial index, if kept
};

absl::StatusOr<AggregateResult> MonteCarloEvaluate(
    const Scenario& s, const PreparedPolicy& policy,
    const EvaluateOptions& options);

// Aggregates per-trial outcomes in trial order.
AggregateResult Aggregate(const Scenario& s, const PolicySpec& policy,
                          std::vector<TrialResult> trials, bool keep_trials);

enum class NormalizationProtocol {
  kFixedRealization,  // mean of Rand's Y_v on one realization
  kResampled,         // mean of Rand's Y_v over fresh realizations
  kExact,             // E[Y_v] under Rand by enumeration (small instances)
};

const char* NormalizationProtocolName(NormalizationProtocol protocol);
absl::StatusOr<NormalizationProtocol> ParseNormalizationProtocol(
    const std::string& text);

struct NormalizationOptions {
  int trials = 50;
  NormalizationProtocol protocol = NormalizationProtocol::kFixedRealization;
  Mode mode = Mode::kFixedTime;
  std::optional<DemandRealization> realization;
  std::uint64_t seed = 0;
  int threads = 0;
};

// m_v = E[Y_v] under Rand, estimated per `options.protocol`.
absl::StatusOr<std::vector<double>> EstimateNormalization(
    const Scenario& s, const NormalizationOptions& options);

}  // namespace bdmatch

#endif  // BDMATCH_SIMULATOR_H_
