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

// Fairness and efficiency measures.
//
// Gamma of an outcome Y with normalization m is the largest gamma in [0, 1]
// such that gamma * Y_v / m_v <= Y_v' / m_v' for all pairs of recipients:
//   all Y_v = 0            -> 1
//   some zero, some not    -> 0
//   otherwise              -> min_v (Y_v/m_v) / max_v (Y_v/m_v)

#ifndef BDMATCH_METRICS_H_
#define BDMATCH_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/scenario.h"
#include "bdmatch/simulator.h"

namespace bdmatch {

// Errors when some m_v <= 0 or the sizes differ.
absl::StatusOr<double> GammaOf(std::span<const double> recipient_weight,
                               std::span<const double> normalization);

// Gamma of the mean outcome E[Y_v].
absl::StatusOr<double> EmpiricalEp(const AggregateResult& aggregate,
                                   std::span<const double> normalization);

struct EpEstimate {
  double ep = 0.0;
  // Delta-method standard error of min/max of the normalized means; 0 when
  // the estimate sits on a convention (all zero, some zero) or trials were
  // not retained.
  double std_err = 0.0;
};

// EmpiricalEp plus a standard error from the retained per-trial outcomes.
absl::StatusOr<EpEstimate> EmpiricalEpWithError(
    const AggregateResult& aggregate, std::span<const double> normalization);

// policy_weight / reference; reference must be > 0.
absl::StatusOr<double> CompetitiveFraction(double policy_weight,
                                           double reference);

// Recipients with m_v > 0, plus one warning per excluded recipient.
struct FairnessSet {
  std::vector<int> recipients;
  std::vector<std::string> warnings;
};
FairnessSet PositiveNormalizationSet(const Scenario& s);

struct FairnessReport {
  double gamma_empirical = 1.0;
  std::vector<double> normalized;  // Y_v / m_v; NaN for excluded recipients
  double min_normalized = 0.0;
  double max_normalized = 0.0;
  double weight_fraction_of_max = 0.0;
  std::optional<double> lp_bound;
  std::vector<int> excluded;  // recipients with m_v = 0
  std::vector<std::string> warnings;
};

// Gamma over recipients with m_v > 0. Requires normalization on `s` and
// max_weight > 0.
absl::StatusOr<FairnessReport> MakeFairnessReport(
    const Scenario& s, std::span<const double> recipient_weight,
    double total_weight, double max_weight, std::optional<double> lp_bound);

// Spearman rank correlation with average ranks for ties; NaN if either
// sample is constant.
double SpearmanCorrelation(std::span<const double> x, std::span<const double> y);

}  // namespace bdmatch

#endif  // BDMATCH_METRICS_H_
