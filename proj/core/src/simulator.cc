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

#include "bdmatch/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "bdmatch/oracle.h"

namespace bdmatch {

DemandRealization DrawRealization(const Scenario& s, Rng& rng) {
  DemandRealization r(s.num_recipients(), s.horizon());
  for (int v = 0; v < s.num_recipients(); ++v) {
    const bool is_static = s.recipient(v).kind == RecipientKind::kStatic;
    for (int t = 1; t <= s.horizon(); ++t) {
      r.set_available(v, t, is_static || rng.Bernoulli(s.availability(v, t)));
    }
  }
  return r;
}

const char* RealizationModeName(RealizationMode mode) {
  return mode == RealizationMode::kFixed ? "fixed" : "resampled";
}

absl::StatusOr<RealizationMode> ParseRealizationMode(const std::string& text) {
  if (text == "fixed") return RealizationMode::kFixed;
  if (text == "resampled") return RealizationMode::kResampled;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown realization mode '", text, "' (expected fixed|resampled)"));
}

absl::StatusOr<TrialResult> RunPolicy(const Scenario& s,
                                      const PreparedPolicy& policy,
                                      const DemandRealization& r,
                                      std::uint64_t trial_seed, int trial) {
  if (r.num_recipients() != s.num_recipients() || r.horizon() != s.horizon()) {
    return absl::InvalidArgumentError("realization does not match scenario");
  }
  std::optional<PreMatchPlan> plan;
  if (UsesPlan(policy.spec.kind)) {
    if (!policy.plan.has_value()) {
      return absl::FailedPreconditionError(absl::StrCat(
          policy.spec.ToString(), " needs a prepared plan distribution"));
    }
    plan = SamplePlan(s, *policy.plan, trial_seed);
  }
  const Mode mode = policy.spec.mode;
  const int K = s.rate_limit();
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed;
  result.outcome = MatchingOutcome::Empty(s);
  std::vector<int> last(s.num_donors(), std::numeric_limits<int>::min() / 2);
  std::vector<int> scratch;
  for (int t = 1; t <= s.horizon(); ++t) {
    for (int u = 0; u < s.num_donors(); ++u) {
      const bool available = mode == Mode::kFixedTime ? s.scheduled(u, t)
                                                      : t - last[u] >= K;
      if (!available) continue;
      Rng rng(DeriveSeed(trial_seed, kDecisionStream, u, t));
      const std::optional<int> e =
          Decide(s, policy, plan ? &*plan : nullptr, u, t, r, scratch, rng);
      if (e.has_value()) {
        result.outcome.Add(s, *e, t);
        last[u] = t;
      }
    }
  }
  return result;
}

AggregateResult Aggregate(const Scenario& s, const PolicySpec& policy,
                          std::vector<TrialResult> trials, bool keep_trials) {
  std::sort(trials.begin(), trials.end(),
            [](const TrialResult& a, const TrialResult& b) {
              return a.trial < b.trial;
            });
  const int n = static_cast<int>(trials.size());
  const int V = s.num_recipients();
  AggregateResult agg;
  agg.policy = policy;
  agg.trial_count = n;
  // Two-pass mean / deviation in trial order keeps results independent of
  // the thread count.
  std::vector<double> mean_y(V, 0.0);
  double mean_total = 0.0;
  for (const TrialResult& tr : trials) {
    mean_total += tr.outcome.total_weight;
    for (int v = 0; v < V; ++v) mean_y[v] += tr.outcome.recipient_weight[v];
  }
  if (n > 0) {
    mean_total /= n;
    for (double& y : mean_y) y /= n;
  }
  std::vector<double> ss_y(V, 0.0);
  double ss_total = 0.0;
  for (const TrialResult& tr : trials) {
    const double d = tr.outcome.total_weight - mean_total;
    ss_total += d * d;
    for (int v = 0; v < V; ++v) {
      const double dv = tr.outcome.recipient_weight[v] - mean_y[v];
      ss_y[v] += dv * dv;
    }
  }
  auto se = [n](double ss) {
    return n < 2 ? 0.0 : std::sqrt(ss / (n - 1) / n);
  };
  agg.mean_total_weight = mean_total;
  agg.std_err_total = se(ss_total);
  agg.mean_recipient_weight = std::move(mean_y);
  agg.std_err_recipient.resize(V);
  for (int v = 0; v < V; ++v) agg.std_err_recipient[v] = se(ss_y[v]);
  if (keep_trials) agg.trials = std::move(trials);
  return agg;
}

namespace {

int ResolveThreads(int requested, int work) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, work));
}

// Runs fn(i) for i in [0, n) on `threads` workers; returns the first error in
// index order.
template <typename Fn>
absl::Status ParallelFor(int n, int threads, Fn fn) {
  std::vector<absl::Status> status(n);
  auto worker = [&](int begin, int stride) {
    for (int i = begin; i < n; i += stride) status[i] = fn(i);
  };
  if (threads <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w, threads);
    for (auto& th : pool) th.join();
  }
  for (auto& st : status) {
    if (!st.ok()) return st;
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<AggregateResult> MonteCarloEvaluate(
    const Scenario& s, const PreparedPolicy& policy,
    const EvaluateOptions& options) {
  if (options.trials < 1) {
    return absl::InvalidArgumentError("trials must be >= 1");
  }
  std::optional<DemandRealization> fixed;
  if (options.realization_mode == RealizationMode::kFixed) {
    if (options.realization.has_value()) {
      fixed = *options.realization;
    } else {
      Rng rng(FixedRealizationSeed(options.seed));
      fixed = DrawRealization(s, rng);
    }
  }
  std::vector<TrialResult> trials(options.trials);
  const int threads = ResolveThreads(options.threads, options.trials);
  absl::Status st = ParallelFor(options.trials, threads, [&](int i) {
    const std::uint64_t seed = TrialSeed(options.seed, i);
    DemandRealization local;
    if (!fixed.has_value()) {
      Rng rng(TrialRealizationSeed(seed));
      local = DrawRealization(s, rng);
    }
    const DemandRealization& r = fixed.has_value() ? *fixed : local;
    auto result = RunPolicy(s, policy, r, seed, i);
    if (!result.ok()) return result.status();
    if (options.validate) {
      auto violations = ValidateOutcome(s, r, policy.spec.mode, result->outcome);
      if (!violations.empty()) {
        return absl::InternalError(absl::StrCat(
            "trial ", i, ": invalid outcome: ", absl::StrJoin(violations, "; ")));
      }
    }
    trials[i] = *std::move(result);
    return absl::OkStatus();
  });
  if (!st.ok()) return st;
  return Aggregate(s, policy.spec, std::move(trials), options.keep_trials);
}

const char* NormalizationProtocolName(NormalizationProtocol protocol) {
  switch (protocol) {
    case NormalizationProtocol::kFixedRealization:
      return "fixed";
    case NormalizationProtocol::kResampled:
      return "resampled";
    case NormalizationProtocol::kExact:
      return "exact";
  }
  return "unknown";
}

absl::StatusOr<NormalizationProtocol> ParseNormalizationProtocol(
    const std::string& text) {
  if (text == "fixed") return NormalizationProtocol::kFixedRealization;
  if (text == "resampled") return NormalizationProtocol::kResampled;
  if (text == "exact") return NormalizationProtocol::kExact;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown normalization protocol '", text,
      "' (expected fixed|resampled|exact)"));
}

absl::StatusOr<std::vector<double>> EstimateNormalization(
    const Scenario& s, const NormalizationOptions& options) {
  PreparedPolicy rand;
  rand.spec.kind = PolicyKind::kRand;
  rand.spec.mode = options.mode;
  if (options.protocol == NormalizationProtocol::kExact) {
    return BruteForcePolicyExpectation(s, rand, std::nullopt);
  }
  EvaluateOptions eval;
  eval.trials = options.trials;
  eval.realization_mode =
      options.protocol == NormalizationProtocol::kFixedRealization
          ? RealizationMode::kFixed
          : RealizationMode::kResampled;
  eval.realization = options.realization;
  eval.seed = options.seed;
  eval.threads = options.threads;
  eval.keep_trials = false;
  auto agg = MonteCarloEvaluate(s, rand, eval);
  if (!agg.ok()) return agg.status();
  return agg->mean_recipient_weight;
}

}  // namespace bdmatch
