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

#include "bdmatch/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "bdmatch/simulator.h"

namespace bdmatch {

const char* PolicyKindName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kRand:
      return "rand";
    case PolicyKind::kMax:
      return "max";
    case PolicyKind::kRandMax:
      return "randmax";
    case PolicyKind::kNAdapLp:
      return "nadaplp";
    case PolicyKind::kNAdapOpt:
      return "nadapopt";
    case PolicyKind::kAdaptMatch:
      return "adaptmatch";
    case PolicyKind::kNAdapLpRate:
      return "nadaplp_rate";
  }
  return "unknown";
}

bool UsesPlan(PolicyKind kind) {
  return kind == PolicyKind::kNAdapLp || kind == PolicyKind::kNAdapOpt ||
         kind == PolicyKind::kAdaptMatch || kind == PolicyKind::kNAdapLpRate;
}

std::string PolicySpec::ToString() const {
  std::string out = PolicyKindName(kind);
  switch (kind) {
    case PolicyKind::kRand:
    case PolicyKind::kMax:
      break;
    case PolicyKind::kRandMax:
    case PolicyKind::kNAdapOpt:
      absl::StrAppendFormat(&out, ":gamma=%g", gamma);
      break;
    case PolicyKind::kAdaptMatch:
      absl::StrAppendFormat(&out, ":gamma=%g,fallback=%g", gamma,
                            fallback_gamma);
      break;
    case PolicyKind::kNAdapLp:
    case PolicyKind::kNAdapLpRate:
      absl::StrAppendFormat(&out, ":gamma=%g", gamma);
      if (alpha.has_value()) absl::StrAppendFormat(&out, ",alpha=%g", *alpha);
      break;
  }
  return out;
}

double PolicySpec::gamma_param() const {
  switch (kind) {
    case PolicyKind::kRand:
      return 1.0;
    case PolicyKind::kMax:
      return 0.0;
    default:
      return gamma;
  }
}

absl::StatusOr<PolicySpec> ParsePolicySpec(const std::string& text,
                                           Mode mode) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args =
      colon == std::string::npos ? std::string() : text.substr(colon + 1);
  PolicySpec spec;
  spec.mode = mode;
  if (name == "rand") {
    spec.kind = PolicyKind::kRand;
  } else if (name == "max") {
    spec.kind = PolicyKind::kMax;
  } else if (name == "randmax") {
    spec.kind = PolicyKind::kRandMax;
  } else if (name == "nadaplp") {
    spec.kind = PolicyKind::kNAdapLp;
  } else if (name == "nadapopt") {
    spec.kind = PolicyKind::kNAdapOpt;
  } else if (name == "adaptmatch") {
    spec.kind = PolicyKind::kAdaptMatch;
  } else if (name == "nadaplp_rate") {
    spec.kind = PolicyKind::kNAdapLpRate;
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown policy '", name, "'"));
  }
  const bool no_args =
      spec.kind == PolicyKind::kRand || spec.kind == PolicyKind::kMax;
  if (colon != std::string::npos && no_args) {
    return absl::InvalidArgumentError(
        absl::StrCat("policy '", name, "' takes no parameters"));
  }
  if (colon != std::string::npos && args.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("policy '", text, "': empty parameter list"));
  }
  if (!args.empty()) {
    double value = 0.0;
    if (args.find('=') == std::string::npos) {
      if (!absl::SimpleAtod(args, &value)) {
        return absl::InvalidArgumentError(
            absl::StrCat("policy '", text, "': bad number '", args, "'"));
      }
      spec.gamma = value;
      if (spec.kind == PolicyKind::kAdaptMatch) spec.fallback_gamma = value;
    } else {
      bool fallback_set = false;
      for (absl::string_view item : absl::StrSplit(args, ',')) {
        std::pair<std::string, std::string> kv = absl::StrSplit(item, '=');
        if (!absl::SimpleAtod(kv.second, &value)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "policy '", text, "': bad value for '", kv.first, "'"));
        }
        if (kv.first == "gamma") {
          spec.gamma = value;
        } else if (kv.first == "alpha") {
          spec.alpha = value;
        } else if (kv.first == "fallback") {
          spec.fallback_gamma = value;
          fallback_set = true;
        } else {
          return absl::InvalidArgumentError(absl::StrCat(
              "policy '", text, "': unknown parameter '", kv.first, "'"));
        }
      }
      if (spec.kind == PolicyKind::kAdaptMatch && !fallback_set) {
        spec.fallback_gamma = spec.gamma;
      }
    }
  }
  if (auto st = ValidatePolicySpec(spec); !st.ok()) return st;
  return spec;
}

absl::Status ValidatePolicySpec(const PolicySpec& spec) {
  const std::string name = PolicyKindName(spec.kind);
  if (!(spec.gamma >= 0.0 && spec.gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s: gamma %g outside [0,1]", name, spec.gamma));
  }
  if (!(spec.fallback_gamma >= 0.0 && spec.fallback_gamma <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%s: fallback gamma %g outside [0,1]", name, spec.fallback_gamma));
  }
  const bool takes_alpha = spec.kind == PolicyKind::kNAdapLp ||
                           spec.kind == PolicyKind::kNAdapLpRate;
  if (spec.alpha.has_value()) {
    if (!takes_alpha) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, " does not take alpha"));
    }
    if (!(*spec.alpha >= 0.0) || !std::isfinite(*spec.alpha)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s: alpha must be >= 0", name));
    }
  }
  switch (spec.kind) {
    case PolicyKind::kNAdapLp:
    case PolicyKind::kNAdapOpt:
    case PolicyKind::kAdaptMatch:
      if (spec.mode != Mode::kFixedTime) {
        return absl::InvalidArgumentError(absl::StrCat(
            name, " is a fixed-time policy; use nadaplp_rate in rate mode"));
      }
      break;
    case PolicyKind::kNAdapLpRate:
      if (spec.mode != Mode::kRateLimited) {
        return absl::InvalidArgumentError(
            absl::StrCat(name, " requires rate mode"));
      }
      break;
    default:
      break;
  }
  return absl::OkStatus();
}

// --- Myopic decisions --------------------------------------------------------

std::optional<int> RandDecide(std::span<const int> edges, Rng& rng) {
  if (edges.empty()) return std::nullopt;
  return edges[rng.UniformInt(static_cast<int>(edges.size()))];
}

std::optional<int> MaxDecide(const Scenario& s, int t,
                             std::span<const int> edges, Rng& rng) {
  if (edges.empty()) return std::nullopt;
  double best = -std::numeric_limits<double>::infinity();
  int ties = 0;
  for (int e : edges) {
    const double w = s.weight(e, t);
    if (w > best) {
      best = w;
      ties = 1;
    } else if (w == best) {
      ++ties;
    }
  }
  int pick = ties == 1 ? 0 : rng.UniformInt(ties);
  for (int e : edges) {
    if (s.weight(e, t) == best && pick-- == 0) return e;
  }
  return std::nullopt;
}

std::optional<int> RandMaxDecide(const Scenario& s, int t,
                                 std::span<const int> edges, double gamma,
                                 Rng& rng) {
  if (edges.empty()) return std::nullopt;
  return rng.Bernoulli(gamma) ? RandDecide(edges, rng)
                              : MaxDecide(s, t, edges, rng);
}

std::optional<int> RandDecide(const Scenario& s, int u, int t,
                              const DemandRealization& r, Rng& rng) {
  std::vector<int> edges;
  CollectAvailableEdges(s, u, t, r, edges);
  return RandDecide(edges, rng);
}

std::optional<int> MaxDecide(const Scenario& s, int u, int t,
                             const DemandRealization& r, Rng& rng) {
  std::vector<int> edges;
  CollectAvailableEdges(s, u, t, r, edges);
  return MaxDecide(s, t, edges, rng);
}

std::optional<int> RandMaxDecide(const Scenario& s, int u, int t,
                                 const DemandRealization& r, double gamma,
                                 Rng& rng) {
  std::vector<int> edges;
  CollectAvailableEdges(s, u, t, r, edges);
  return RandMaxDecide(s, t, edges, gamma, rng);
}

std::vector<double> RandMaxProbabilities(const Scenario& s, int t,
                                         std::span<const int> edges,
                                         double gamma) {
  std::vector<double> prob(edges.size(), 0.0);
  if (edges.empty()) return prob;
  double best = -std::numeric_limits<double>::infinity();
  for (int e : edges) best = std::max(best, s.weight(e, t));
  int ties = 0;
  for (int e : edges) ties += s.weight(e, t) == best ? 1 : 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    prob[i] = gamma / static_cast<double>(edges.size());
    if (s.weight(edges[i], t) == best) prob[i] += (1.0 - gamma) / ties;
  }
  return prob;
}

// --- Pre-match plans ---------------------------------------------------------

BetaEstimate BetaEstimate::Ones(const Scenario& s) {
  BetaEstimate b;
  b.horizon = s.horizon();
  b.beta.assign(static_cast<std::size_t>(s.num_donors()) * s.horizon(), 1.0);
  b.std_err.assign(b.beta.size(), 0.0);
  return b;
}

namespace {

// Builds alpha * x_et / (scale_ut * p_vt) per slot. Over-full slots are an
// error when `strict`, otherwise rescaled to mass 1.
absl::StatusOr<PlanDistribution> ScaledDistribution(
    const Scenario& s, const LpSolution& x, double alpha,
    const BetaEstimate* beta, bool fixed_time, bool strict) {
  const int T = s.horizon();
  PlanDistribution dist;
  dist.horizon = T;
  dist.slots.resize(static_cast<std::size_t>(s.num_donors()) * T);
  if (alpha == 0.0) return dist;
  for (int u = 0; u < s.num_donors(); ++u) {
    for (int t = 1; t <= T; ++t) {
      if (fixed_time && !s.scheduled(u, t)) continue;
      auto& slot = dist.slots[static_cast<std::size_t>(u) * T + (t - 1)];
      double mass = 0.0;
      for (int e : s.donor_edges(u)) {
        const double xv = x.x_at(e, t);
        const double p = s.availability(s.edge(e).recipient, t);
        if (xv <= 0.0 || p <= 0.0) continue;
        double q = alpha * xv / p;
        if (beta != nullptr) q /= beta->at(u, t);
        slot.emplace_back(e, q);
        mass += q;
      }
      if (mass > 1.0 + kPlanValidityTolerance && strict) {
        return absl::FailedPreconditionError(absl::StrFormat(
            "pre-match probabilities for donor '%s' at t=%d sum to %.9g > 1; "
            "alpha %g is too large",
            s.donor(u).id, t, mass, alpha));
      }
      if (mass > 1.0) {
        for (auto& [e, q] : slot) q /= mass;
      }
    }
  }
  return dist;
}

}  // namespace

absl::StatusOr<PlanDistribution> NAdapLpDistribution(const Scenario& s,
                                                     const LpSolution& x,
                                                     double alpha) {
  if (x.kind != ProblemKind::kFixedTimeLp) {
    return absl::InvalidArgumentError("nadaplp needs a fixedtime_lp solution");
  }
  return ScaledDistribution(s, x, alpha, nullptr, true, true);
}

absl::StatusOr<PlanDistribution> NAdapOptDistribution(const Scenario& s,
                                                      const LpSolution& y) {
  if (y.kind != ProblemKind::kNAdapOptLp) {
    return absl::InvalidArgumentError("nadapopt needs a nadapopt_lp solution");
  }
  const int T = s.horizon();
  PlanDistribution dist;
  dist.horizon = T;
  dist.slots.resize(static_cast<std::size_t>(s.num_donors()) * T);
  for (int u = 0; u < s.num_donors(); ++u) {
    for (int t = 1; t <= T; ++t) {
      auto& slot = dist.slots[static_cast<std::size_t>(u) * T + (t - 1)];
      double mass = 0.0;
      for (int e : s.donor_edges(u)) {
        const double q = y.x_at(e, t);
        if (q <= 0.0) continue;
        slot.emplace_back(e, q);
        mass += q;
      }
      if (mass > 1.0 + kPlanValidityTolerance) {
        return absl::InternalError(absl::StrFormat(
            "nadapopt_lp solution has mass %.9g at donor '%s', t=%d", mass,
            s.donor(u).id, t));
      }
      if (mass > 1.0) {
        for (auto& [e, q] : slot) q /= mass;
      }
    }
  }
  return dist;
}

absl::StatusOr<PlanDistribution> NAdapLpRateDistribution(
    const Scenario& s, const LpSolution& x, double alpha,
    const BetaEstimate& beta) {
  if (x.kind != ProblemKind::kRateLimitLp) {
    return absl::InvalidArgumentError(
        "nadaplp_rate needs a ratelimit_lp solution");
  }
  return ScaledDistribution(s, x, alpha, &beta, false, true);
}

PreMatchPlan SamplePlan(const Scenario& s, const PlanDistribution& dist,
                        std::uint64_t seed) {
  const int T = s.horizon();
  PreMatchPlan plan;
  plan.horizon = T;
  plan.assignment.assign(static_cast<std::size_t>(s.num_donors()) * T, -1);
  for (int u = 0; u < s.num_donors(); ++u) {
    for (int t = 1; t <= T; ++t) {
      const auto slot = dist.at(u, t);
      if (slot.empty()) continue;
      Rng rng(DeriveSeed(seed, kPlanStream, u, t));
      double draw = rng.Uniform01();
      for (const auto& [e, q] : slot) {
        if (draw < q) {
          plan.assignment[static_cast<std::size_t>(u) * T + (t - 1)] = e;
          break;
        }
        draw -= q;
      }
    }
  }
  return plan;
}

absl::StatusOr<PreMatchPlan> NAdapLpPlan(const Scenario& s, double gamma,
                                         double alpha, std::uint64_t seed,
                                         const SolveOptions& base) {
  SolveOptions options = base;
  options.gamma = gamma;
  auto x = SolveFixedTimeLp(s, options);
  if (!x.ok()) return x.status();
  auto dist = NAdapLpDistribution(s, *x, alpha);
  if (!dist.ok()) return dist.status();
  return SamplePlan(s, *dist, seed);
}

absl::StatusOr<PreMatchPlan> NAdapOptPlan(const Scenario& s, double gamma,
                                          std::uint64_t seed,
                                          const SolveOptions& base) {
  SolveOptions options = base;
  options.gamma = gamma;
  auto y = SolveNAdapOptLp(s, options);
  if (!y.ok()) return y.status();
  auto dist = NAdapOptDistribution(s, *y);
  if (!dist.ok()) return dist.status();
  return SamplePlan(s, *dist, seed);
}

absl::StatusOr<PreMatchPlan> NAdapLpRatePlan(const Scenario& s, double gamma,
                                             double alpha,
                                             const BetaEstimate& beta,
                                             std::uint64_t seed,
                                             const SolveOptions& base) {
  SolveOptions options = base;
  options.gamma = gamma;
  auto x = SolveRateLimitLp(s, options);
  if (!x.ok()) return x.status();
  auto dist = NAdapLpRateDistribution(s, *x, alpha, beta);
  if (!dist.ok()) return dist.status();
  return SamplePlan(s, *dist, seed);
}

std::optional<int> ExecutePrematch(const Scenario& s, const PreMatchPlan& plan,
                                   int u, int t, const DemandRealization& r) {
  const int e = plan.at(u, t);
  if (e < 0 || !r.available(s.edge(e).recipient, t)) return std::nullopt;
  return e;
}

std::optional<int> AdaptMatchDecide(const Scenario& s, const PreMatchPlan& plan,
                                    int u, int t, const DemandRealization& r,
                                    double fallback_gamma, Rng& rng) {
  if (auto e = ExecutePrematch(s, plan, u, t, r)) return e;
  return RandMaxDecide(s, u, t, r, fallback_gamma, rng);
}

MatchingOutcome ExecutePlan(const Scenario& s, const PreMatchPlan& plan,
                            const DemandRealization& r, Mode mode) {
  const int K = s.rate_limit();
  MatchingOutcome out = MatchingOutcome::Empty(s);
  std::vector<int> last(s.num_donors(), std::numeric_limits<int>::min() / 2);
  for (int t = 1; t <= s.horizon(); ++t) {
    for (int u = 0; u < s.num_donors(); ++u) {
      const bool available = mode == Mode::kFixedTime ? s.scheduled(u, t)
                                                      : t - last[u] >= K;
      if (!available) continue;
      if (auto e = ExecutePrematch(s, plan, u, t, r)) {
        out.Add(s, *e, t);
        last[u] = t;
      }
    }
  }
  return out;
}

BetaEstimate EstimateBeta(const Scenario& s, const LpSolution& x, double alpha,
                          const BetaOptions& options) {
  const int T = s.horizon();
  const int K = s.rate_limit();
  const int trials = std::max(1, options.trials);
  BetaEstimate beta = BetaEstimate::Ones(s);
  std::vector<int> count(beta.beta.size());
  std::vector<int> last(s.num_donors());
  for (int round = 0; round < options.rounds; ++round) {
    auto dist = ScaledDistribution(s, x, alpha, &beta, false, false);
    std::fill(count.begin(), count.end(), 0);
    for (int i = 0; i < trials; ++i) {
      const std::uint64_t seed = DeriveSeed(options.seed, kBetaStream, round, i);
      Rng rr(DeriveSeed(seed, kRealizationStream));
      const DemandRealization r = DrawRealization(s, rr);
      const PreMatchPlan plan = SamplePlan(s, *dist, seed);
      std::fill(last.begin(), last.end(), std::numeric_limits<int>::min() / 2);
      for (int t = 1; t <= T; ++t) {
        for (int u = 0; u < s.num_donors(); ++u) {
          if (t - last[u] < K) continue;
          ++count[static_cast<std::size_t>(u) * T + (t - 1)];
          if (ExecutePrematch(s, plan, u, t, r)) last[u] = t;
        }
      }
    }
    for (std::size_t i = 0; i < count.size(); ++i) {
      const double b = static_cast<double>(count[i]) / trials;
      beta.beta[i] = std::max(b, 1.0 / trials);
      beta.std_err[i] = std::sqrt(b * (1.0 - b) / trials);
    }
  }
  return beta;
}

// --- Prepared policies -------------------------------------------------------

absl::StatusOr<PreparedPolicy> PreparePolicy(const Scenario& s,
                                             const PolicySpec& spec,
                                             const PrepareOptions& options) {
  if (auto st = ValidatePolicySpec(spec); !st.ok()) return st;
  PreparedPolicy out;
  out.spec = spec;
  if (!UsesPlan(spec.kind)) return out;

  const int D = DonorMaxDegree(s);
  SolveOptions solve;
  solve.gamma = spec.gamma;
  solve.fairness_recipients = options.fairness_recipients;
  solve.backend = options.backend;

  switch (spec.kind) {
    case PolicyKind::kNAdapLp: {
      out.alpha = spec.alpha.value_or(D > 0 ? 1.0 / D : 0.0);
      auto x = SolveFixedTimeLp(s, solve);
      if (!x.ok()) return x.status();
      auto dist = NAdapLpDistribution(s, *x, out.alpha);
      if (!dist.ok()) return dist.status();
      out.lp = *std::move(x);
      out.plan = *std::move(dist);
      break;
    }
    case PolicyKind::kNAdapOpt:
    case PolicyKind::kAdaptMatch: {
      auto y = SolveNAdapOptLp(s, solve);
      if (!y.ok()) return y.status();
      auto dist = NAdapOptDistribution(s, *y);
      if (!dist.ok()) return dist.status();
      out.lp = *std::move(y);
      out.plan = *std::move(dist);
      break;
    }
    case PolicyKind::kNAdapLpRate: {
      out.alpha = spec.alpha.value_or(D > 0 ? 1.0 / (2.0 * D) : 0.0);
      auto x = SolveRateLimitLp(s, solve);
      if (!x.ok()) return x.status();
      BetaEstimate beta = EstimateBeta(s, *x, out.alpha, options.beta);
      auto dist = NAdapLpRateDistribution(s, *x, out.alpha, beta);
      if (!dist.ok()) return dist.status();
      out.lp = *std::move(x);
      out.beta = std::move(beta);
      out.plan = *std::move(dist);
      break;
    }
    default:
      break;
  }
  return out;
}

std::optional<int> Decide(const Scenario& s, const PreparedPolicy& policy,
                          const PreMatchPlan* plan, int u, int t,
                          const DemandRealization& r,
                          std::vector<int>& scratch, Rng& rng) {
  const PolicySpec& spec = policy.spec;
  switch (spec.kind) {
    case PolicyKind::kRand:
      CollectAvailableEdges(s, u, t, r, scratch);
      return RandDecide(scratch, rng);
    case PolicyKind::kMax:
      CollectAvailableEdges(s, u, t, r, scratch);
      return MaxDecide(s, t, scratch, rng);
    case PolicyKind::kRandMax:
      CollectAvailableEdges(s, u, t, r, scratch);
      return RandMaxDecide(s, t, scratch, spec.gamma, rng);
    case PolicyKind::kNAdapLp:
    case PolicyKind::kNAdapOpt:
    case PolicyKind::kNAdapLpRate:
      return ExecutePrematch(s, *plan, u, t, r);
    case PolicyKind::kAdaptMatch:
      if (auto e = ExecutePrematch(s, *plan, u, t, r)) return e;
      CollectAvailableEdges(s, u, t, r, scratch);
      return RandMaxDecide(s, t, scratch, spec.fallback_gamma, rng);
  }
  return std::nullopt;
}

}  // namespace bdmatch
