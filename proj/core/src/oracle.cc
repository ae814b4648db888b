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

#include "bdmatch/oracle.h"

#include <algorithm>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace bdmatch {

namespace {

constexpr double kProportionalityTolerance = 1e-9;

bool IsProportional(const std::vector<double>& y, const std::vector<double>& m,
                    double gamma) {
  if (gamma <= 0.0) return true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t v = 0; v < y.size(); ++v) {
    lo = std::min(lo, y[v] / m[v]);
    hi = std::max(hi, y[v] / m[v]);
  }
  return y.empty() || gamma * hi <= lo + kProportionalityTolerance;
}

absl::StatusOr<std::vector<double>> ScoresForGamma(const Scenario& s,
                                                   double gamma,
                                                   bool default_to_one) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0,1], got %g", gamma));
  }
  if (!s.has_normalization()) {
    if (gamma > 0.0 && !default_to_one) {
      return absl::FailedPreconditionError(
          "gamma > 0 requires normalization scores");
    }
    return std::vector<double>(s.num_recipients(), 1.0);
  }
  if (gamma > 0.0) {
    for (int v = 0; v < s.num_recipients(); ++v) {
      if (!(s.normalization(v) > 0.0)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "recipient '%s' has m_v = %g; gamma > 0 needs m_v > 0",
            s.recipient(v).id, s.normalization(v)));
      }
    }
  }
  return s.normalization_scores();
}

absl::Status CheckBound(double product) {
  if (product > static_cast<double>(kOracleEnumerationLimit)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "instance too large for enumeration: %.0f assignments > %d", product,
        kOracleEnumerationLimit));
  }
  return absl::OkStatus();
}

struct OptSearch {
  const Scenario& s;
  const DemandRealization& r;
  Mode mode;
  double gamma;
  std::vector<double> m;
  std::vector<std::pair<int, int>> slots = {};  // (u, t), donor-major
  std::vector<int> last = {};
  std::vector<double> y = {};
  std::vector<std::pair<int, int>> current = {};
  double weight = 0.0;
  BruteForceResult best = {};

  void Run(std::size_t i) {
    if (i == slots.size()) {
      ++best.leaves;
      if (IsProportional(y, m, gamma) && weight > best.objective + 1e-12) {
        best.objective = weight;
        best.matching = current;
      }
      return;
    }
    const auto [u, t] = slots[i];
    Run(i + 1);  // no match
    const bool donor_on = mode == Mode::kFixedTime
                              ? s.scheduled(u, t)
                              : t - last[u] >= s.rate_limit();
    if (!donor_on) return;
    for (int e : s.donor_edges(u)) {
      const int v = s.edge(e).recipient;
      if (!r.available(v, t)) continue;
      const double w = s.weight(e, t);
      const int saved = last[u];
      last[u] = t;
      y[v] += w;
      weight += w;
      current.emplace_back(e, t);
      Run(i + 1);
      current.pop_back();
      weight -= w;
      y[v] -= w;
      last[u] = saved;
    }
  }
};

}  // namespace

absl::StatusOr<BruteForceResult> BruteForceOpt(const Scenario& s,
                                               const DemandRealization& r,
                                               Mode mode, double gamma) {
  auto m = ScoresForGamma(s, gamma, false);
  if (!m.ok()) return m.status();
  if (r.num_recipients() != s.num_recipients() || r.horizon() != s.horizon()) {
    return absl::InvalidArgumentError("realization does not match scenario");
  }
  OptSearch search{s, r, mode, gamma, *std::move(m)};
  double product = 1.0;
  for (int u = 0; u < s.num_donors(); ++u) {
    for (int t = 1; t <= s.horizon(); ++t) {
      if (mode == Mode::kFixedTime && !s.scheduled(u, t)) continue;
      int choices = 1;
      for (int e : s.donor_edges(u)) {
        choices += r.available(s.edge(e).recipient, t) ? 1 : 0;
      }
      if (choices == 1) continue;
      product *= choices;
      search.slots.emplace_back(u, t);
    }
  }
  if (auto st = CheckBound(product); !st.ok()) return st;
  search.last.assign(s.num_donors(), std::numeric_limits<int>::min() / 2);
  search.y.assign(s.num_recipients(), 0.0);
  search.Run(0);
  return search.best;
}

absl::StatusOr<std::vector<double>> BruteForcePolicyExpectation(
    const Scenario& s, const PreparedPolicy& policy,
    const std::optional<DemandRealization>& r) {
  const PolicySpec& spec = policy.spec;
  if (auto st = ValidatePolicySpec(spec); !st.ok()) return st;
  if (UsesPlan(spec.kind) && !policy.plan.has_value()) {
    return absl::FailedPreconditionError(
        absl::StrCat(spec.ToString(), " needs a prepared plan distribution"));
  }
  if (r.has_value() &&
      (r->num_recipients() != s.num_recipients() || r->horizon() != s.horizon())) {
    return absl::InvalidArgumentError("realization does not match scenario");
  }
  // Fallback behaviour when no pre-match executes: randmax(fallback) or none.
  bool has_fallback = true;
  double fallback_gamma = 0.0;
  switch (spec.kind) {
    case PolicyKind::kRand:
      fallback_gamma = 1.0;
      break;
    case PolicyKind::kMax:
      fallback_gamma = 0.0;
      break;
    case PolicyKind::kRandMax:
      fallback_gamma = spec.gamma;
      break;
    case PolicyKind::kAdaptMatch:
      fallback_gamma = spec.fallback_gamma;
      break;
    default:
      has_fallback = false;
      break;
  }

  const int T = s.horizon();
  const int K = spec.mode == Mode::kRateLimited ? s.rate_limit() : 1;
  std::vector<double> expectation(s.num_recipients(), 0.0);
  std::vector<int> uncertain;      // neighbour recipients with 0 < p < 1
  std::vector<bool> available;     // per donor edge, in the current pattern
  std::vector<int> edges_on;
  std::vector<double> choose;      // per donor edge: P[match e | donor free]
  for (int u = 0; u < s.num_donors(); ++u) {
    const auto edges = s.donor_edges(u);
    // dist[k]: probability that the donor is blocked for k more steps.
    std::vector<double> dist(K, 0.0);
    dist[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
      const bool scheduled =
          spec.mode == Mode::kFixedTime ? s.scheduled(u, t) : true;
      const double p_free = scheduled ? dist[0] : 0.0;

      choose.assign(edges.size(), 0.0);
      if (p_free > 0.0 && !edges.empty()) {
        uncertain.clear();
        for (std::size_t i = 0; i < edges.size(); ++i) {
          const int v = s.edge(edges[i]).recipient;
          const double p = s.availability(v, t);
          if (!r.has_value() && s.recipient(v).kind == RecipientKind::kDynamic &&
              p > 0.0 && p < 1.0) {
            uncertain.push_back(static_cast<int>(i));
          }
        }
        if (uncertain.size() >= 63 ||
            (std::int64_t{1} << uncertain.size()) > kOracleSubsetLimit) {
          return absl::OutOfRangeError(absl::StrFormat(
              "donor '%s' at t=%d has %d uncertain neighbours; too many to "
              "enumerate",
              s.donor(u).id, t, uncertain.size()));
        }
        const auto slot = policy.plan.has_value()
                              ? policy.plan->at(u, t)
                              : std::span<const std::pair<int, double>>();
        const std::int64_t patterns = std::int64_t{1} << uncertain.size();
        for (std::int64_t mask = 0; mask < patterns; ++mask) {
          double prob = 1.0;
          available.assign(edges.size(), false);
          std::size_t bit = 0;
          for (std::size_t i = 0; i < edges.size(); ++i) {
            const int v = s.edge(edges[i]).recipient;
            const double p = s.availability(v, t);
            if (bit < uncertain.size() &&
                uncertain[bit] == static_cast<int>(i)) {
              const bool on = (mask >> bit) & 1;
              available[i] = on;
              prob *= on ? p : 1.0 - p;
              ++bit;
            } else if (r.has_value()) {
              available[i] = r->available(v, t);
            } else {
              available[i] = s.recipient(v).kind == RecipientKind::kStatic ||
                             p >= 1.0;
            }
          }
          if (prob == 0.0) continue;
          // Pre-match executes with the mass of available planned edges.
          double executed = 0.0;
          for (const auto& [e, q] : slot) {
            const auto it = std::find(edges.begin(), edges.end(), e);
            const std::size_t i = it - edges.begin();
            if (available[i]) {
              choose[i] += prob * q;
              executed += q;
            }
          }
          if (!has_fallback) continue;
          const double rest = std::max(0.0, 1.0 - executed);
          if (rest <= 0.0) continue;
          edges_on.clear();
          std::vector<std::size_t> index;
          for (std::size_t i = 0; i < edges.size(); ++i) {
            if (available[i]) {
              edges_on.push_back(edges[i]);
              index.push_back(i);
            }
          }
          const std::vector<double> q =
              RandMaxProbabilities(s, t, edges_on, fallback_gamma);
          for (std::size_t k = 0; k < q.size(); ++k) {
            choose[index[k]] += prob * rest * q[k];
          }
        }
      }

      double matched = 0.0;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        const int e = edges[i];
        expectation[s.edge(e).recipient] += p_free * choose[i] * s.weight(e, t);
        matched += choose[i];
      }
      // Advance the rate-limit state by one step.
      if (K > 1) {
        std::vector<double> next(K, 0.0);
        next[0] += dist[0] * (1.0 - matched) + dist[1];
        for (int k = 2; k < K; ++k) next[k - 1] += dist[k];
        next[K - 1] += dist[0] * matched;
        dist = std::move(next);
      }
    }
  }
  return expectation;
}

absl::StatusOr<std::optional<std::vector<int>>> FindProportionalAllocation(
    const Scenario& s, double gamma) {
  auto m = ScoresForGamma(s, gamma, true);
  if (!m.ok()) return m.status();
  double product = 1.0;
  for (int u = 0; u < s.num_donors(); ++u) {
    product *= 1.0 + static_cast<double>(s.donor_edges(u).size());
  }
  if (auto st = CheckBound(product); !st.ok()) return st;

  std::vector<double> y(s.num_recipients(), 0.0);
  std::vector<int> chosen;
  std::optional<std::vector<int>> found;
  auto search = [&](auto&& self, int u) -> void {
    if (found.has_value()) return;
    if (u == s.num_donors()) {
      if (!chosen.empty() && IsProportional(y, *m, gamma)) found = chosen;
      return;
    }
    self(self, u + 1);
    for (int e : s.donor_edges(u)) {
      const int v = s.edge(e).recipient;
      const double w = s.weight(e, 1);
      y[v] += w;
      chosen.push_back(e);
      self(self, u + 1);
      chosen.pop_back();
      y[v] -= w;
    }
  };
  search(search, 0);
  return found;
}

}  // namespace bdmatch
