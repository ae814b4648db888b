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

#include "bdmatch/scenario.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace bdmatch {

const char* ModeName(Mode mode) {
  return mode == Mode::kFixedTime ? "fixed" : "rate";
}

absl::StatusOr<Mode> ParseMode(std::string_view text) {
  if (text == "fixed" || text == "fixed_time") return Mode::kFixedTime;
  if (text == "rate" || text == "rate_limited") return Mode::kRateLimited;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mode '", std::string(text), "' (expected fixed|rate)"));
}

void Scenario::set_normalization(std::vector<double> scores) {
  normalization_ = std::move(scores);
}

std::optional<int> Scenario::FindEdge(int u, int v) const {
  for (int e : donor_edges_[u]) {
    if (edges_[e].recipient == v) return e;
  }
  return std::nullopt;
}

void Scenario::RebuildAdjacency() {
  donor_edges_.assign(donors_.size(), {});
  recipient_edges_.assign(recipients_.size(), {});
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.donor < 0 || edge.donor >= num_donors()) continue;
    if (edge.recipient < 0 || edge.recipient >= num_recipients()) continue;
    donor_edges_[edge.donor].push_back(e);
    recipient_edges_[edge.recipient].push_back(e);
  }
}

ScenarioBuilder::ScenarioBuilder(int horizon, int rate_limit)
    : horizon_(horizon), rate_limit_(rate_limit) {}

int ScenarioBuilder::AddDonor(std::string id, int first_notify_day,
                              LatLon location) {
  donors_.push_back({std::move(id), location, first_notify_day});
  schedule_override_.emplace_back(std::max(horizon_, 0));
  return static_cast<int>(donors_.size()) - 1;
}

int ScenarioBuilder::AddRecipient(std::string id, RecipientKind kind,
                                  LatLon location) {
  recipients_.push_back({std::move(id), location, kind});
  availability_.emplace_back(std::max(horizon_, 0));
  return static_cast<int>(recipients_.size()) - 1;
}

int ScenarioBuilder::AddEdge(int donor, int recipient, double weight) {
  edges_.push_back({donor, recipient});
  weights_.emplace_back(std::max(horizon_, 0), weight);
  return static_cast<int>(edges_.size()) - 1;
}

void ScenarioBuilder::SetWeight(int edge, int t, double weight) {
  weights_[edge][t - 1] = weight;
}

void ScenarioBuilder::SetWeights(int edge, std::span<const double> per_step) {
  for (int t = 1; t <= horizon_ && t <= static_cast<int>(per_step.size());
       ++t) {
    weights_[edge][t - 1] = per_step[t - 1];
  }
}

void ScenarioBuilder::SetAvailability(int recipient, int t, double p) {
  availability_[recipient][t - 1] = p;
}

void ScenarioBuilder::SetAvailabilityProfile(int recipient,
                                             std::span<const double> per_step) {
  for (int t = 1; t <= horizon_ && t <= static_cast<int>(per_step.size());
       ++t) {
    availability_[recipient][t - 1] = per_step[t - 1];
  }
}

void ScenarioBuilder::SetSchedule(int donor, int t, bool on) {
  schedule_override_[donor][t - 1] = on;
}

void ScenarioBuilder::SetNormalization(std::vector<double> scores) {
  normalization_ = std::move(scores);
}

Scenario ScenarioBuilder::Build() const {
  Scenario s;
  s.horizon_ = horizon_;
  s.rate_limit_ = rate_limit_;
  s.donors_ = donors_;
  s.recipients_ = recipients_;
  s.edges_ = edges_;
  const int T = std::max(horizon_, 0);

  s.weights_.reserve(edges_.size() * T);
  for (const auto& row : weights_) {
    s.weights_.insert(s.weights_.end(), row.begin(), row.end());
  }

  s.availability_.reserve(recipients_.size() * T);
  for (std::size_t v = 0; v < recipients_.size(); ++v) {
    const double fallback =
        recipients_[v].kind == RecipientKind::kStatic ? 1.0 : 0.0;
    for (int t = 0; t < T; ++t) {
      s.availability_.push_back(availability_[v][t].value_or(fallback));
    }
  }

  s.schedule_.reserve(donors_.size() * T);
  for (std::size_t u = 0; u < donors_.size(); ++u) {
    const int first = donors_[u].first_notify_day;
    for (int t = 1; t <= T; ++t) {
      bool on = rate_limit_ > 0 && t >= first && (t - first) % rate_limit_ == 0;
      if (schedule_override_[u][t - 1].has_value()) {
        on = *schedule_override_[u][t - 1];
      }
      s.schedule_.push_back(on ? 1 : 0);
    }
  }

  s.normalization_ = normalization_;
  s.RebuildAdjacency();
  return s;
}

namespace {

bool InUnitInterval(double x) { return std::isfinite(x) && x >= 0 && x <= 1; }

std::string EdgeName(const Scenario& s, int e) {
  const Edge& edge = s.edge(e);
  const bool ok = edge.donor >= 0 && edge.donor < s.num_donors() &&
                  edge.recipient >= 0 && edge.recipient < s.num_recipients();
  if (!ok) return absl::StrCat("edge #", e);
  return absl::StrCat("edge #", e, " ('", s.donor(edge.donor).id, "' -> '",
                      s.recipient(edge.recipient).id, "')");
}

}  // namespace

std::vector<std::string> ValidateScenario(const Scenario& s) {
  std::vector<std::string> out;
  const int T = s.horizon();
  const int K = s.rate_limit();
  if (T < 1) out.push_back(absl::StrCat("horizon must be >= 1, got ", T));
  if (K < 1) out.push_back(absl::StrCat("rate_limit must be >= 1, got ", K));

  std::set<std::string> seen;
  for (const Donor& d : s.donors()) {
    if (!seen.insert(d.id).second) {
      out.push_back(absl::StrCat("duplicate donor id '", d.id, "'"));
    }
    if (d.first_notify_day < 1) {
      out.push_back(absl::StrCat("donor '", d.id,
                                 "' has first_notify_day < 1"));
    }
  }
  seen.clear();
  for (const Recipient& r : s.recipients()) {
    if (!seen.insert(r.id).second) {
      out.push_back(absl::StrCat("duplicate recipient id '", r.id, "'"));
    }
  }

  std::set<std::pair<int, int>> pairs;
  for (int e = 0; e < s.num_edges(); ++e) {
    const Edge& edge = s.edge(e);
    if (edge.donor < 0 || edge.donor >= s.num_donors()) {
      out.push_back(absl::StrCat("edge #", e, " references unknown donor #",
                                 edge.donor));
      continue;
    }
    if (edge.recipient < 0 || edge.recipient >= s.num_recipients()) {
      out.push_back(absl::StrCat("edge #", e,
                                 " references unknown recipient #",
                                 edge.recipient));
      continue;
    }
    if (!pairs.insert({edge.donor, edge.recipient}).second) {
      out.push_back(absl::StrCat("duplicate ", EdgeName(s, e)));
    }
  }
  if (T < 1) return out;

  for (int e = 0; e < s.num_edges(); ++e) {
    for (int t = 1; t <= T; ++t) {
      if (!InUnitInterval(s.weight(e, t))) {
        out.push_back(absl::StrFormat("%s has weight %g at t=%d outside [0,1]",
                                      EdgeName(s, e), s.weight(e, t), t));
        break;
      }
    }
  }
  for (int v = 0; v < s.num_recipients(); ++v) {
    const Recipient& r = s.recipient(v);
    for (int t = 1; t <= T; ++t) {
      const double p = s.availability(v, t);
      if (!InUnitInterval(p)) {
        out.push_back(absl::StrFormat(
            "recipient '%s' has availability %g at t=%d outside [0,1]", r.id,
            p, t));
        break;
      }
      if (r.kind == RecipientKind::kStatic && p != 1.0) {
        out.push_back(absl::StrFormat(
            "static recipient '%s' has availability %g at t=%d", r.id, p, t));
        break;
      }
    }
  }
  if (K >= 1) {
    for (int u = 0; u < s.num_donors(); ++u) {
      int last = 0;
      for (int t = 1; t <= T; ++t) {
        if (!s.scheduled(u, t)) continue;
        if (last != 0 && t - last != K) {
          out.push_back(absl::StrFormat(
              "donor '%s' is scheduled at t=%d and t=%d, not %d steps apart",
              s.donor(u).id, last, t, K));
          break;
        }
        last = t;
      }
    }
  }
  if (s.has_normalization()) {
    if (static_cast<int>(s.normalization_scores().size()) !=
        s.num_recipients()) {
      out.push_back(absl::StrCat("normalization has ",
                                 s.normalization_scores().size(),
                                 " entries for ", s.num_recipients(),
                                 " recipients"));
    } else {
      for (int v = 0; v < s.num_recipients(); ++v) {
        const double m = s.normalization(v);
        if (!std::isfinite(m) || m < 0) {
          out.push_back(absl::StrFormat(
              "recipient '%s' has negative normalization %g",
              s.recipient(v).id, m));
        }
      }
    }
  }
  return out;
}

int DonorMaxDegree(const Scenario& s) {
  std::size_t best = 0;
  for (int u = 0; u < s.num_donors(); ++u) {
    best = std::max(best, s.donor_edges(u).size());
  }
  return static_cast<int>(best);
}

DemandRealization::DemandRealization(int num_recipients, int horizon)
    : num_recipients_(num_recipients),
      horizon_(horizon),
      available_(static_cast<std::size_t>(num_recipients) * horizon, 0) {}

DemandRealization DemandRealization::AllAvailable(const Scenario& s) {
  DemandRealization r(s.num_recipients(), s.horizon());
  std::fill(r.available_.begin(), r.available_.end(), 1);
  return r;
}

std::vector<std::string> ValidateRealization(const Scenario& s,
                                             const DemandRealization& r) {
  std::vector<std::string> out;
  if (r.num_recipients() != s.num_recipients() ||
      r.horizon() != s.horizon()) {
    out.push_back(absl::StrFormat(
        "realization is %dx%d, scenario needs %dx%d", r.num_recipients(),
        r.horizon(), s.num_recipients(), s.horizon()));
    return out;
  }
  for (int v = 0; v < s.num_recipients(); ++v) {
    if (s.recipient(v).kind != RecipientKind::kStatic) continue;
    for (int t = 1; t <= s.horizon(); ++t) {
      if (!r.available(v, t)) {
        out.push_back(absl::StrFormat(
            "static recipient '%s' unavailable at t=%d", s.recipient(v).id,
            t));
        break;
      }
    }
  }
  return out;
}

absl::StatusOr<std::vector<int>> AvailableEdges(const Scenario& s, int u,
                                                int t,
                                                const DemandRealization& r,
                                                bool donor_available) {
  if (t < 1 || t > s.horizon()) {
    return absl::OutOfRangeError(
        absl::StrFormat("time step %d outside 1..%d", t, s.horizon()));
  }
  if (u < 0 || u >= s.num_donors()) {
    return absl::OutOfRangeError(absl::StrCat("unknown donor #", u));
  }
  std::vector<int> out;
  if (donor_available) CollectAvailableEdges(s, u, t, r, out);
  return out;
}

MatchingOutcome MatchingOutcome::Empty(const Scenario& s) {
  MatchingOutcome o;
  o.matched.assign(std::max(s.horizon(), 0), {});
  o.recipient_weight.assign(s.num_recipients(), 0.0);
  return o;
}

void MatchingOutcome::Add(const Scenario& s, int e, int t) {
  matched[t - 1].push_back(e);
  const double w = s.weight(e, t);
  recipient_weight[s.edge(e).recipient] += w;
  total_weight += w;
}

std::vector<std::string> ValidateOutcome(const Scenario& s,
                                         const DemandRealization& r, Mode mode,
                                         const MatchingOutcome& outcome) {
  std::vector<std::string> out;
  const int T = s.horizon();
  if (static_cast<int>(outcome.matched.size()) != T) {
    out.push_back(absl::StrFormat("outcome covers %d steps, horizon is %d",
                                  outcome.matched.size(), T));
    return out;
  }
  if (static_cast<int>(outcome.recipient_weight.size()) !=
      s.num_recipients()) {
    out.push_back("recipient_weight size does not match recipient count");
    return out;
  }
  std::vector<double> expected(s.num_recipients(), 0.0);
  std::vector<int> last_match(s.num_donors(), 0);
  std::vector<int> matched_at(s.num_donors(), 0);
  for (int t = 1; t <= T; ++t) {
    for (int e : outcome.matched[t - 1]) {
      if (e < 0 || e >= s.num_edges()) {
        out.push_back(absl::StrFormat("unknown edge #%d at t=%d", e, t));
        continue;
      }
      const Edge& edge = s.edge(e);
      const std::string who = EdgeName(s, e);
      if (matched_at[edge.donor] == t) {
        out.push_back(absl::StrFormat("donor '%s' matched twice at t=%d",
                                      s.donor(edge.donor).id, t));
      }
      matched_at[edge.donor] = t;
      if (!r.available(edge.recipient, t)) {
        out.push_back(absl::StrFormat(
            "%s matched at t=%d while recipient unavailable", who, t));
      }
      if (mode == Mode::kFixedTime) {
        if (!s.scheduled(edge.donor, t)) {
          out.push_back(absl::StrFormat(
              "%s matched at unscheduled step t=%d", who, t));
        }
      } else {
        const int prev = last_match[edge.donor];
        if (prev != 0 && prev != t && t - prev < s.rate_limit()) {
          out.push_back(absl::StrFormat(
              "donor '%s' matched at t=%d and t=%d, closer than K=%d",
              s.donor(edge.donor).id, prev, t, s.rate_limit()));
        }
      }
      last_match[edge.donor] = t;
      expected[edge.recipient] += s.weight(e, t);
    }
  }
  double sum = 0.0;
  for (int v = 0; v < s.num_recipients(); ++v) {
    const double got = outcome.recipient_weight[v];
    if (std::abs(got - expected[v]) > 1e-9 * (1.0 + std::abs(expected[v]))) {
      out.push_back(absl::StrFormat(
          "recipient '%s' weight %.12g inconsistent with matches (%.12g)",
          s.recipient(v).id, got, expected[v]));
    }
    sum += got;
  }
  if (std::abs(sum - outcome.total_weight) > 1e-9 * (1.0 + std::abs(sum))) {
    out.push_back(absl::StrFormat(
        "total_weight %.12g differs from sum of recipient weights %.12g",
        outcome.total_weight, sum));
  }
  return out;
}

}  // namespace bdmatch
