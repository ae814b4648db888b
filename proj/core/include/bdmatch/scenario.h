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

// Instance data model for donor/recipient matching over a discrete horizon.
//
// A Scenario is a weighted bipartite donation graph G = (U, V, E) together
// with per-step edge weights w_et, recipient availability probabilities p_vt,
// the fixed-time donor schedule a_ut, the horizon T, the rate limit K and the
// per-recipient normalization scores m_v.
//
// Donors, recipients and edges are addressed by dense 0-based indices assigned
// in insertion order. Time steps are 1-based: t ranges over 1..horizon().
// Opaque string identifiers are kept only for file I/O and reporting.

#ifndef BDMATCH_SCENARIO_H_
#define BDMATCH_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace bdmatch {

// How donor availability is decided during a run.
//  - kFixedTime: donor u may be matched at t iff a_ut = 1.
//  - kRateLimited: donor u may be matched at t iff u was not matched in any of
//    the previous K - 1 steps.
enum class Mode { kFixedTime, kRateLimited };

const char* ModeName(Mode mode);
absl::StatusOr<Mode> ParseMode(std::string_view text);

enum class RecipientKind { kStatic, kDynamic };

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct Donor {
  std::string id;
  LatLon location;
  int first_notify_day = 1;
};

struct Recipient {
  std::string id;
  LatLon location;
  RecipientKind kind = RecipientKind::kStatic;
};

struct Edge {
  int donor = 0;
  int recipient = 0;
};

class Scenario {
 public:
  Scenario() = default;

  int num_donors() const { return static_cast<int>(donors_.size()); }
  int num_recipients() const { return static_cast<int>(recipients_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int horizon() const { return horizon_; }
  int rate_limit() const { return rate_limit_; }

  const Donor& donor(int u) const { return donors_[u]; }
  const Recipient& recipient(int v) const { return recipients_[v]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Donor>& donors() const { return donors_; }
  const std::vector<Recipient>& recipients() const { return recipients_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // w_et, p_vt and a_ut. `t` is 1-based.
  double weight(int e, int t) const { return weights_[Slot(e, t)]; }
  double availability(int v, int t) const { return availability_[Slot(v, t)]; }
  bool scheduled(int u, int t) const { return schedule_[Slot(u, t)] != 0; }

  // Edges adjacent to a donor (E_u:) or a recipient (E_:v), by edge index.
  // Edges with out-of-range endpoints are listed nowhere.
  std::span<const int> donor_edges(int u) const { return donor_edges_[u]; }
  std::span<const int> recipient_edges(int v) const {
    return recipient_edges_[v];
  }

  bool has_normalization() const { return !normalization_.empty(); }
  double normalization(int v) const { return normalization_[v]; }
  const std::vector<double>& normalization_scores() const {
    return normalization_;
  }
  // Replaces m_v. An empty vector clears it.
  void set_normalization(std::vector<double> scores);

  // Index of the edge (u, v), if present.
  std::optional<int> FindEdge(int u, int v) const;

  const std::vector<double>& raw_weights() const { return weights_; }
  const std::vector<double>& raw_availability() const { return availability_; }

 private:
  friend class ScenarioBuilder;

  std::size_t Slot(int index, int t) const {
    return static_cast<std::size_t>(index) * horizon_ + (t - 1);
  }
  void RebuildAdjacency();

  std::vector<Donor> donors_;
  std::vector<Recipient> recipients_;
  std::vector<Edge> edges_;
  int horizon_ = 1;
  int rate_limit_ = 1;
  std::vector<double> weights_;        // [e * T + t - 1]
  std::vector<double> availability_;   // [v * T + t - 1]
  std::vector<std::uint8_t> schedule_; // [u * T + t - 1]
  std::vector<double> normalization_;  // [v], empty if not set
  std::vector<std::vector<int>> donor_edges_;
  std::vector<std::vector<int>> recipient_edges_;
};

// Incremental construction. Build() performs no validation beyond sizing so
// that malformed instances can be represented and reported by
// ValidateScenario().
class ScenarioBuilder {
 public:
  ScenarioBuilder(int horizon, int rate_limit);

  int AddDonor(std::string id, int first_notify_day = 1, LatLon location = {});
  int AddRecipient(std::string id, RecipientKind kind, LatLon location = {});
  // Adds edge (donor, recipient) with a weight that is constant over time.
  int AddEdge(int donor, int recipient, double weight);

  void SetWeight(int edge, int t, double weight);
  void SetWeights(int edge, std::span<const double> per_step);
  // Dynamic recipients default to p_vt = 0; static ones to 1.
  void SetAvailability(int recipient, int t, double p);
  void SetAvailabilityProfile(int recipient, std::span<const double> per_step);
  // Overrides the schedule derived from the first-notify day.
  void SetSchedule(int donor, int t, bool on);
  void SetNormalization(std::vector<double> scores);

  // Materializes the fixed-time schedule: a_ut = 1 iff t >= first-notify day
  // and (t - first_notify_day) is a multiple of K, unless overridden.
  Scenario Build() const;

 private:
  int horizon_;
  int rate_limit_;
  std::vector<Donor> donors_;
  std::vector<Recipient> recipients_;
  std::vector<Edge> edges_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<std::optional<double>>> availability_;
  std::vector<std::vector<std::optional<bool>>> schedule_override_;
  std::vector<double> normalization_;
};

// Returns an empty list iff every Scenario invariant holds. Each entry names
// the offending entity.
std::vector<std::string> ValidateScenario(const Scenario& s);

// D: the maximum number of edges adjacent to any donor (0 if none).
int DonorMaxDegree(const Scenario& s);

// One draw of recipient availability p̂_vt.
class DemandRealization {
 public:
  DemandRealization() = default;
  DemandRealization(int num_recipients, int horizon);

  // Every recipient available at every step.
  static DemandRealization AllAvailable(const Scenario& s);

  int num_recipients() const { return num_recipients_; }
  int horizon() const { return horizon_; }
  bool available(int v, int t) const {
    return available_[static_cast<std::size_t>(v) * horizon_ + (t - 1)] != 0;
  }
  void set_available(int v, int t, bool on) {
    available_[static_cast<std::size_t>(v) * horizon_ + (t - 1)] = on ? 1 : 0;
  }

  friend bool operator==(const DemandRealization&,
                         const DemandRealization&) = default;

 private:
  int num_recipients_ = 0;
  int horizon_ = 0;
  std::vector<std::uint8_t> available_;
};

// Violations of the DemandRealization invariants against `s`.
std::vector<std::string> ValidateRealization(const Scenario& s,
                                             const DemandRealization& r);

// E^t_u: the donor's edges whose recipient is available at t, or nothing when
// the donor itself is unavailable. Errors if t is outside 1..T.
absl::StatusOr<std::vector<int>> AvailableEdges(const Scenario& s, int u,
                                                int t,
                                                const DemandRealization& r,
                                                bool donor_available);

// Unchecked variant for inner loops; clears and fills `out`.
inline void CollectAvailableEdges(const Scenario& s, int u, int t,
                                  const DemandRealization& r,
                                  std::vector<int>& out) {
  out.clear();
  for (int e : s.donor_edges(u)) {
    if (r.available(s.edge(e).recipient, t)) out.push_back(e);
  }
}

// Edges matched at each step plus the per-recipient matched weight Y_v.
struct MatchingOutcome {
  std::vector<std::vector<int>> matched;  // [t - 1] -> edge indices
  std::vector<double> recipient_weight;   // Y_v
  double total_weight = 0.0;

  static MatchingOutcome Empty(const Scenario& s);
  // Appends edge e at step t and accumulates its weight.
  void Add(const Scenario& s, int e, int t);
};

// Returns an empty list iff `outcome` is consistent with `s`, `r` and the
// donor-availability rule of `mode`.
std::vector<std::string> ValidateOutcome(const Scenario& s,
                                         const DemandRealization& r, Mode mode,
                                         const MatchingOutcome& outcome);

}  // namespace bdmatch

#endif  // BDMATCH_SCENARIO_H_
