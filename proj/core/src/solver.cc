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

#include "bdmatch/solver.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace bdmatch {

const char* ProblemKindName(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kFixedTimeMilp:
      return "fixedtime_milp";
    case ProblemKind::kFixedTimeLp:
      return "fixedtime_lp";
    case ProblemKind::kNAdapOptLp:
      return "nadapopt_lp";
    case ProblemKind::kRateLimitMilp:
      return "ratelimit_milp";
    case ProblemKind::kRateLimitLp:
      return "ratelimit_lp";
  }
  return "unknown";
}

bool IsMilp(ProblemKind kind) {
  return kind == ProblemKind::kFixedTimeMilp ||
         kind == ProblemKind::kRateLimitMilp;
}

namespace {

bool IsRateLimited(ProblemKind kind) {
  return kind == ProblemKind::kRateLimitMilp ||
         kind == ProblemKind::kRateLimitLp;
}

absl::StatusOr<std::vector<int>> FairnessSet(const Scenario& s,
                                             const SolveOptions& options) {
  std::vector<int> fair;
  if (options.fairness_recipients.has_value()) {
    fair = *options.fairness_recipients;
    for (int v : fair) {
      if (v < 0 || v >= s.num_recipients()) {
        return absl::InvalidArgumentError(
            absl::StrCat("fairness set names unknown recipient #", v));
      }
    }
  } else {
    fair.resize(s.num_recipients());
    for (int v = 0; v < s.num_recipients(); ++v) fair[v] = v;
  }
  return fair;
}

absl::Status CheckInputs(const Scenario& s, const SolveOptions& options,
                         const std::vector<int>& fair) {
  if (!(options.gamma >= 0.0 && options.gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0,1], got %g", options.gamma));
  }
  if (options.gamma == 0.0) return absl::OkStatus();
  if (!s.has_normalization()) {
    return absl::FailedPreconditionError(
        "gamma > 0 requires normalization scores m_v");
  }
  for (int v : fair) {
    if (!(s.normalization(v) > 0.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "recipient '%s' has m_v = %g; proportionality with gamma > 0 "
          "needs m_v > 0",
          s.recipient(v).id, s.normalization(v)));
    }
  }
  return absl::OkStatus();
}

struct Model {
  LinearProgram lp;
  std::vector<int> var_of_slot;                 // [e*T + t-1] -> var or -1
  std::vector<std::pair<int, int>> slot_of_var;  // var -> (e, t)
  std::vector<double> share;                    // var -> c_et
};

absl::StatusOr<LpSolution> SolveModel(const Scenario& s, ProblemKind kind,
                                      const DemandRealization* r,
                                      const SolveOptions& options) {
  auto fair = FairnessSet(s, options);
  if (!fair.ok()) return fair.status();
  if (auto st = CheckInputs(s, options, *fair); !st.ok()) return st;
  if (r != nullptr) {
    if (r->num_recipients() != s.num_recipients() ||
        r->horizon() != s.horizon()) {
      return absl::InvalidArgumentError("realization does not match scenario");
    }
  }

  const int T = s.horizon();
  const int K = s.rate_limit();
  Model model;
  model.var_of_slot.assign(static_cast<std::size_t>(s.num_edges()) * T, -1);

  for (int e = 0; e < s.num_edges(); ++e) {
    const Edge& edge = s.edge(e);
    for (int t = 1; t <= T; ++t) {
      const double w = s.weight(e, t);
      if (w <= 0.0) continue;
      const double p = s.availability(edge.recipient, t);
      const bool donor_on = s.scheduled(edge.donor, t);
      double upper = 0.0;
      double share = w;
      switch (kind) {
        case ProblemKind::kFixedTimeMilp:
          upper = (r->available(edge.recipient, t) && donor_on) ? 1.0 : 0.0;
          break;
        case ProblemKind::kFixedTimeLp:
          upper = donor_on ? p : 0.0;
          break;
        case ProblemKind::kNAdapOptLp:
          upper = (donor_on && p > 0.0) ? 1.0 : 0.0;
          share = w * p;
          break;
        case ProblemKind::kRateLimitMilp:
          upper = r->available(edge.recipient, t) ? 1.0 : 0.0;
          break;
        case ProblemKind::kRateLimitLp:
          upper = p;
          break;
      }
      if (upper <= 0.0) continue;
      const int var = model.lp.AddVariable(0.0, upper, share);
      model.var_of_slot[static_cast<std::size_t>(e) * T + (t - 1)] = var;
      model.slot_of_var.emplace_back(e, t);
      model.share.push_back(share);
    }
  }

  // Donor capacity.
  for (int u = 0; u < s.num_donors(); ++u) {
    for (int t = 1; t <= T; ++t) {
      int first = t;
      if (IsRateLimited(kind)) {
        // Windows ending before K are contained in the next window.
        if (t < K && t < T) continue;
        first = std::max(1, t - K + 1);
      } else if (!s.scheduled(u, t)) {
        continue;
      }
      std::vector<std::pair<int, double>> terms;
      for (int tt = first; tt <= t; ++tt) {
        for (int e : s.donor_edges(u)) {
          const int var =
              model.var_of_slot[static_cast<std::size_t>(e) * T + (tt - 1)];
          if (var >= 0) terms.emplace_back(var, 1.0);
        }
      }
      if (terms.size() < 2) continue;
      model.lp.AddRow(std::move(terms), RowSense::kLessEqual, 1.0);
    }
  }

  // Proportionality.
  if (options.gamma > 0.0 && fair->size() >= 2) {
    std::vector<std::vector<std::pair<int, double>>> s_terms(fair->size());
    for (std::size_t k = 0; k < fair->size(); ++k) {
      const int v = (*fair)[k];
      const double inv_m = 1.0 / s.normalization(v);
      for (int e : s.recipient_edges(v)) {
        for (int t = 1; t <= T; ++t) {
          const int var =
              model.var_of_slot[static_cast<std::size_t>(e) * T + (t - 1)];
          if (var >= 0) s_terms[k].emplace_back(var, model.share[var] * inv_m);
        }
      }
    }
    if (options.encoding == ProportionalityEncoding::kMinMax) {
      const int s_min = model.lp.AddVariable(0.0, kInfinity, 0.0);
      const int s_max = model.lp.AddVariable(0.0, kInfinity, 0.0);
      for (const auto& terms : s_terms) {
        auto upper = terms;
        upper.emplace_back(s_max, -1.0);
        model.lp.AddRow(std::move(upper), RowSense::kLessEqual, 0.0);
        std::vector<std::pair<int, double>> lower;
        lower.reserve(terms.size() + 1);
        lower.emplace_back(s_min, 1.0);
        for (const auto& [var, c] : terms) lower.emplace_back(var, -c);
        model.lp.AddRow(std::move(lower), RowSense::kLessEqual, 0.0);
      }
      model.lp.AddRow({{s_max, options.gamma}, {s_min, -1.0}},
                      RowSense::kLessEqual, 0.0);
    } else {
      for (std::size_t a = 0; a < s_terms.size(); ++a) {
        for (std::size_t b = 0; b < s_terms.size(); ++b) {
          if (a == b) continue;
          std::vector<std::pair<int, double>> row;
          for (const auto& [var, c] : s_terms[a]) {
            row.emplace_back(var, options.gamma * c);
          }
          for (const auto& [var, c] : s_terms[b]) row.emplace_back(var, -c);
          model.lp.AddRow(std::move(row), RowSense::kLessEqual, 0.0);
        }
      }
    }
  }

  const LpBackend& backend =
      options.backend != nullptr ? *options.backend : DefaultLpBackend();
  LpSolution out;
  out.kind = kind;
  out.horizon = T;
  out.gamma = options.gamma;
  std::vector<double> values;
  if (IsMilp(kind)) {
    std::vector<int> integer_vars(model.slot_of_var.size());
    for (std::size_t j = 0; j < integer_vars.size(); ++j) integer_vars[j] = j;
    MipResult mip = SolveMip(model.lp, integer_vars, backend, options.mip);
    if (mip.status != LpStatus::kOptimal) {
      return absl::InternalError(absl::StrCat(
          ProblemKindName(kind), ": branch-and-bound ended with status ",
          LpStatusName(mip.status), " after ", mip.nodes, " nodes"));
    }
    values = std::move(mip.x);
    out.nodes = mip.nodes;
  } else {
    LpResult lp = backend.Solve(model.lp);
    if (lp.status != LpStatus::kOptimal) {
      return absl::InternalError(absl::StrCat(ProblemKindName(kind),
                                              ": simplex ended with status ",
                                              LpStatusName(lp.status)));
    }
    values = std::move(lp.x);
  }
  const double violation = model.lp.MaxViolation(values);
  if (violation > 1e-6) {
    return absl::InternalError(absl::StrFormat(
        "%s: solution violates constraints by %g", ProblemKindName(kind),
        violation));
  }

  out.x.assign(static_cast<std::size_t>(s.num_edges()) * T, 0.0);
  std::vector<double> y(s.num_recipients(), 0.0);
  double objective = 0.0;
  for (std::size_t var = 0; var < model.slot_of_var.size(); ++var) {
    const auto [e, t] = model.slot_of_var[var];
    const double v = std::clamp(values[var], 0.0, 1.0);
    out.x[static_cast<std::size_t>(e) * T + (t - 1)] = v;
    y[s.edge(e).recipient] += model.share[var] * v;
    objective += model.share[var] * v;
  }
  out.objective = objective;
  out.s.assign(s.num_recipients(), 0.0);
  if (s.has_normalization()) {
    for (int v = 0; v < s.num_recipients(); ++v) {
      if (s.normalization(v) > 0.0) out.s[v] = y[v] / s.normalization(v);
    }
  }
  if (IsRateLimited(kind)) {
    out.a.assign(static_cast<std::size_t>(s.num_donors()) * T, 1.0);
    for (int u = 0; u < s.num_donors(); ++u) {
      for (int t = 1; t <= T; ++t) {
        double used = 0.0;
        for (int tt = std::max(1, t - K + 1); tt < t; ++tt) {
          for (int e : s.donor_edges(u)) used += out.x_at(e, tt);
        }
        out.a[static_cast<std::size_t>(u) * T + (t - 1)] =
            std::clamp(1.0 - used, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<LpSolution> SolveOfflineOpt(const Scenario& s,
                                           const DemandRealization& r,
                                           const SolveOptions& options) {
  return SolveModel(s, ProblemKind::kFixedTimeMilp, &r, options);
}

absl::StatusOr<LpSolution> SolveFixedTimeLp(const Scenario& s,
                                            const SolveOptions& options) {
  return SolveModel(s, ProblemKind::kFixedTimeLp, nullptr, options);
}

absl::StatusOr<LpSolution> SolveNAdapOptLp(const Scenario& s,
                                           const SolveOptions& options) {
  return SolveModel(s, ProblemKind::kNAdapOptLp, nullptr, options);
}

absl::StatusOr<LpSolution> SolveRateLimitOpt(const Scenario& s,
                                             const DemandRealization& r,
                                             const SolveOptions& options) {
  return SolveModel(s, ProblemKind::kRateLimitMilp, &r, options);
}

absl::StatusOr<LpSolution> SolveRateLimitLp(const Scenario& s,
                                            const SolveOptions& options) {
  return SolveModel(s, ProblemKind::kRateLimitLp, nullptr, options);
}

nlohmann::json LpSolutionToJson(const Scenario& s, const LpSolution& solution) {
  nlohmann::json doc;
  doc["kind"] = ProblemKindName(solution.kind);
  doc["gamma"] = solution.gamma;
  doc["objective"] = solution.objective;
  nlohmann::json x = nlohmann::json::array();
  for (int e = 0; e < s.num_edges(); ++e) {
    for (int t = 1; t <= solution.horizon; ++t) {
      const double v = solution.x_at(e, t);
      if (v == 0.0) continue;
      x.push_back({{"donor", s.donor(s.edge(e).donor).id},
                   {"recipient", s.recipient(s.edge(e).recipient).id},
                   {"t", t},
                   {"value", v}});
    }
  }
  doc["x"] = std::move(x);
  nlohmann::json sv = nlohmann::json::object();
  for (int v = 0; v < s.num_recipients(); ++v) {
    sv[s.recipient(v).id] = solution.s[v];
  }
  doc["s"] = std::move(sv);
  return doc;
}

}  // namespace bdmatch
