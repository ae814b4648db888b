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

#include "bdmatch/lp.h"

#include <algorithm>
#include <cmath>
#include <queue>

namespace bdmatch {

int LinearProgram::AddVariable(double lower, double upper, double objective) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return num_variables() - 1;
}

int LinearProgram::AddRow(std::vector<std::pair<int, double>> terms,
                          RowSense sense, double rhs) {
  rows_.push_back({std::move(terms), sense, rhs});
  return num_rows() - 1;
}

double LinearProgram::Evaluate(std::span<const double> x) const {
  double z = 0.0;
  for (int j = 0; j < num_variables(); ++j) z += objective_[j] * x[j];
  return z;
}

double LinearProgram::MaxViolation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (const Row& row : rows_) {
    double lhs = 0.0;
    for (const auto& [j, a] : row.terms) lhs += a * x[j];
    switch (row.sense) {
      case RowSense::kLessEqual:
        worst = std::max(worst, lhs - row.rhs);
        break;
      case RowSense::kGreaterEqual:
        worst = std::max(worst, row.rhs - lhs);
        break;
      case RowSense::kEqual:
        worst = std::max(worst, std::abs(lhs - row.rhs));
        break;
    }
  }
  return worst;
}

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

namespace {

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper };

// Bounded-variable primal simplex on an explicit tableau B^-1 [A | I_s | I_a].
// Each variable x_j becomes offset_j + sum of +-1 * y_k over nonnegative
// columns y_k: shifted by a finite lower bound, negated from a finite upper
// bound, or split in two when free.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& options)
      : options_(options) {
    num_original_ = lp.num_variables();
    m_ = lp.num_rows();
    offset_.assign(num_original_, 0.0);
    columns_of_.resize(num_original_);
    for (int j = 0; j < num_original_; ++j) {
      const double lo = lp.lower()[j];
      const double hi = lp.upper()[j];
      if (lo > -kInfinity) {
        offset_[j] = lo;
        AddColumn(j, 1.0, hi - lo);
      } else if (hi < kInfinity) {
        offset_[j] = hi;
        AddColumn(j, -1.0, kInfinity);
      } else {
        AddColumn(j, 1.0, kInfinity);
        AddColumn(j, -1.0, kInfinity);
      }
    }
    n_ = static_cast<int>(column_var_.size());

    // Column layout: structural, then one slack per inequality row, then one
    // artificial per row that lacks a +1 slack after sign normalization.
    std::vector<double> rhs(m_);
    std::vector<double> sign(m_, 1.0);
    std::vector<int> slack_of_row(m_, -1);
    int next = n_;
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows()[i];
      double b = row.rhs;
      for (const auto& [j, a] : row.terms) b -= a * offset_[j];
      rhs[i] = b;
      if (row.sense != RowSense::kEqual) slack_of_row[i] = next++;
    }
    std::vector<int> art_of_row(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows()[i];
      double slack_coef = 0.0;
      if (row.sense == RowSense::kLessEqual) slack_coef = 1.0;
      if (row.sense == RowSense::kGreaterEqual) slack_coef = -1.0;
      if (rhs[i] < 0) sign[i] = -1.0;
      if (slack_coef * sign[i] <= 0) art_of_row[i] = next++;
    }
    cols_ = next;
    upper_.resize(cols_, kInfinity);
    cost_.assign(cols_, 0.0);
    state_.assign(cols_, VarState::kAtLower);
    is_artificial_.assign(cols_, 0);

    tab_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    beta_.resize(m_);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows()[i];
      double* r = Row(i);
      for (const auto& [j, a] : row.terms) {
        for (int k : columns_of_[j]) r[k] += sign[i] * a * column_sign_[k];
      }
      if (slack_of_row[i] >= 0) {
        const double c = row.sense == RowSense::kLessEqual ? 1.0 : -1.0;
        r[slack_of_row[i]] = sign[i] * c;
      }
      beta_[i] = sign[i] * rhs[i];
      if (art_of_row[i] >= 0) {
        r[art_of_row[i]] = 1.0;
        basis_[i] = art_of_row[i];
        is_artificial_[art_of_row[i]] = 1;
        has_artificials_ = true;
      } else {
        basis_[i] = slack_of_row[i];
      }
      state_[basis_[i]] = VarState::kBasic;
    }
    for (int k = 0; k < n_; ++k) {
      structural_cost_.push_back(lp.objective()[column_var_[k]] * column_sign_[k]);
    }
    objective_ = lp.objective();
  }

  LpResult Run() {
    LpResult result;
    for (int j = 0; j < n_; ++j) {
      if (upper_[j] < -options_.feasibility_tolerance) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      upper_[j] = std::max(upper_[j], 0.0);
    }
    if (has_artificials_) {
      std::fill(cost_.begin(), cost_.end(), 0.0);
      for (int j = 0; j < cols_; ++j) {
        if (is_artificial_[j]) cost_[j] = -1.0;
      }
      ComputeReducedCosts();
      const LpStatus phase1 = Iterate(result.iterations);
      if (phase1 == LpStatus::kIterationLimit) {
        result.status = phase1;
        return result;
      }
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (is_artificial_[basis_[i]]) infeasibility += std::max(beta_[i], 0.0);
      }
      if (infeasibility > options_.feasibility_tolerance * (1 + m_)) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      DriveOutArtificials();
      for (int j = 0; j < cols_; ++j) {
        if (is_artificial_[j]) upper_[j] = 0.0;
      }
    }
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = structural_cost_[j];
    ComputeReducedCosts();
    result.status = Iterate(result.iterations);
    if (result.status != LpStatus::kOptimal) return result;

    std::vector<double> value(cols_, 0.0);
    for (int j = 0; j < cols_; ++j) {
      if (state_[j] == VarState::kAtUpper) value[j] = upper_[j];
    }
    for (int i = 0; i < m_; ++i) value[basis_[i]] = beta_[i];
    result.x = offset_;
    for (int k = 0; k < n_; ++k) {
      const double v = std::clamp(value[k], 0.0, upper_[k]);
      result.x[column_var_[k]] += column_sign_[k] * v;
    }
    result.objective = 0.0;
    for (int j = 0; j < num_original_; ++j) {
      result.objective += objective_[j] * result.x[j];
    }
    return result;
  }

 private:
  void AddColumn(int var, double sign, double upper) {
    columns_of_[var].push_back(static_cast<int>(column_var_.size()));
    column_var_.push_back(var);
    column_sign_.push_back(sign);
    upper_.push_back(upper);
  }

  double* Row(int i) { return tab_.data() + static_cast<std::size_t>(i) * cols_; }

  void ComputeReducedCosts() {
    d_ = cost_;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* r = Row(i);
      for (int j = 0; j < cols_; ++j) d_[j] -= cb * r[j];
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  bool Eligible(int j) const {
    if (state_[j] == VarState::kBasic) return false;
    if (upper_[j] <= 0.0) return false;  // fixed, including spent artificials
    if (state_[j] == VarState::kAtLower) return d_[j] > options_.optimality_tolerance;
    return d_[j] < -options_.optimality_tolerance;
  }

  LpStatus Iterate(std::int64_t& iterations) {
    int degenerate_run = 0;
    while (true) {
      if (iterations >= options_.max_iterations) return LpStatus::kIterationLimit;
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < cols_; ++j) {
        if (!Eligible(j)) continue;
        if (bland) {
          enter = j;
          break;
        }
        const double score = std::abs(d_[j]);
        if (score > best) {
          best = score;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      ++iterations;

      const double dir = state_[enter] == VarState::kAtLower ? 1.0 : -1.0;
      double theta = upper_[enter];
      int leave_row = -1;
      double leave_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double alpha = dir * tab_[static_cast<std::size_t>(i) * cols_ + enter];
        double limit;
        if (alpha > options_.pivot_tolerance) {
          limit = std::max(beta_[i], 0.0) / alpha;
        } else if (alpha < -options_.pivot_tolerance) {
          const double ub = upper_[basis_[i]];
          if (ub == kInfinity) continue;
          limit = std::max(ub - beta_[i], 0.0) / -alpha;
        } else {
          continue;
        }
        if (limit < theta - 1e-12) {
          theta = limit;
          leave_row = i;
          leave_alpha = alpha;
        } else if (leave_row >= 0 && limit <= theta + 1e-12) {
          const bool prefer = bland ? basis_[i] < basis_[leave_row]
                                    : std::abs(alpha) > std::abs(leave_alpha);
          if (prefer) {
            theta = std::min(theta, limit);
            leave_row = i;
            leave_alpha = alpha;
          }
        }
      }
      if (theta == kInfinity) return LpStatus::kUnbounded;
      degenerate_run = theta < 1e-12 ? degenerate_run + 1 : 0;

      // Update basic values along the edge.
      if (theta > 0.0) {
        for (int i = 0; i < m_; ++i) {
          const double a = tab_[static_cast<std::size_t>(i) * cols_ + enter];
          if (a != 0.0) beta_[i] -= dir * theta * a;
        }
      }
      if (leave_row < 0) {
        // Bound flip: the entering variable crosses to its other bound.
        state_[enter] = dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
        continue;
      }
      const int leaving = basis_[leave_row];
      const double entering_value =
          dir > 0 ? theta : upper_[enter] - theta;
      state_[leaving] = leave_alpha > 0 ? VarState::kAtLower : VarState::kAtUpper;
      Pivot(leave_row, enter);
      beta_[leave_row] = entering_value;
    }
  }

  void Pivot(int r, int enter) {
    double* pr = Row(r);
    const double inv = 1.0 / pr[enter];
    nonzeros_.clear();
    for (int j = 0; j < cols_; ++j) {
      if (pr[j] == 0.0) continue;
      pr[j] *= inv;
      if (std::abs(pr[j]) < 1e-13) {
        pr[j] = 0.0;
        continue;
      }
      nonzeros_.push_back(j);
    }
    pr[enter] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = Row(i);
      const double f = pi[enter];
      if (f == 0.0) continue;
      for (int j : nonzeros_) {
        double v = pi[j] - f * pr[j];
        pi[j] = std::abs(v) < 1e-13 ? 0.0 : v;
      }
      pi[enter] = 0.0;
    }
    const double fd = d_[enter];
    if (fd != 0.0) {
      for (int j : nonzeros_) d_[j] -= fd * pr[j];
      d_[enter] = 0.0;
    }
    state_[enter] = VarState::kBasic;
    basis_[r] = enter;
  }

  // After phase 1, replaces artificial basics (at value zero) by any
  // non-artificial column with a usable pivot in that row. Rows where none
  // exists are redundant and keep their artificial fixed at zero.
  void DriveOutArtificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial_[basis_[i]]) continue;
      const double* r = Row(i);
      int best = -1;
      double best_abs = 1e-7;
      for (int j = 0; j < cols_; ++j) {
        if (is_artificial_[j] || state_[j] == VarState::kBasic) continue;
        if (std::abs(r[j]) > best_abs) {
          best_abs = std::abs(r[j]);
          best = j;
        }
      }
      if (best < 0) continue;
      const double value = state_[best] == VarState::kAtUpper ? upper_[best] : 0.0;
      const int art = basis_[i];
      Pivot(i, best);
      beta_[i] = value;
      state_[art] = VarState::kAtLower;
    }
  }

  SimplexOptions options_;
  int num_original_ = 0;
  std::vector<double> offset_;
  std::vector<std::vector<int>> columns_of_;
  std::vector<int> column_var_;
  std::vector<double> column_sign_;
  std::vector<double> objective_;
  int n_ = 0;
  int m_ = 0;
  int cols_ = 0;
  bool has_artificials_ = false;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<VarState> state_;
  std::vector<std::uint8_t> is_artificial_;
  std::vector<double> tab_;
  std::vector<double> beta_;
  std::vector<int> basis_;
  std::vector<int> nonzeros_;
  std::vector<double> structural_cost_;
};

}  // namespace

LpResult DenseSimplexBackend::Solve(const LinearProgram& lp) const {
  Tableau tableau(lp, options_);
  return tableau.Run();
}

const LpBackend& DefaultLpBackend() {
  static const DenseSimplexBackend* backend = new DenseSimplexBackend();
  return *backend;
}

namespace {

struct Node {
  double bound;
  std::int64_t order;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> x;
};

struct NodeLess {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.order > b.order;
  }
};

}  // namespace

MipResult SolveMip(const LinearProgram& lp, std::span<const int> integer_vars,
                   const LpBackend& backend, const MipOptions& options) {
  MipResult result;
  bool have_incumbent = false;
  std::priority_queue<Node, std::vector<Node>, NodeLess> open;
  std::int64_t order = 0;
  LinearProgram work = lp;

  auto solve_node = [&](std::vector<double> lower, std::vector<double> upper) {
    for (int j = 0; j < work.num_variables(); ++j) {
      work.set_bounds(j, lower[j], upper[j]);
    }
    ++result.nodes;
    LpResult r = backend.Solve(work);
    if (r.status == LpStatus::kUnbounded) {
      result.status = LpStatus::kUnbounded;
      return false;
    }
    if (r.status != LpStatus::kOptimal) return true;
    open.push({r.objective, order++, std::move(lower), std::move(upper),
               std::move(r.x)});
    return true;
  };

  auto prune_level = [&]() {
    return result.objective +
           std::max(options.absolute_gap,
                    options.relative_gap * std::abs(result.objective));
  };

  if (!solve_node(lp.lower(), lp.upper())) return result;
  while (!open.empty()) {
    if (result.nodes > options.max_nodes) {
      result.status = LpStatus::kIterationLimit;
      return result;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound <= prune_level()) break;

    int branch = -1;
    double most = options.integrality_tolerance;
    for (int j : integer_vars) {
      const double frac = std::abs(node.x[j] - std::round(node.x[j]));
      if (frac > most) {
        most = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      std::vector<double> x = node.x;
      for (int j : integer_vars) x[j] = std::round(x[j]);
      const double z = lp.Evaluate(x);
      if (!have_incumbent || z > result.objective) {
        have_incumbent = true;
        result.objective = z;
        result.x = std::move(x);
      }
      continue;
    }
    const double value = node.x[branch];
    {
      std::vector<double> upper = node.upper;
      upper[branch] = std::floor(value);
      if (upper[branch] >= node.lower[branch]) {
        if (!solve_node(node.lower, std::move(upper))) return result;
      }
    }
    {
      std::vector<double> lower = node.lower;
      lower[branch] = std::ceil(value);
      if (lower[branch] <= node.upper[branch]) {
        if (!solve_node(std::move(lower), node.upper)) return result;
      }
    }
  }
  result.status = have_incumbent ? LpStatus::kOptimal : LpStatus::kInfeasible;
  return result;
}

}  // namespace bdmatch
