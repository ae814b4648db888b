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

// A small linear / mixed-integer programming toolkit.
//
//   maximize    c'x
//   subject to  row_i(x) {<=, >=, =} b_i
//               l <= x <= u            (l finite, u may be +inf)
//
// DenseSimplexBackend is a two-phase primal simplex on a dense tableau with
// implicit variable bounds (nonbasic variables sit at either bound). It is
// meant for desk-scale problems of up to a few thousand rows.
// SolveMip() runs best-first branch-and-bound over any LpBackend.

#ifndef BDMATCH_LP_H_
#define BDMATCH_LP_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bdmatch {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

class LinearProgram {
 public:
  int AddVariable(double lower, double upper, double objective);
  int AddRow(std::vector<std::pair<int, double>> terms, RowSense sense,
             double rhs);

  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  struct Row {
    std::vector<std::pair<int, double>> terms;
    RowSense sense;
    double rhs;
  };

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Row>& rows() const { return rows_; }

  void set_bounds(int var, double lower, double upper) {
    lower_[var] = lower;
    upper_[var] = upper;
  }

  double Evaluate(std::span<const double> x) const;
  // Largest bound or row violation of `x`.
  double MaxViolation(std::span<const double> x) const;

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* LpStatusName(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::int64_t iterations = 0;
};

struct SimplexOptions {
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  std::int64_t max_iterations = 1'000'000;
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual LpResult Solve(const LinearProgram& lp) const = 0;
  virtual std::string name() const = 0;
};

class DenseSimplexBackend : public LpBackend {
 public:
  explicit DenseSimplexBackend(SimplexOptions options = {})
      : options_(options) {}

  LpResult Solve(const LinearProgram& lp) const override;
  std::string name() const override { return "dense-simplex"; }

 private:
  SimplexOptions options_;
};

// Process-wide default backend.
const LpBackend& DefaultLpBackend();

struct MipOptions {
  double integrality_tolerance = 1e-6;
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  std::int64_t max_nodes = 1'000'000;
};

struct MipResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::int64_t nodes = 0;
};

// Maximizes `lp` with the listed variables restricted to integers.
MipResult SolveMip(const LinearProgram& lp, std::span<const int> integer_vars,
                   const LpBackend& backend, const MipOptions& options = {});

}  // namespace bdmatch

#endif  // BDMATCH_LP_H_
