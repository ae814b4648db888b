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

#include "bdmatch/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_format.h"

namespace bdmatch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

absl::Status CheckNormalization(std::span<const double> y,
                                std::span<const double> m) {
  if (y.size() != m.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d recipient weights but %d normalization scores", y.size(),
        m.size()));
  }
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (!(m[v] > 0.0)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "normalization score of recipient #%d is %g; must be > 0", v, m[v]));
    }
  }
  return absl::OkStatus();
}

struct Extremes {
  double gamma = 1.0;
  int argmin = -1;
  int argmax = -1;
  double min = 0.0;
  double max = 0.0;
};

Extremes GammaExtremes(std::span<const double> y, std::span<const double> m) {
  Extremes x;
  if (y.empty()) return x;
  x.min = std::numeric_limits<double>::infinity();
  x.max = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < y.size(); ++v) {
    const double n = y[v] / m[v];
    if (n < x.min) {
      x.min = n;
      x.argmin = static_cast<int>(v);
    }
    if (n > x.max) {
      x.max = n;
      x.argmax = static_cast<int>(v);
    }
  }
  if (x.max <= 0.0) {
    x.gamma = 1.0;
  } else if (x.min <= 0.0) {
    x.gamma = 0.0;
  } else {
    x.gamma = std::clamp(x.min / x.max, 0.0, 1.0);
  }
  return x;
}

}  // namespace

absl::StatusOr<double> GammaOf(std::span<const double> recipient_weight,
                               std::span<const double> normalization) {
  if (auto st = CheckNormalization(recipient_weight, normalization); !st.ok()) {
    return st;
  }
  return GammaExtremes(recipient_weight, normalization).gamma;
}

absl::StatusOr<double> EmpiricalEp(const AggregateResult& aggregate,
                                   std::span<const double> normalization) {
  return GammaOf(aggregate.mean_recipient_weight, normalization);
}

absl::StatusOr<EpEstimate> EmpiricalEpWithError(
    const AggregateResult& aggregate, std::span<const double> normalization) {
  const auto& mean = aggregate.mean_recipient_weight;
  if (auto st = CheckNormalization(mean, normalization); !st.ok()) return st;
  const Extremes x = GammaExtremes(mean, normalization);
  EpEstimate out;
  out.ep = x.gamma;
  const int n = static_cast<int>(aggregate.trials.size());
  if (n < 2 || x.argmin < 0 || x.argmin == x.argmax || x.min <= 0.0) {
    return out;
  }
  const int i = x.argmin;
  const int j = x.argmax;
  double var_i = 0.0, var_j = 0.0, cov = 0.0;
  for (const TrialResult& tr : aggregate.trials) {
    const double di = tr.outcome.recipient_weight[i] - mean[i];
    const double dj = tr.outcome.recipient_weight[j] - mean[j];
    var_i += di * di;
    var_j += dj * dj;
    cov += di * dj;
  }
  const double scale = 1.0 / (static_cast<double>(n - 1) * n);
  var_i *= scale;
  var_j *= scale;
  cov *= scale;
  const double rel = var_i / (mean[i] * mean[i]) + var_j / (mean[j] * mean[j]) -
                     2.0 * cov / (mean[i] * mean[j]);
  out.std_err = x.gamma * std::sqrt(std::max(0.0, rel));
  return out;
}

absl::StatusOr<double> CompetitiveFraction(double policy_weight,
                                           double reference) {
  if (!(reference > 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "reference weight must be > 0, got %g", reference));
  }
  return policy_weight / reference;
}

FairnessSet PositiveNormalizationSet(const Scenario& s) {
  FairnessSet out;
  for (int v = 0; v < s.num_recipients(); ++v) {
    if (s.has_normalization() && s.normalization(v) > 0.0) {
      out.recipients.push_back(v);
    } else {
      out.warnings.push_back(absl::StrFormat(
          "recipient '%s' has normalization score 0 and is excluded from "
          "fairness measures",
          s.recipient(v).id));
    }
  }
  return out;
}

absl::StatusOr<FairnessReport> MakeFairnessReport(
    const Scenario& s, std::span<const double> recipient_weight,
    double total_weight, double max_weight, std::optional<double> lp_bound) {
  if (!s.has_normalization()) {
    return absl::FailedPreconditionError("scenario has no normalization scores");
  }
  if (static_cast<int>(recipient_weight.size()) != s.num_recipients()) {
    return absl::InvalidArgumentError("recipient weight size mismatch");
  }
  auto fraction = CompetitiveFraction(total_weight, max_weight);
  if (!fraction.ok()) return fraction.status();
  FairnessReport report;
  report.weight_fraction_of_max = *fraction;
  report.lp_bound = lp_bound;
  report.normalized.assign(s.num_recipients(), kNaN);
  const FairnessSet fair = PositiveNormalizationSet(s);
  report.warnings = fair.warnings;
  std::vector<double> y, m;
  for (int v : fair.recipients) {
    y.push_back(recipient_weight[v]);
    m.push_back(s.normalization(v));
    report.normalized[v] = recipient_weight[v] / s.normalization(v);
  }
  for (int v = 0; v < s.num_recipients(); ++v) {
    if (std::isnan(report.normalized[v])) report.excluded.push_back(v);
  }
  const Extremes x = GammaExtremes(y, m);
  report.gamma_empirical = x.gamma;
  if (!y.empty()) {
    report.min_normalized = x.min;
    report.max_normalized = x.max;
  }
  return report;
}

namespace {

std::vector<double> AverageRanks(std::span<const double> x) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double SpearmanCorrelation(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return kNaN;
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace bdmatch
