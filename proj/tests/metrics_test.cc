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

#include "bdmatch/oracle.h"
#include "bdmatch/policy.h"
#include "bdmatch/simulator.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bdmatch {
namespace {

using ::testing::ElementsAre;
using ::testing::SizeIs;

double Gamma(std::vector<double> y, std::vector<double> m) {
  auto g = GammaOf(y, m);
  EXPECT_TRUE(g.ok()) << g.status();
  return g.value_or(-1.0);
}

TEST(GammaOfTest, Examples) {
  EXPECT_DOUBLE_EQ(Gamma({2.0, 4.0, 1.0}, {1.0, 2.0, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(Gamma({0.0, 1.0}, {1.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(Gamma({1.0, 2.0}, {1.0, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(Gamma({0.0, 0.0}, {1.0, 3.0}), 1.0);
  EXPECT_DOUBLE_EQ(Gamma({0.7}, {0.1}), 1.0);
}

TEST(GammaOfTest, InputErrors) {
  const std::vector<double> y = {1.0, 1.0};
  EXPECT_EQ(GammaOf(y, std::vector<double>{1.0, 0.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(GammaOf(y, std::vector<double>{1.0, -2.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(GammaOf(y, std::vector<double>{1.0}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

// Reference: the largest gamma on a fine grid with all pairwise constraints.
double GridGamma(const std::vector<double>& y, const std::vector<double>& m) {
  double best = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double g = k / 100000.0;
    bool ok = true;
    for (std::size_t a = 0; a < y.size() && ok; ++a) {
      for (std::size_t b = 0; b < y.size() && ok; ++b) {
        ok = g * y[a] / m[a] <= y[b] / m[b] + 1e-12;
      }
    }
    if (ok) best = g;
  }
  return best;
}

TEST(GammaOfTest, Properties) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + rng.UniformInt(5);
    std::vector<double> y(n);
    std::vector<double> m(n);
    for (int k = 0; k < n; ++k) {
      y[k] = rng.Bernoulli(0.1) ? 0.0 : rng.Uniform(0.0, 2.0);
      m[k] = rng.Uniform(0.1, 1.0);
    }
    const double g = Gamma(y, m);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_NEAR(g, GridGamma(y, m), 1e-5);

    // Scale invariance.
    std::vector<double> scaled = y;
    const double c = rng.Uniform(0.1, 10.0);
    for (double& v : scaled) v *= c;
    EXPECT_NEAR(Gamma(scaled, m), g, 1e-12);

    // Permutation invariance.
    std::vector<int> idx(n);
    for (int k = 0; k < n; ++k) idx[k] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> py(n);
    std::vector<double> pm(n);
    for (int k = 0; k < n; ++k) {
      py[k] = y[idx[k]];
      pm[k] = m[idx[k]];
    }
    EXPECT_DOUBLE_EQ(Gamma(py, pm), g);

    // Gamma is 1 iff the normalized values are all equal.
    std::vector<double> equal(n);
    const double level = rng.Uniform(0.1, 1.0);
    for (int k = 0; k < n; ++k) equal[k] = level * m[k];
    EXPECT_NEAR(Gamma(equal, m), 1.0, 1e-12);
    bool all_equal = true;
    for (int k = 1; k < n; ++k) {
      all_equal &= y[k] / m[k] == y[0] / m[0];
    }
    if (!all_equal) EXPECT_LT(g, 1.0);
  }
}

TEST(EmpiricalEpTest, RandIsOneUnderExactNormalization) {
  const Scenario s = testing::TwoRecipientInstance();
  PreparedPolicy rand;
  rand.spec.kind = PolicyKind::kRand;
  auto m = BruteForcePolicyExpectation(s, rand, std::nullopt);
  ASSERT_TRUE(m.ok());
  AggregateResult exact;
  exact.mean_recipient_weight = *m;
  auto ep = EmpiricalEp(exact, *m);
  ASSERT_TRUE(ep.ok());
  EXPECT_DOUBLE_EQ(*ep, 1.0);
}

TEST(EmpiricalEpTest, AllZeroMeansIsOne) {
  AggregateResult agg;
  agg.mean_recipient_weight = {0.0, 0.0, 0.0};
  auto ep = EmpiricalEp(agg, std::vector<double>{1.0, 2.0, 3.0});
  ASSERT_TRUE(ep.ok());
  EXPECT_EQ(*ep, 1.0);
}

TEST(EmpiricalEpTest, StandardErrorShrinksWithTrials) {
  const Scenario s =
      testing::TwoRecipientInstance(0.9, 1.0, std::vector<double>{0.45, 0.5});
  PolicySpec spec;
  spec.kind = PolicyKind::kRandMax;
  spec.gamma = 0.5;
  auto prepared = PreparePolicy(s, spec);
  ASSERT_TRUE(prepared.ok());
  double prev = 1e9;
  for (int n : {100, 1000, 10000}) {
    EvaluateOptions o;
    o.trials = n;
    o.seed = 2;
    auto agg = MonteCarloEvaluate(s, *prepared, o);
    ASSERT_TRUE(agg.ok());
    auto ep = EmpiricalEpWithError(*agg, s.normalization_scores());
    ASSERT_TRUE(ep.ok());
    EXPECT_GT(ep->std_err, 0.0);
    EXPECT_LT(ep->std_err, prev);
    prev = ep->std_err;
    // Exact: Y_A = 0.225, Y_B = 0.75 -> normalized 0.5 and 1.5.
    EXPECT_NEAR(ep->ep, 1.0 / 3.0, 4 * ep->std_err);
  }
}

TEST(CompetitiveFractionTest, Examples) {
  EXPECT_DOUBLE_EQ(*CompetitiveFraction(2.5, 2.5), 1.0);
  EXPECT_DOUBLE_EQ(*CompetitiveFraction(0.6 * 3.0, 3.0), 0.6);
  EXPECT_EQ(CompetitiveFraction(1.0, 0.0).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(CompetitiveFraction(1.0, -1.0).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(FairnessReportTest, ExcludesZeroNormalizationWithWarning) {
  const Scenario s = testing::TwoRecipientInstance(
      0.9, 1.0, std::vector<double>{0.0, 0.5});
  const FairnessSet set = PositiveNormalizationSet(s);
  EXPECT_THAT(set.recipients, ElementsAre(1));
  EXPECT_THAT(set.warnings, SizeIs(1));

  const std::vector<double> y = {0.3, 0.25};
  auto report = MakeFairnessReport(s, y, 0.55, 1.1, 0.9);
  ASSERT_TRUE(report.ok());
  EXPECT_DOUBLE_EQ(report->gamma_empirical, 1.0);
  EXPECT_TRUE(std::isnan(report->normalized[0]));
  EXPECT_DOUBLE_EQ(report->normalized[1], 0.5);
  EXPECT_THAT(report->excluded, ElementsAre(0));
  EXPECT_DOUBLE_EQ(report->weight_fraction_of_max, 0.5);
  EXPECT_EQ(report->lp_bound, 0.9);
  EXPECT_THAT(report->warnings, SizeIs(1));
}

TEST(FairnessReportTest, MinMaxAndGamma) {
  const Scenario s = testing::TwoRecipientInstance(
      0.9, 1.0, std::vector<double>{0.45, 0.5});
  const std::vector<double> y = {0.0, 1.0};
  auto report = MakeFairnessReport(s, y, 1.0, 1.0, std::nullopt);
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->gamma_empirical, 0.0);
  EXPECT_EQ(report->min_normalized, 0.0);
  EXPECT_DOUBLE_EQ(report->max_normalized, 2.0);
  EXPECT_FALSE(report->lp_bound.has_value());
}

TEST(SpearmanTest, Basics) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(SpearmanCorrelation(x, std::vector<double>{2, 4, 6, 8, 10}), 1.0);
  EXPECT_DOUBLE_EQ(SpearmanCorrelation(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(SpearmanCorrelation(x, std::vector<double>{1, 4, 9, 16, 100}), 1.0);
  // Ties take average ranks: ranks y = 1.5, 1.5, 3, 4, 5.
  EXPECT_NEAR(SpearmanCorrelation(x, std::vector<double>{0, 0, 1, 2, 3}),
              0.974679434, 1e-8);
  EXPECT_TRUE(std::isnan(
      SpearmanCorrelation(x, std::vector<double>{1, 1, 1, 1, 1})));
}

}  // namespace
}  // namespace bdmatch
