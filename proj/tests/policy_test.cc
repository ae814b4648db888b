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

#include <map>

#include "bdmatch/simulator.h"
#include "bdmatch/solver.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bdmatch {
namespace {

using ::testing::HasSubstr;
using testing::BinomialSe;

constexpr int kDraws = 10000;

// Pearson chi-squared statistic of observed counts against probabilities.
double ChiSquared(const std::vector<int>& counts, const std::vector<double>& p) {
  int n = 0;
  for (int c : counts) n += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = n * p[i];
    stat += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  return stat;
}

// Frequencies of decide() outcomes; index -1 maps to the last slot.
template <typename F>
std::vector<int> Tally(int num_edges, F decide) {
  std::vector<int> counts(num_edges + 1, 0);
  for (int i = 0; i < kDraws; ++i) {
    const std::optional<int> e = decide(i);
    ++counts[e ? *e : num_edges];
  }
  return counts;
}

TEST(RandDecideTest, TwoEdgesAreEquallyLikely) {
  const Scenario s = testing::TwoRecipientInstance();
  const auto r = DemandRealization::AllAvailable(s);
  Rng rng(1);
  const auto counts = Tally(2, [&](int) { return RandDecide(s, 0, 1, r, rng); });
  EXPECT_EQ(counts[2], 0);
  // 99.9% quantile of chi-squared with one degree of freedom.
  EXPECT_LT(ChiSquared({counts[0], counts[1]}, {0.5, 0.5}), 10.83);
}

TEST(RandDecideTest, SingleAndNoEdges) {
  const Scenario s = testing::TwoRecipientInstance();
  auto r = DemandRealization::AllAvailable(s);
  Rng rng(2);
  r.set_available(0, 1, false);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(RandDecide(s, 0, 1, r, rng), 1);
  r.set_available(1, 1, false);
  EXPECT_EQ(RandDecide(s, 0, 1, r, rng), std::nullopt);
}

TEST(MaxDecideTest, PicksHeaviestAlways) {
  const Scenario s = testing::TwoRecipientInstance();
  const auto r = DemandRealization::AllAvailable(s);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(MaxDecide(s, 0, 1, r, rng), 1);
}

TEST(MaxDecideTest, TiesAreUniform) {
  const Scenario s = testing::TwoRecipientInstance(0.7, 0.7);
  const auto r = DemandRealization::AllAvailable(s);
  Rng rng(4);
  const auto counts = Tally(2, [&](int) { return MaxDecide(s, 0, 1, r, rng); });
  EXPECT_LT(ChiSquared({counts[0], counts[1]}, {0.5, 0.5}), 10.83);
}

TEST(MaxDecideTest, NoEdges) {
  const Scenario s = testing::TwoRecipientInstance();
  DemandRealization r(2, 1);
  Rng rng(5);
  EXPECT_EQ(MaxDecide(s, 0, 1, r, rng), std::nullopt);
}

TEST(RandMaxTest, EndpointsMatchMaxAndRand) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Scenario s = testing::RandomInstance(rng);
    for (int u = 0; u < s.num_donors(); ++u) {
      const auto edges = s.donor_edges(u);
      if (edges.empty()) continue;
      const auto p0 = RandMaxProbabilities(s, 1, edges, 0.0);
      const auto p1 = RandMaxProbabilities(s, 1, edges, 1.0);
      double best = 0.0;
      for (int e : edges) best = std::max(best, s.weight(e, 1));
      int ties = 0;
      for (int e : edges) ties += s.weight(e, 1) == best;
      for (std::size_t k = 0; k < edges.size(); ++k) {
        EXPECT_DOUBLE_EQ(p1[k], 1.0 / edges.size());
        EXPECT_DOUBLE_EQ(p0[k], s.weight(edges[k], 1) == best ? 1.0 / ties : 0.0);
      }
    }
  }
}

TEST(RandMaxTest, MixtureProbabilities) {
  const Scenario s = testing::TwoRecipientInstance();
  const auto r = DemandRealization::AllAvailable(s);
  const std::vector<int> edges = {0, 1};
  const auto p = RandMaxProbabilities(s, 1, edges, 0.4);
  EXPECT_DOUBLE_EQ(p[0], 0.2);
  EXPECT_DOUBLE_EQ(p[1], 0.8);
  Rng rng(7);
  const auto counts =
      Tally(2, [&](int) { return RandMaxDecide(s, 0, 1, r, 0.4, rng); });
  EXPECT_NEAR(counts[0] / double(kDraws), 0.2, 3 * BinomialSe(0.2, kDraws));
  EXPECT_LT(ChiSquared({counts[0], counts[1]}, {0.2, 0.8}), 10.83);
}

TEST(RandMaxTest, DecisionDistributionIsExactMixture) {
  // Three edges with distinct weights, several gamma values.
  ScenarioBuilder b(1, 1);
  const int u = b.AddDonor("u");
  const double w[] = {0.3, 0.8, 0.5};
  for (int i = 0; i < 3; ++i) {
    b.AddEdge(u, b.AddRecipient("r" + std::to_string(i), RecipientKind::kStatic), w[i]);
  }
  const Scenario s = b.Build();
  const auto r = DemandRealization::AllAvailable(s);
  for (double g : {0.1, 0.5, 0.9}) {
    Rng rng(8);
    const auto counts =
        Tally(3, [&](int) { return RandMaxDecide(s, 0, 1, r, g, rng); });
    const std::vector<double> p = {g / 3, (1 - g) + g / 3, g / 3};
    // 99.9% quantile, two degrees of freedom.
    EXPECT_LT(ChiSquared({counts[0], counts[1], counts[2]}, p), 13.82);
  }
}

TEST(PolicySpecTest, ParsesCanonicalForms) {
  auto max = ParsePolicySpec("max");
  ASSERT_TRUE(max.ok());
  EXPECT_EQ(max->kind, PolicyKind::kMax);
  EXPECT_EQ(max->gamma_param(), 0.0);

  auto rand = ParsePolicySpec("rand");
  ASSERT_TRUE(rand.ok());
  EXPECT_EQ(rand->gamma_param(), 1.0);

  auto rm = ParsePolicySpec("randmax:0.3");
  ASSERT_TRUE(rm.ok());
  EXPECT_EQ(rm->kind, PolicyKind::kRandMax);
  EXPECT_DOUBLE_EQ(rm->gamma, 0.3);

  auto am = ParsePolicySpec("adaptmatch:0.5");
  ASSERT_TRUE(am.ok());
  EXPECT_DOUBLE_EQ(am->gamma, 0.5);
  EXPECT_DOUBLE_EQ(am->fallback_gamma, 0.5);
  EXPECT_DOUBLE_EQ(am->gamma_param(), 0.5);

  auto lp = ParsePolicySpec("nadaplp:alpha=0.1,gamma=0.5");
  ASSERT_TRUE(lp.ok());
  EXPECT_DOUBLE_EQ(*lp->alpha, 0.1);
  EXPECT_DOUBLE_EQ(lp->gamma, 0.5);

  auto rate = ParsePolicySpec("nadaplp_rate:gamma=0.2", Mode::kRateLimited);
  ASSERT_TRUE(rate.ok());
  EXPECT_EQ(rate->kind, PolicyKind::kNAdapLpRate);
  EXPECT_FALSE(rate->alpha.has_value());

  auto fb = ParsePolicySpec("adaptmatch:gamma=0.5,fallback=0.2");
  ASSERT_TRUE(fb.ok());
  EXPECT_DOUBLE_EQ(fb->fallback_gamma, 0.2);
}

TEST(PolicySpecTest, ToStringRoundTrips) {
  for (const char* text :
       {"max", "rand", "randmax:0.3", "nadapopt:0.25", "adaptmatch:0.5",
        "adaptmatch:gamma=0.5,fallback=0.1", "nadaplp:alpha=0.1,gamma=0.5"}) {
    auto spec = ParsePolicySpec(text);
    ASSERT_TRUE(spec.ok()) << text;
    auto again = ParsePolicySpec(spec->ToString());
    ASSERT_TRUE(again.ok()) << spec->ToString();
    EXPECT_EQ(again->ToString(), spec->ToString());
  }
}

TEST(PolicySpecTest, RejectsInvalidSpecs) {
  for (const char* text :
       {"", "greedy", "randmax:1.5", "adaptmatch:-0.1", "max:alpha=0.1",
        "nadaplp:alpha=-1", "nadaplp:beta=2", "randmax:abc",
        "adaptmatch:gamma=0.5,fallback=2"}) {
    EXPECT_EQ(ParsePolicySpec(text).status().code(),
              absl::StatusCode::kInvalidArgument)
        << text;
  }
  // Mode restrictions.
  EXPECT_FALSE(ParsePolicySpec("nadaplp_rate:0.2", Mode::kFixedTime).ok());
  EXPECT_FALSE(ParsePolicySpec("adaptmatch:0.2", Mode::kRateLimited).ok());
  EXPECT_TRUE(ParsePolicySpec("randmax:0.2", Mode::kRateLimited).ok());
}

LpSolution ManualFixedTimeLp(const Scenario& s, std::vector<double> x) {
  LpSolution sol;
  sol.kind = ProblemKind::kFixedTimeLp;
  sol.horizon = s.horizon();
  sol.x = std::move(x);
  sol.s.assign(s.num_recipients(), 0.0);
  return sol;
}

TEST(NAdapLpTest, PrematchProbabilityIsScaledByAvailability) {
  ScenarioBuilder b(1, 1);
  const int u = b.AddDonor("u");
  const int v = b.AddRecipient("v", RecipientKind::kDynamic);
  b.AddEdge(u, v, 1.0);
  b.SetAvailability(v, 1, 0.5);
  const Scenario s = b.Build();
  auto dist = NAdapLpDistribution(s, ManualFixedTimeLp(s, {0.3}), 0.5);
  ASSERT_TRUE(dist.ok());
  ASSERT_EQ(dist->at(0, 1).size(), 1u);
  EXPECT_DOUBLE_EQ(dist->at(0, 1)[0].second, 0.3);
  int hits = 0;
  for (int i = 0; i < kDraws; ++i) hits += SamplePlan(s, *dist, i).at(0, 1) == 0;
  EXPECT_NEAR(hits / double(kDraws), 0.3, 3 * BinomialSe(0.3, kDraws));
}

TEST(NAdapLpTest, ZeroAvailabilityGivesZeroProbability) {
  ScenarioBuilder b(1, 1);
  const int u = b.AddDonor("u");
  const int v = b.AddRecipient("v", RecipientKind::kDynamic);
  b.AddEdge(u, v, 1.0);
  const Scenario s = b.Build();
  auto dist = NAdapLpDistribution(s, ManualFixedTimeLp(s, {1e-9}), 1.0);
  ASSERT_TRUE(dist.ok());
  EXPECT_TRUE(dist->at(0, 1).empty());
}

TEST(NAdapLpTest, InverseDegreeAlphaIsAlwaysValid) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Scenario s = testing::RandomInstance(rng);
    const int D = DonorMaxDegree(s);
    if (D == 0) continue;
    for (double g : {0.0, 0.5, 1.0}) {
      SolveOptions o;
      auto plan = NAdapLpPlan(s, g, 1.0 / D, rng(), o);
      EXPECT_TRUE(plan.ok()) << plan.status();
    }
  }
}

TEST(NAdapLpTest, TooLargeAlphaNamesTheSlot) {
  // alpha * x / p = 1.5 on the single edge.
  ScenarioBuilder b(1, 1);
  const int u = b.AddDonor("u");
  const int v = b.AddRecipient("v", RecipientKind::kDynamic);
  b.AddEdge(u, v, 1.0);
  b.SetAvailability(v, 1, 0.5);
  const Scenario s = b.Build();
  auto dist = NAdapLpDistribution(s, ManualFixedTimeLp(s, {0.5}), 1.5);
  EXPECT_EQ(dist.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(std::string(dist.status().message()), HasSubstr("'u'"));
  EXPECT_THAT(std::string(dist.status().message()), HasSubstr("t=1"));
}

TEST(NAdapLpTest, ZeroAlphaGivesEmptyPlan) {
  Rng rng(10);
  const Scenario s = testing::RandomInstance(rng);
  auto plan = NAdapLpPlan(s, 0.0, 0.0, 1);
  ASSERT_TRUE(plan.ok());
  for (int a : plan->assignment) EXPECT_EQ(a, -1);
}

TEST(NAdapOptTest, HalfAndHalfPlan) {
  const Scenario s =
      testing::TwoRecipientInstance(0.9, 1.0, std::vector<double>{0.45, 0.5});
  int a = 0;
  int none = 0;
  for (int i = 0; i < kDraws; ++i) {
    auto plan = NAdapOptPlan(s, 1.0, i);
    ASSERT_TRUE(plan.ok());
    a += plan->at(0, 1) == 0;
    none += plan->at(0, 1) == -1;
  }
  EXPECT_EQ(none, 0);
  EXPECT_NEAR(a / double(kDraws), 0.5, 3 * BinomialSe(0.5, kDraws));
}

TEST(NAdapOptTest, IntegralSolutionGivesDeterministicPlan) {
  const Scenario s = testing::TwoRecipientInstance();
  for (int i = 0; i < 100; ++i) {
    auto plan = NAdapOptPlan(s, 0.0, i);
    ASSERT_TRUE(plan.ok());
    EXPECT_EQ(plan->at(0, 1), 1);
  }
}

TEST(NAdapOptTest, NoScheduleGivesEmptyPlan) {
  ScenarioBuilder b(3, 1);
  const int u = b.AddDonor("u");
  b.AddEdge(u, b.AddRecipient("v", RecipientKind::kStatic), 0.5);
  for (int t = 1; t <= 3; ++t) b.SetSchedule(u, t, false);
  auto plan = NAdapOptPlan(b.Build(), 0.0, 1);
  ASSERT_TRUE(plan.ok());
  for (int a : plan->assignment) EXPECT_EQ(a, -1);
}

TEST(ExecutePrematchTest, Examples) {
  const Scenario s = testing::TwoRecipientInstance();
  PreMatchPlan plan;
  plan.horizon = 1;
  plan.assignment = {1};
  auto r = DemandRealization::AllAvailable(s);
  EXPECT_EQ(ExecutePrematch(s, plan, 0, 1, r), 1);
  r.set_available(1, 1, false);
  EXPECT_EQ(ExecutePrematch(s, plan, 0, 1, r), std::nullopt);
  plan.assignment = {-1};
  EXPECT_EQ(ExecutePrematch(s, plan, 0, 1, DemandRealization::AllAvailable(s)),
            std::nullopt);
}

TEST(AdaptMatchTest, UsesPrematchThenFallsBack) {
  const Scenario s = testing::TwoRecipientInstance();
  PreMatchPlan plan;
  plan.horizon = 1;
  plan.assignment = {0};
  const auto all = DemandRealization::AllAvailable(s);
  Rng rng(12);
  for (double g : {0.0, 0.5, 1.0}) {
    EXPECT_EQ(AdaptMatchDecide(s, plan, 0, 1, all, g, rng), 0);
  }
  // Pre-matched recipient A unavailable; B is the only option.
  auto r = all;
  r.set_available(0, 1, false);
  EXPECT_EQ(AdaptMatchDecide(s, plan, 0, 1, r, 0.0, rng), 1);

  // No pre-match: fallback is max at gamma 0 and rand at gamma 1.
  plan.assignment = {-1};
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(AdaptMatchDecide(s, plan, 0, 1, all, 0.0, rng), 1);
  }
  const auto counts = Tally(
      2, [&](int) { return AdaptMatchDecide(s, plan, 0, 1, all, 1.0, rng); });
  EXPECT_LT(ChiSquared({counts[0], counts[1]}, {0.5, 0.5}), 10.83);
}

TEST(EstimateBetaTest, FirstStepIsOneAndHalfDegreeAlphaKeepsHalf) {
  Rng rng(13);
  testing::RandomInstanceOptions opts;
  opts.max_horizon = 6;
  opts.max_rate_limit = 3;
  for (int i = 0; i < 20; ++i) {
    const Scenario s = testing::RandomInstance(rng, opts);
    const int D = DonorMaxDegree(s);
    if (D == 0) continue;
    SolveOptions o;
    auto x = SolveRateLimitLp(s, o);
    ASSERT_TRUE(x.ok());
    BetaOptions bo;
    bo.trials = 2000;
    bo.seed = rng();
    const BetaEstimate beta = EstimateBeta(s, *x, 1.0 / (2 * D), bo);
    for (int u = 0; u < s.num_donors(); ++u) {
      EXPECT_EQ(beta.at(u, 1), 1.0);
      for (int t = 1; t <= s.horizon(); ++t) {
        const double b = beta.at(u, t);
        EXPECT_GT(b, 0.0);
        EXPECT_LE(b, 1.0);
        const double se = beta.std_err[static_cast<std::size_t>(u) * s.horizon() + t - 1];
        EXPECT_GE(b, 0.5 - 3 * std::max(se, BinomialSe(0.5, bo.trials)));
      }
    }
  }
}

TEST(EstimateBetaTest, ZeroSolutionGivesAllOnes) {
  Rng rng(14);
  const Scenario s = testing::RandomInstance(rng);
  LpSolution x;
  x.kind = ProblemKind::kRateLimitLp;
  x.horizon = s.horizon();
  x.x.assign(static_cast<std::size_t>(s.num_edges()) * s.horizon(), 0.0);
  const BetaEstimate beta = EstimateBeta(s, x, 0.5);
  for (double b : beta.beta) EXPECT_EQ(b, 1.0);
}

TEST(NAdapLpRateTest, HalfDegreeAlphaIsValidAndZeroAlphaEmpty) {
  Rng rng(15);
  for (int i = 0; i < 30; ++i) {
    const Scenario s = testing::RandomInstance(rng);
    const int D = DonorMaxDegree(s);
    if (D == 0) continue;
    PolicySpec spec;
    spec.kind = PolicyKind::kNAdapLpRate;
    spec.mode = Mode::kRateLimited;
    spec.gamma = 0.0;
    PrepareOptions po;
    po.beta.seed = rng();
    auto prepared = PreparePolicy(s, spec, po);
    ASSERT_TRUE(prepared.ok()) << prepared.status();
    EXPECT_DOUBLE_EQ(prepared->alpha, 1.0 / (2 * D));

    auto empty = NAdapLpRatePlan(s, 0.0, 0.0, *prepared->beta, 1);
    ASSERT_TRUE(empty.ok());
    for (int a : empty->assignment) EXPECT_EQ(a, -1);
  }
}

TEST(NAdapLpRateTest, MatchFrequencyTracksScaledSolution) {
  // Two donors, two recipients with availability below one.
  ScenarioBuilder b(4, 2);
  const int u0 = b.AddDonor("u0");
  const int u1 = b.AddDonor("u1");
  const int a = b.AddRecipient("A", RecipientKind::kDynamic);
  const int c = b.AddRecipient("C", RecipientKind::kStatic);
  for (int t = 1; t <= 4; ++t) b.SetAvailability(a, t, t % 2 ? 0.8 : 0.4);
  b.AddEdge(u0, a, 0.9);
  b.AddEdge(u0, c, 0.3);
  b.AddEdge(u1, a, 0.6);
  const Scenario s = b.Build();
  PolicySpec spec;
  spec.kind = PolicyKind::kNAdapLpRate;
  spec.mode = Mode::kRateLimited;
  PrepareOptions po;
  po.beta.trials = 20000;
  po.beta.seed = 77;
  auto prepared = PreparePolicy(s, spec, po);
  ASSERT_TRUE(prepared.ok()) << prepared.status();
  EvaluateOptions eo;
  eo.trials = 40000;
  eo.realization_mode = RealizationMode::kResampled;
  eo.seed = 5;
  auto agg = MonteCarloEvaluate(s, *prepared, eo);
  ASSERT_TRUE(agg.ok());
  std::map<std::pair<int, int>, int> hits;
  for (const auto& trial : agg->trials) {
    for (int t = 1; t <= s.horizon(); ++t) {
      for (int e : trial.outcome.matched[t - 1]) ++hits[{e, t}];
    }
  }
  for (int e = 0; e < s.num_edges(); ++e) {
    for (int t = 1; t <= s.horizon(); ++t) {
      const double expected = prepared->alpha * prepared->lp->x_at(e, t);
      const double got = hits[{e, t}] / double(eo.trials);
      // Beta is itself estimated; allow its sampling error on top.
      EXPECT_NEAR(got, expected,
                  4 * BinomialSe(expected, eo.trials) +
                      4 * expected * BinomialSe(0.5, po.beta.trials))
          << "edge " << e << " t=" << t;
    }
  }
}

TEST(PreparePolicyTest, DefaultAlphaAndModeChecks) {
  const Scenario s =
      testing::TwoRecipientInstance(0.9, 1.0, std::vector<double>{0.45, 0.5});
  auto spec = ParsePolicySpec("nadaplp:gamma=0.5");
  ASSERT_TRUE(spec.ok());
  auto prepared = PreparePolicy(s, *spec);
  ASSERT_TRUE(prepared.ok());
  EXPECT_DOUBLE_EQ(prepared->alpha, 0.5);
  EXPECT_TRUE(prepared->plan.has_value());

  PolicySpec bad;
  bad.kind = PolicyKind::kAdaptMatch;
  bad.mode = Mode::kRateLimited;
  EXPECT_EQ(PreparePolicy(s, bad).status().code(),
            absl::StatusCode::kInvalidArgument);
}

}  // namespace
}  // namespace bdmatch
