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

#include "bdmatch/simulator.h"

#include "bdmatch/policy.h"
#include "bdmatch/solver.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bdmatch {
namespace {

using ::testing::IsEmpty;

PreparedPolicy Prepare(const Scenario& s, const std::string& text,
                       Mode mode = Mode::kFixedTime) {
  auto spec = ParsePolicySpec(text, mode);
  EXPECT_TRUE(spec.ok()) << text;
  auto prepared = PreparePolicy(s, *spec);
  EXPECT_TRUE(prepared.ok()) << prepared.status();
  return *prepared;
}

TEST(RunPolicyTest, MaxOnTwoRecipientInstance) {
  const Scenario s = testing::TwoRecipientInstance();
  auto trial = RunPolicy(s, Prepare(s, "max"), DemandRealization::AllAvailable(s), 1);
  ASSERT_TRUE(trial.ok());
  EXPECT_DOUBLE_EQ(trial->outcome.total_weight, 1.0);
  EXPECT_DOUBLE_EQ(trial->outcome.recipient_weight[1], 1.0);
  EXPECT_DOUBLE_EQ(trial->outcome.recipient_weight[0], 0.0);
}

TEST(RunPolicyTest, RandMeanOnTwoRecipientInstance) {
  const Scenario s = testing::TwoRecipientInstance();
  EvaluateOptions o;
  o.trials = 10000;
  o.seed = 3;
  auto agg = MonteCarloEvaluate(s, Prepare(s, "rand"), o);
  ASSERT_TRUE(agg.ok());
  EXPECT_EQ(agg->trial_count, 10000);
  EXPECT_NEAR(agg->mean_total_weight, 0.95, 3 * agg->std_err_total);
  EXPECT_NEAR(agg->mean_recipient_weight[0], 0.45, 3 * agg->std_err_recipient[0]);
  EXPECT_NEAR(agg->mean_recipient_weight[1], 0.5, 3 * agg->std_err_recipient[1]);
}

TEST(RunPolicyTest, NothingAvailableMeansNothingMatched) {
  ScenarioBuilder b(3, 1);
  const int u = b.AddDonor("u");
  const int v = b.AddRecipient("v", RecipientKind::kDynamic);
  b.AddEdge(u, v, 0.5);
  const Scenario s = b.Build();
  const DemandRealization none(1, 3);
  for (const char* p : {"max", "rand", "randmax:0.5", "nadaplp:0", "adaptmatch:0"}) {
    auto trial = RunPolicy(s, Prepare(s, p), none, 1);
    ASSERT_TRUE(trial.ok());
    EXPECT_EQ(trial->outcome.total_weight, 0.0) << p;
  }
}

TEST(RunPolicyTest, RateLimitedMyopicMatchesImmediately) {
  const Scenario s = testing::WaitingInstance(0.01);
  for (Mode mode : {Mode::kRateLimited}) {
    for (const char* p : {"max", "rand"}) {
      auto trial = RunPolicy(s, Prepare(s, p, mode), DemandRealization::AllAvailable(s), 1);
      ASSERT_TRUE(trial.ok());
      EXPECT_DOUBLE_EQ(trial->outcome.total_weight, 0.01) << p;
    }
  }
}

TEST(MonteCarloTest, DeterministicPolicyHasZeroError) {
  Rng rng(4);
  const Scenario s = testing::RandomInstance(rng);
  EvaluateOptions o;
  o.trials = 20;
  auto agg = MonteCarloEvaluate(s, Prepare(s, "max"), o);
  ASSERT_TRUE(agg.ok());
  EXPECT_EQ(agg->std_err_total, 0.0);
  EXPECT_EQ(agg->trial_count, 20);
  EXPECT_EQ(agg->trials.size(), 20u);
}

TEST(MonteCarloTest, RejectsZeroTrials) {
  const Scenario s = testing::TwoRecipientInstance();
  EvaluateOptions o;
  o.trials = 0;
  EXPECT_FALSE(MonteCarloEvaluate(s, Prepare(s, "max"), o).ok());
}

TEST(MonteCarloTest, OutcomesRespectAvailabilityRules) {
  Rng rng(5);
  testing::RandomInstanceOptions opts;
  opts.max_horizon = 6;
  for (int i = 0; i < 30; ++i) {
    const Scenario s = testing::RandomInstance(rng, opts);
    for (Mode mode : {Mode::kFixedTime, Mode::kRateLimited}) {
      const char* policies[] = {"max", "rand", "randmax:0.3"};
      for (const char* p : policies) {
        EvaluateOptions o;
        o.trials = 20;
        o.realization_mode = RealizationMode::kResampled;
        o.seed = rng();
        o.validate = true;
        auto agg = MonteCarloEvaluate(s, Prepare(s, p, mode), o);
        ASSERT_TRUE(agg.ok()) << agg.status();
        // Explicit per-donor spacing check on top of the validator.
        for (const auto& trial : agg->trials) {
          std::vector<int> last(s.num_donors(), -1000);
          for (int t = 1; t <= s.horizon(); ++t) {
            std::vector<int> seen(s.num_donors(), 0);
            for (int e : trial.outcome.matched[t - 1]) {
              const int u = s.edge(e).donor;
              EXPECT_EQ(seen[u]++, 0);
              if (mode == Mode::kFixedTime) {
                EXPECT_TRUE(s.scheduled(u, t));
              } else {
                EXPECT_GE(t - last[u], s.rate_limit());
              }
              last[u] = t;
            }
          }
        }
      }
    }
  }
}

TEST(MonteCarloTest, SameSeedSameResultsAcrossThreadCounts) {
  Rng rng(6);
  testing::RandomInstanceOptions opts;
  opts.max_horizon = 5;
  const Scenario s = testing::RandomInstance(rng, opts);
  for (const char* p : {"rand", "nadapopt:0.5", "adaptmatch:0.5"}) {
    const PreparedPolicy policy = Prepare(s, p);
    EvaluateOptions o;
    o.trials = 200;
    o.seed = 42;
    o.realization_mode = RealizationMode::kResampled;
    o.threads = 1;
    auto serial = MonteCarloEvaluate(s, policy, o);
    o.threads = 4;
    auto parallel = MonteCarloEvaluate(s, policy, o);
    auto again = MonteCarloEvaluate(s, policy, o);
    ASSERT_TRUE(serial.ok() && parallel.ok() && again.ok());
    EXPECT_EQ(serial->mean_total_weight, parallel->mean_total_weight);
    EXPECT_EQ(serial->mean_recipient_weight, parallel->mean_recipient_weight);
    EXPECT_EQ(parallel->mean_total_weight, again->mean_total_weight);
    for (int i = 0; i < 200; ++i) {
      EXPECT_EQ(serial->trials[i].seed, parallel->trials[i].seed);
      EXPECT_EQ(serial->trials[i].outcome.matched,
                parallel->trials[i].outcome.matched);
    }
  }
}

TEST(MonteCarloTest, MeanBelowLpBound) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const Scenario s = testing::RandomInstance(rng);
    SolveOptions so;
    auto lp = SolveFixedTimeLp(s, so);
    ASSERT_TRUE(lp.ok());
    for (const char* p : {"max", "rand", "adaptmatch:0.5", "nadapopt:0"}) {
      EvaluateOptions o;
      o.trials = 500;
      o.seed = rng();
      o.realization_mode = RealizationMode::kResampled;
      auto agg = MonteCarloEvaluate(s, Prepare(s, p), o);
      ASSERT_TRUE(agg.ok());
      EXPECT_LE(agg->mean_total_weight, lp->objective + 3 * agg->std_err_total + 1e-9)
          << p << " instance " << i;
    }
  }
}

TEST(NormalizationTest, ExactProtocolOnTwoRecipientInstance) {
  const Scenario s = testing::TwoRecipientInstance();
  NormalizationOptions o;
  o.protocol = NormalizationProtocol::kExact;
  auto m = EstimateNormalization(s, o);
  ASSERT_TRUE(m.ok());
  EXPECT_NEAR((*m)[0], 0.45, 1e-12);
  EXPECT_NEAR((*m)[1], 0.5, 1e-12);
}

TEST(NormalizationTest, SampledProtocolsConverge) {
  const Scenario s = testing::TwoRecipientInstance();
  for (auto protocol : {NormalizationProtocol::kFixedRealization,
                        NormalizationProtocol::kResampled}) {
    NormalizationOptions o;
    o.protocol = protocol;
    o.trials = 10000;
    o.seed = 8;
    auto m = EstimateNormalization(s, o);
    ASSERT_TRUE(m.ok());
    // Each Y_v is w_v * Bernoulli(1/2).
    EXPECT_NEAR((*m)[0], 0.45, 3 * 0.45 * testing::BinomialSe(0.5, 10000));
    EXPECT_NEAR((*m)[1], 0.5, 3 * 0.5 * testing::BinomialSe(0.5, 10000));
  }
}

TEST(NormalizationTest, SingleRecipientEqualsRandMean) {
  Rng rng(9);
  testing::RandomInstanceOptions opts;
  opts.max_recipients = 1;
  opts.edge_probability = 1.0;
  const Scenario s = testing::RandomInstance(rng, opts);
  NormalizationOptions no;
  no.seed = 10;
  auto m = EstimateNormalization(s, no);
  ASSERT_TRUE(m.ok());
  EvaluateOptions eo;
  eo.seed = 10;
  auto agg = MonteCarloEvaluate(s, Prepare(s, "rand"), eo);
  ASSERT_TRUE(agg.ok());
  EXPECT_DOUBLE_EQ((*m)[0], agg->mean_total_weight);
}

TEST(NormalizationTest, DefaultsToFiftyTrials) {
  EXPECT_EQ(NormalizationOptions().trials, 50);
  EXPECT_EQ(EvaluateOptions().trials, 50);
  EXPECT_EQ(NormalizationOptions().protocol,
            NormalizationProtocol::kFixedRealization);
}

TEST(RealizationTest, FixedRealizationIsSharedAcrossTrials) {
  Rng rng(11);
  const Scenario s = testing::RandomInstance(rng);
  Rng a(FixedRealizationSeed(5));
  Rng b(FixedRealizationSeed(5));
  EXPECT_EQ(DrawRealization(s, a), DrawRealization(s, b));
  EXPECT_THAT(ValidateRealization(s, DrawRealization(s, a)), IsEmpty());
}

}  // namespace
}  // namespace bdmatch
