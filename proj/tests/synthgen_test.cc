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

#include "bdmatch/synthgen.h"

#include <cmath>
#include <numbers>

#include "bdmatch/scenario_io.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace bdmatch {
namespace {

using ::testing::HasSubstr;
using ::testing::IsEmpty;

TEST(HaversineTest, Examples) {
  EXPECT_EQ(HaversineKm({12.5, -40.0}, {12.5, -40.0}), 0.0);
  EXPECT_NEAR(HaversineKm({0, 0}, {0, 1}), 111.195, 0.001);
  EXPECT_NEAR(HaversineKm({0, 0}, {0, 1}), std::numbers::pi * 6371.0 / 180, 1e-9);
  EXPECT_NEAR(HaversineKm({0, 0}, {0, 180}), 20015.09, 0.01);
  EXPECT_NEAR(HaversineKm({45, 10}, {-45, -170}), std::numbers::pi * 6371.0, 1e-6);
  EXPECT_NEAR(HaversineKm({10, 20}, {30, 40}), HaversineKm({30, 40}, {10, 20}), 1e-12);
}

TEST(EdgeWeightTest, Examples) {
  EXPECT_EQ(EdgeWeight(0.05, 10, 0), 0.05);
  EXPECT_NEAR(EdgeWeight(0.05, 10, 10), 0.0183940, 1e-7);
  double prev = EdgeWeight(0.08, 5, 0);
  for (double d = 1; d < 500; d += 1) {
    const double w = EdgeWeight(0.08, 5, d);
    EXPECT_LE(w, prev);
    prev = w;
  }
  EXPECT_LT(prev, 1e-40);
}

TEST(AvailabilityProfileTest, LevelsAndShortHorizon) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    for (double p : AvailabilityProfile(30, rng)) {
      EXPECT_TRUE(p == 0.1 || p == 0.9);
    }
    const auto one = AvailabilityProfile(1, rng);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_TRUE(one[0] == 0.1 || one[0] == 0.9);
  }
}

TEST(AvailabilityProfileTest, RunLengthsMatchZeroResampledPoisson) {
  // Only the first run of each profile is an unbiased draw: later complete
  // runs are conditioned on fitting inside the horizon.
  Rng rng(2);
  const double lambda = 4.0;
  const double mean = lambda / (1.0 - std::exp(-lambda));
  const double second = (lambda + lambda * lambda) / (1.0 - std::exp(-lambda));
  const double sd = std::sqrt(second - mean * mean);
  const int profiles = 20000;
  double sum = 0.0;
  int first_high = 0;
  for (int i = 0; i < profiles; ++i) {
    const auto p = AvailabilityProfile(40, rng);
    first_high += p[0] == 0.9;
    int len = 1;
    while (len < static_cast<int>(p.size()) && p[len] == p[0]) ++len;
    ASSERT_LT(len, 40);
    sum += len;
  }
  EXPECT_NEAR(sum / profiles, mean, 3 * sd / std::sqrt(profiles));
  EXPECT_NEAR(first_high / double(profiles), 0.5,
              3 * std::sqrt(0.25 / profiles));
}

GeneratorConfig DiscConfig() {
  GeneratorConfig cfg;
  cfg.donor_count = 40;
  cfg.recipient_count = 6;
  cfg.horizon = 20;
  cfg.rate_limit = 5;
  cfg.population.disc = UniformDisc{{40.0, -75.0}, 12.0};
  cfg.seed = 9;
  return cfg;
}

TEST(GenerateCityTest, InvariantsHold) {
  const GeneratorConfig cfg = DiscConfig();
  auto s = GenerateCity(cfg);
  ASSERT_TRUE(s.ok()) << s.status();
  EXPECT_THAT(ValidateScenario(*s), IsEmpty());
  EXPECT_EQ(s->num_donors(), 40);
  EXPECT_EQ(s->num_recipients(), 6);
  int num_static = 0;
  for (const Recipient& r : s->recipients()) {
    num_static += r.kind == RecipientKind::kStatic;
  }
  EXPECT_EQ(num_static, 3);
  for (int e = 0; e < s->num_edges(); ++e) {
    const Edge& edge = s->edge(e);
    const double d = HaversineKm(s->donor(edge.donor).location,
                                 s->recipient(edge.recipient).location);
    EXPECT_LE(d, cfg.edge_radius_km);
    for (int t = 1; t <= s->horizon(); ++t) {
      EXPECT_GT(s->weight(e, t), 0.0);
      EXPECT_LE(s->weight(e, t), 0.08);
    }
  }
  for (const Donor& d : s->donors()) {
    EXPECT_GE(d.first_notify_day, 1);
    EXPECT_LE(d.first_notify_day, cfg.rate_limit - 1);
    EXPECT_LE(HaversineKm(d.location, {40.0, -75.0}), 12.0 + 1e-9);
  }
  // Every in-radius pair has an edge.
  int pairs = 0;
  for (int u = 0; u < s->num_donors(); ++u) {
    for (int v = 0; v < s->num_recipients(); ++v) {
      if (HaversineKm(s->donor(u).location, s->recipient(v).location) <=
          cfg.edge_radius_km) {
        ++pairs;
        EXPECT_TRUE(s->FindEdge(u, v).has_value());
      }
    }
  }
  EXPECT_EQ(pairs, s->num_edges());
}

TEST(GenerateCityTest, StaticFractionFloorsAndAllStatic) {
  GeneratorConfig cfg = DiscConfig();
  cfg.recipient_count = 7;
  cfg.static_fraction = 0.5;
  auto s = GenerateCity(cfg);
  ASSERT_TRUE(s.ok());
  int num_static = 0;
  for (const Recipient& r : s->recipients()) num_static += r.kind == RecipientKind::kStatic;
  EXPECT_EQ(num_static, 3);

  cfg.static_fraction = 1.0;
  s = GenerateCity(cfg);
  ASSERT_TRUE(s.ok());
  for (double p : s->raw_availability()) EXPECT_EQ(p, 1.0);
}

TEST(GenerateCityTest, FarApartEntitiesGetNoEdge) {
  // Two single-cell clusters about 20 km apart; donors and recipients land in
  // both, but only same-cluster pairs are within 15 km.
  GeneratorConfig cfg;
  cfg.donor_count = 10;
  cfg.recipient_count = 4;
  cfg.population.cells = {{40.0, -75.0, 1.0}, {40.18, -75.0, 1.0}};
  cfg.population.cell_size_deg = 0.001;
  auto s = GenerateCity(cfg);
  ASSERT_TRUE(s.ok()) << s.status();
  for (int e = 0; e < s->num_edges(); ++e) {
    const Edge& edge = s->edge(e);
    EXPECT_NEAR(s->donor(edge.donor).location.lat,
                s->recipient(edge.recipient).location.lat, 0.01);
  }
  EXPECT_GT(HaversineKm({40.0, -75.0}, {40.18, -75.0}), 19.9);
}

TEST(GenerateCityTest, DeterministicUnderSeed) {
  const GeneratorConfig cfg = DiscConfig();
  auto a = GenerateCity(cfg);
  auto b = GenerateCity(cfg);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(ScenarioToJson(*a).dump(1), ScenarioToJson(*b).dump(1));
  GeneratorConfig other = cfg;
  other.seed = 10;
  auto c = GenerateCity(other);
  ASSERT_TRUE(c.ok());
  EXPECT_NE(ScenarioToJson(*a).dump(1), ScenarioToJson(*c).dump(1));
}

TEST(GeneratorConfigTest, ValidationAndJson) {
  GeneratorConfig bad = DiscConfig();
  bad.donor_count = 0;
  bad.edge_radius_km = -1;
  bad.static_fraction = 1.5;
  EXPECT_EQ(ValidateGeneratorConfig(bad).size(), 3u);
  EXPECT_FALSE(GenerateCity(bad).ok());

  auto cfg = GeneratorConfigFromJson(nlohmann::json::parse(R"({
    "donor_count": 5, "recipient_count": 2, "seed": 4,
    "population": {"uniform_disc": {"lat": 1.0, "lon": 2.0, "radius_km": 3.0}},
    "w0_range": [0.02, 0.05], "decay_set": [7],
    "availability": {"low": 0.2}
  })"), ".");
  ASSERT_TRUE(cfg.ok()) << cfg.status();
  EXPECT_EQ(cfg->donor_count, 5);
  EXPECT_EQ(cfg->w0_min, 0.02);
  EXPECT_EQ(cfg->decay_set, std::vector<double>{7});
  EXPECT_EQ(cfg->availability.low, 0.2);
  EXPECT_EQ(cfg->availability.high, 0.9);
  EXPECT_EQ(cfg->edge_radius_km, 15.0);
  EXPECT_EQ(cfg->population.disc->radius_km, 3.0);

  auto unknown = GeneratorConfigFromJson(nlohmann::json::parse(R"({
    "donor_count": 5, "recipient_count": 2, "colour": "red",
    "population": {"uniform_disc": {"lat": 1.0, "lon": 2.0, "radius_km": 3.0}}
  })"), ".");
  EXPECT_EQ(unknown.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_THAT(std::string(unknown.status().message()), HasSubstr("colour"));
}

TEST(PopulationGridTest, LoadsBundledGrid) {
  auto cells = LoadPopulationGrid(std::string(BDMATCH_DATA_DIR) +
                                  "/cities/city_a_grid.csv");
  ASSERT_TRUE(cells.ok()) << cells.status();
  EXPECT_GT(cells->size(), 100u);
  for (const auto& c : *cells) EXPECT_GT(c.weight, 0.0);
  EXPECT_EQ(LoadPopulationGrid("/nonexistent.csv").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(PopulationGridTest, BundledSmallConfigGenerates) {
  auto cfg = LoadGeneratorConfig(std::string(BDMATCH_DATA_DIR) +
                                 "/cities/city_small.json");
  ASSERT_TRUE(cfg.ok()) << cfg.status();
  auto s = GenerateCity(*cfg);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->num_donors(), cfg->donor_count);
  EXPECT_EQ(s->num_recipients(), cfg->recipient_count);
  EXPECT_THAT(ValidateScenario(*s), IsEmpty());
}

}  // namespace
}  // namespace bdmatch
