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

// Synthetic city scenarios.
//
// Donors and recipients are drawn from a population density (a weighted grid
// of cells, or a uniform disc). Every pair within edge_radius_km gets an edge
// of constant weight w0_v * exp(-d / k_u), with w0_v ~ U[w0_min, w0_max] per
// recipient and k_u uniform over decay_set per donor. floor(static_fraction *
// recipient_count) recipients are static; the rest get alternating low/high
// availability runs of Poisson(mean_run_length) length (zero draws redrawn).

#ifndef BDMATCH_SYNTHGEN_H_
#define BDMATCH_SYNTHGEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "bdmatch/rng.h"
#include "bdmatch/scenario.h"
#include "nlohmann/json.hpp"

namespace bdmatch {

inline constexpr double kEarthRadiusKm = 6371.0;

// Great-circle distance between two points given in degrees.
double HaversineKm(LatLon a, LatLon b);

double EdgeWeight(double w0, double k, double d_km);

struct AvailabilityConfig {
  double low = 0.1;
  double high = 0.9;
  double mean_run_length = 4.0;
};

std::vector<double> AvailabilityProfile(int horizon, Rng& rng,
                                        const AvailabilityConfig& config = {});

struct PopulationCell {
  double lat = 0.0;
  double lon = 0.0;
  double weight = 0.0;
};

struct UniformDisc {
  LatLon center;
  double radius_km = 10.0;
};

struct Population {
  std::vector<PopulationCell> cells;
  double cell_size_deg = 0.01;  // points are jittered uniformly within a cell
  std::optional<UniformDisc> disc;  // used instead of cells when set
};

struct GeneratorConfig {
  std::string name = "city";
  int donor_count = 100;
  int recipient_count = 16;
  int horizon = 30;
  int rate_limit = 7;
  Population population;
  double edge_radius_km = 15.0;
  double w0_min = 0.01;
  double w0_max = 0.08;
  std::vector<double> decay_set = {5.0, 10.0, 20.0};
  double static_fraction = 0.5;
  AvailabilityConfig availability;
  std::uint64_t seed = 1;
};

std::vector<std::string> ValidateGeneratorConfig(const GeneratorConfig& cfg);

absl::StatusOr<Scenario> GenerateCity(const GeneratorConfig& cfg);

// CSV with header "lat,lon,weight".
absl::StatusOr<std::vector<PopulationCell>> LoadPopulationGrid(
    const std::string& path);

// Keys mirror GeneratorConfig. "population" is either
// {"grid": "<csv path>", "cell_size_deg": 0.01} with the path relative to
// `base_dir`, or {"uniform_disc": {"lat", "lon", "radius_km"}}.
absl::StatusOr<GeneratorConfig> GeneratorConfigFromJson(
    const nlohmann::json& doc, const std::string& base_dir);
absl::StatusOr<GeneratorConfig> LoadGeneratorConfig(const std::string& path);

}  // namespace bdmatch

#endif  // BDMATCH_SYNTHGEN_H_
