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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "bdmatch/scenario_io.h"

namespace bdmatch {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kKmPerDegree = kEarthRadiusKm * kDegToRad;

// Sub-streams of the generator seed.
constexpr std::uint64_t kDonorLocations = 1;
constexpr std::uint64_t kRecipientLocations = 2;
constexpr std::uint64_t kAttributes = 3;
constexpr std::uint64_t kProfiles = 4;

class PopulationSampler {
 public:
  explicit PopulationSampler(const Population& pop) : pop_(pop) {
    double acc = 0.0;
    for (const PopulationCell& c : pop.cells) {
      acc += std::max(0.0, c.weight);
      cumulative_.push_back(acc);
    }
  }

  LatLon Sample(Rng& rng) const {
    if (pop_.disc.has_value()) {
      const double r = pop_.disc->radius_km * std::sqrt(rng.Uniform01());
      const double theta = 2.0 * std::numbers::pi * rng.Uniform01();
      const LatLon c = pop_.disc->center;
      const double dlat = r * std::sin(theta) / kKmPerDegree;
      const double dlon =
          r * std::cos(theta) / (kKmPerDegree * std::cos(c.lat * kDegToRad));
      return {c.lat + dlat, c.lon + dlon};
    }
    const double target = rng.Uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const std::size_t i = std::min<std::size_t>(
        it - cumulative_.begin(), pop_.cells.size() - 1);
    const PopulationCell& c = pop_.cells[i];
    const double h = pop_.cell_size_deg;
    return {c.lat + rng.Uniform(-0.5 * h, 0.5 * h),
            c.lon + rng.Uniform(-0.5 * h, 0.5 * h)};
  }

 private:
  const Population& pop_;
  std::vector<double> cumulative_;
};

std::string PaddedId(char prefix, int index, int count) {
  const int width = static_cast<int>(std::to_string(std::max(1, count)).size());
  return absl::StrFormat("%c%0*d", prefix, width, index + 1);
}

}  // namespace

double HaversineKm(LatLon a, LatLon b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                       std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double EdgeWeight(double w0, double k, double d_km) {
  return w0 * std::exp(-d_km / k);
}

std::vector<double> AvailabilityProfile(int horizon, Rng& rng,
                                        const AvailabilityConfig& config) {
  std::vector<double> out;
  out.reserve(horizon);
  std::poisson_distribution<int> run_length(config.mean_run_length);
  bool high = rng.Bernoulli(0.5);
  while (static_cast<int>(out.size()) < horizon) {
    int n = 0;
    while (n == 0) n = run_length(rng);
    for (int i = 0; i < n && static_cast<int>(out.size()) < horizon; ++i) {
      out.push_back(high ? config.high : config.low);
    }
    high = !high;
  }
  return out;
}

std::vector<std::string> ValidateGeneratorConfig(const GeneratorConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.donor_count < 1) out.push_back("donor_count must be >= 1");
  if (cfg.recipient_count < 1) out.push_back("recipient_count must be >= 1");
  if (cfg.horizon < 1) out.push_back("horizon must be >= 1");
  if (cfg.rate_limit < 1) out.push_back("rate_limit must be >= 1");
  if (!(cfg.edge_radius_km > 0.0)) out.push_back("edge_radius_km must be > 0");
  if (!(cfg.w0_min >= 0.0 && cfg.w0_min <= cfg.w0_max && cfg.w0_max <= 1.0)) {
    out.push_back("w0_range must satisfy 0 <= min <= max <= 1");
  }
  if (cfg.decay_set.empty()) out.push_back("decay_set must not be empty");
  for (double k : cfg.decay_set) {
    if (!(k > 0.0)) out.push_back("decay_set values must be > 0");
  }
  if (!(cfg.static_fraction >= 0.0 && cfg.static_fraction <= 1.0)) {
    out.push_back("static_fraction must lie in [0,1]");
  }
  const AvailabilityConfig& a = cfg.availability;
  if (!(a.low >= 0.0 && a.low <= 1.0 && a.high >= 0.0 && a.high <= 1.0)) {
    out.push_back("availability levels must lie in [0,1]");
  }
  if (!(a.mean_run_length > 0.0)) {
    out.push_back("availability.mean_run_length must be > 0");
  }
  if (cfg.population.disc.has_value()) {
    if (!(cfg.population.disc->radius_km > 0.0)) {
      out.push_back("uniform_disc radius_km must be > 0");
    }
  } else {
    double total = 0.0;
    for (const PopulationCell& c : cfg.population.cells) {
      if (!(c.weight >= 0.0)) out.push_back("grid weights must be >= 0");
      total += std::max(0.0, c.weight);
    }
    if (!(total > 0.0)) out.push_back("population grid has no positive weight");
    if (!(cfg.population.cell_size_deg >= 0.0)) {
      out.push_back("cell_size_deg must be >= 0");
    }
  }
  return out;
}

absl::StatusOr<Scenario> GenerateCity(const GeneratorConfig& cfg) {
  const auto violations = ValidateGeneratorConfig(cfg);
  if (!violations.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("generator config: ", absl::StrJoin(violations, "; ")));
  }
  const PopulationSampler sampler(cfg.population);
  Rng donor_rng(DeriveSeed(cfg.seed, kDonorLocations));
  Rng recipient_rng(DeriveSeed(cfg.seed, kRecipientLocations));
  Rng attr_rng(DeriveSeed(cfg.seed, kAttributes));
  Rng profile_rng(DeriveSeed(cfg.seed, kProfiles));

  ScenarioBuilder b(cfg.horizon, cfg.rate_limit);
  const int first_max = std::max(1, cfg.rate_limit - 1);
  std::vector<LatLon> donor_loc(cfg.donor_count);
  std::vector<double> decay(cfg.donor_count);
  for (int u = 0; u < cfg.donor_count; ++u) {
    donor_loc[u] = sampler.Sample(donor_rng);
    decay[u] = cfg.decay_set[attr_rng.UniformInt(
        static_cast<int>(cfg.decay_set.size()))];
    const int first = 1 + attr_rng.UniformInt(first_max);
    b.AddDonor(PaddedId('d', u, cfg.donor_count), first, donor_loc[u]);
  }

  std::vector<int> order(cfg.recipient_count);
  for (int v = 0; v < cfg.recipient_count; ++v) order[v] = v;
  std::shuffle(order.begin(), order.end(), attr_rng);
  const int num_static = static_cast<int>(
      std::floor(cfg.static_fraction * cfg.recipient_count + 1e-9));
  std::vector<bool> is_static(cfg.recipient_count, false);
  for (int i = 0; i < num_static; ++i) is_static[order[i]] = true;

  std::vector<LatLon> recipient_loc(cfg.recipient_count);
  std::vector<double> w0(cfg.recipient_count);
  for (int v = 0; v < cfg.recipient_count; ++v) {
    recipient_loc[v] = sampler.Sample(recipient_rng);
    w0[v] = attr_rng.Uniform(cfg.w0_min, cfg.w0_max);
    const RecipientKind kind =
        is_static[v] ? RecipientKind::kStatic : RecipientKind::kDynamic;
    b.AddRecipient(PaddedId('r', v, cfg.recipient_count), kind,
                   recipient_loc[v]);
    if (!is_static[v]) {
      b.SetAvailabilityProfile(
          v, AvailabilityProfile(cfg.horizon, profile_rng, cfg.availability));
    }
  }

  for (int u = 0; u < cfg.donor_count; ++u) {
    for (int v = 0; v < cfg.recipient_count; ++v) {
      const double d = HaversineKm(donor_loc[u], recipient_loc[v]);
      if (d > cfg.edge_radius_km) continue;
      const double w = EdgeWeight(w0[v], decay[u], d);
      if (w <= 0.0) continue;
      b.AddEdge(u, v, w);
    }
  }
  return b.Build();
}

absl::StatusOr<std::vector<PopulationCell>> LoadPopulationGrid(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripAsciiWhitespace(line) != "lat,lon,weight") {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": expected header 'lat,lon,weight'"));
  }
  std::vector<PopulationCell> cells;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> parts = absl::StrSplit(line, ',');
    PopulationCell c;
    if (parts.size() != 3 ||
        !absl::SimpleAtod(absl::StripAsciiWhitespace(parts[0]), &c.lat) ||
        !absl::SimpleAtod(absl::StripAsciiWhitespace(parts[1]), &c.lon) ||
        !absl::SimpleAtod(absl::StripAsciiWhitespace(parts[2]), &c.weight)) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", lineno, ": malformed row"));
    }
    cells.push_back(c);
  }
  return cells;
}

absl::StatusOr<GeneratorConfig> GeneratorConfigFromJson(
    const nlohmann::json& doc, const std::string& base_dir) {
  GeneratorConfig cfg;
  try {
    if (!doc.is_object()) {
      return absl::InvalidArgumentError("generator config must be an object");
    }
    static const char* kKnown[] = {
        "name",           "donor_count", "recipient_count", "horizon",
        "rate_limit",     "population",  "edge_radius_km",  "w0_range",
        "decay_set",      "static_fraction", "availability", "seed"};
    for (const auto& [key, value] : doc.items()) {
      if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) {
            return key == k;
          }) == std::end(kKnown)) {
        return absl::InvalidArgumentError(
            absl::StrCat("generator config: unknown key '", key, "'"));
      }
    }
    cfg.name = doc.value("name", cfg.name);
    cfg.donor_count = doc.at("donor_count").get<int>();
    cfg.recipient_count = doc.at("recipient_count").get<int>();
    cfg.horizon = doc.value("horizon", cfg.horizon);
    cfg.rate_limit = doc.value("rate_limit", cfg.rate_limit);
    cfg.edge_radius_km = doc.value("edge_radius_km", cfg.edge_radius_km);
    if (doc.contains("w0_range")) {
      const auto& r = doc.at("w0_range");
      if (!r.is_array() || r.size() != 2) {
        return absl::InvalidArgumentError("w0_range must be [min, max]");
      }
      cfg.w0_min = r[0].get<double>();
      cfg.w0_max = r[1].get<double>();
    }
    if (doc.contains("decay_set")) {
      cfg.decay_set = doc.at("decay_set").get<std::vector<double>>();
    }
    cfg.static_fraction = doc.value("static_fraction", cfg.static_fraction);
    if (doc.contains("availability")) {
      const auto& a = doc.at("availability");
      cfg.availability.low = a.value("low", cfg.availability.low);
      cfg.availability.high = a.value("high", cfg.availability.high);
      cfg.availability.mean_run_length =
          a.value("mean_run_length", cfg.availability.mean_run_length);
    }
    cfg.seed = doc.value("seed", cfg.seed);
    const auto& pop = doc.at("population");
    if (pop.contains("uniform_disc")) {
      const auto& d = pop.at("uniform_disc");
      cfg.population.disc =
          UniformDisc{{d.at("lat").get<double>(), d.at("lon").get<double>()},
                      d.at("radius_km").get<double>()};
    } else if (pop.contains("grid")) {
      std::filesystem::path grid = pop.at("grid").get<std::string>();
      if (grid.is_relative()) grid = std::filesystem::path(base_dir) / grid;
      auto cells = LoadPopulationGrid(grid.string());
      if (!cells.ok()) return cells.status();
      cfg.population.cells = *std::move(cells);
      cfg.population.cell_size_deg =
          pop.value("cell_size_deg", cfg.population.cell_size_deg);
    } else {
      return absl::InvalidArgumentError(
          "population needs either 'grid' or 'uniform_disc'");
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("generator config: ", e.what()));
  }
  const auto violations = ValidateGeneratorConfig(cfg);
  if (!violations.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("generator config: ", absl::StrJoin(violations, "; ")));
  }
  return cfg;
}

absl::StatusOr<GeneratorConfig> LoadGeneratorConfig(const std::string& path) {
  auto doc = ReadJsonFile(path);
  if (!doc.ok()) return doc.status();
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  auto cfg = GeneratorConfigFromJson(*doc, base.empty() ? "." : base);
  if (!cfg.ok()) {
    return absl::Status(cfg.status().code(),
                        absl::StrCat(path, ": ", cfg.status().message()));
  }
  return cfg;
}

}  // namespace bdmatch
