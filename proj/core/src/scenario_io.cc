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

#include "bdmatch/scenario_io.h"

#include <fstream>
#include <map>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace bdmatch {

namespace {

using nlohmann::json;

absl::Status Invalid(const std::string& what) {
  return absl::InvalidArgumentError(absl::StrCat("scenario: ", what));
}

// Expands one weight/availability entry into `T` values. Object entries
// leave unspecified steps at `missing`; if `missing` is unset, gaps are an
// error.
absl::StatusOr<std::vector<double>> ExpandSeries(
    const json& value, int T, std::optional<double> missing,
    const std::string& context) {
  std::vector<double> out(T, missing.value_or(0.0));
  if (value.is_number()) {
    std::fill(out.begin(), out.end(), value.get<double>());
    return out;
  }
  if (value.is_array()) {
    if (static_cast<int>(value.size()) != T) {
      return Invalid(absl::StrCat(context, ": expected ", T,
                                  " per-step values, got ", value.size()));
    }
    for (int t = 0; t < T; ++t) {
      if (!value[t].is_number()) {
        return Invalid(absl::StrCat(context, ": non-numeric entry"));
      }
      out[t] = value[t].get<double>();
    }
    return out;
  }
  if (value.is_object()) {
    std::vector<bool> seen(T, false);
    for (const auto& [key, entry] : value.items()) {
      int t = 0;
      try {
        std::size_t pos = 0;
        t = std::stoi(key, &pos);
        if (pos != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        return Invalid(absl::StrCat(context, ": bad step key '", key, "'"));
      }
      if (t < 1 || t > T) {
        return Invalid(absl::StrCat(context, ": step ", t, " outside 1..", T));
      }
      if (!entry.is_number()) {
        return Invalid(absl::StrCat(context, ": non-numeric entry"));
      }
      out[t - 1] = entry.get<double>();
      seen[t - 1] = true;
    }
    if (!missing.has_value()) {
      for (int t = 0; t < T; ++t) {
        if (!seen[t]) {
          return Invalid(absl::StrCat(context, ": missing entry for t=", t + 1));
        }
      }
    }
    return out;
  }
  return Invalid(absl::StrCat(context, ": expected number, array or object"));
}

json CompactSeries(const std::vector<double>& flat, int index, int T) {
  const auto begin = flat.begin() + static_cast<std::ptrdiff_t>(index) * T;
  const auto end = begin + T;
  if (std::all_of(begin, end, [&](double x) { return x == *begin; })) {
    return *begin;
  }
  return json(std::vector<double>(begin, end));
}

absl::StatusOr<Scenario> Parse(const json& doc) {
  if (!doc.is_object()) return Invalid("top level must be an object");
  for (const char* key : {"donors", "recipients", "edges", "weights",
                          "horizon", "rate_limit"}) {
    if (!doc.contains(key)) return Invalid(absl::StrCat("missing key '", key, "'"));
  }
  const int T = doc.at("horizon").get<int>();
  const int K = doc.at("rate_limit").get<int>();
  if (T < 1) return Invalid("horizon must be >= 1");
  if (K < 1) return Invalid("rate_limit must be >= 1");
  ScenarioBuilder b(T, K);

  std::map<std::string, int> donor_index;
  for (const json& d : doc.at("donors")) {
    const std::string id = d.at("id").get<std::string>();
    const int first = d.value("first_notify_day", 1);
    const LatLon loc{d.value("lat", 0.0), d.value("lon", 0.0)};
    if (donor_index.count(id)) return Invalid(absl::StrCat("duplicate donor '", id, "'"));
    donor_index[id] = b.AddDonor(id, first, loc);
  }
  std::map<std::string, int> recipient_index;
  std::vector<RecipientKind> kinds;
  for (const json& r : doc.at("recipients")) {
    const std::string id = r.at("id").get<std::string>();
    const std::string kind = r.value("kind", "static");
    RecipientKind k;
    if (kind == "static") {
      k = RecipientKind::kStatic;
    } else if (kind == "dynamic") {
      k = RecipientKind::kDynamic;
    } else {
      return Invalid(absl::StrCat("recipient '", id, "' has unknown kind '",
                                  kind, "'"));
    }
    if (recipient_index.count(id)) {
      return Invalid(absl::StrCat("duplicate recipient '", id, "'"));
    }
    const LatLon loc{r.value("lat", 0.0), r.value("lon", 0.0)};
    recipient_index[id] = b.AddRecipient(id, k, loc);
    kinds.push_back(k);
  }

  const json& edges = doc.at("edges");
  const json& weights = doc.at("weights");
  if (!weights.is_array() || weights.size() != edges.size()) {
    return Invalid("'weights' must be an array with one entry per edge");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    if (!e.is_array() || e.size() != 2) {
      return Invalid(absl::StrCat("edge #", i, " must be [donor, recipient]"));
    }
    const std::string du = e[0].get<std::string>();
    const std::string rv = e[1].get<std::string>();
    auto du_it = donor_index.find(du);
    if (du_it == donor_index.end()) {
      return Invalid(absl::StrCat("edge #", i, " references unknown donor '", du, "'"));
    }
    auto rv_it = recipient_index.find(rv);
    if (rv_it == recipient_index.end()) {
      return Invalid(absl::StrCat("edge #", i, " references unknown recipient '", rv, "'"));
    }
    auto series = ExpandSeries(weights[i], T, std::nullopt,
                               absl::StrCat("weights of edge #", i));
    if (!series.ok()) return series.status();
    const int idx = b.AddEdge(du_it->second, rv_it->second, 0.0);
    b.SetWeights(idx, *series);
  }

  if (doc.contains("availability")) {
    const json& avail = doc.at("availability");
    if (!avail.is_object()) return Invalid("'availability' must be an object");
    for (const auto& [id, entry] : avail.items()) {
      auto it = recipient_index.find(id);
      if (it == recipient_index.end()) {
        return Invalid(absl::StrCat("availability for unknown recipient '", id, "'"));
      }
      const double fallback =
          kinds[it->second] == RecipientKind::kStatic ? 1.0 : 0.0;
      auto series = ExpandSeries(entry, T, fallback,
                                 absl::StrCat("availability of '", id, "'"));
      if (!series.ok()) return series.status();
      b.SetAvailabilityProfile(it->second, *series);
    }
  }

  if (doc.contains("normalization") && !doc.at("normalization").is_null()) {
    const json& norm = doc.at("normalization");
    if (!norm.is_object()) return Invalid("'normalization' must be an object");
    std::vector<double> m(recipient_index.size(), 0.0);
    std::vector<bool> seen(m.size(), false);
    for (const auto& [id, value] : norm.items()) {
      auto it = recipient_index.find(id);
      if (it == recipient_index.end()) {
        return Invalid(absl::StrCat("normalization for unknown recipient '", id, "'"));
      }
      m[it->second] = value.get<double>();
      seen[it->second] = true;
    }
    for (const auto& [id, v] : recipient_index) {
      if (!seen[v]) {
        return Invalid(absl::StrCat("normalization missing recipient '", id, "'"));
      }
    }
    b.SetNormalization(std::move(m));
  }
  return b.Build();
}

}  // namespace

absl::StatusOr<Scenario> ScenarioFromJson(const json& doc) {
  try {
    return Parse(doc);
  } catch (const json::exception& e) {
    return Invalid(e.what());
  }
}

json ScenarioToJson(const Scenario& s) {
  const int T = s.horizon();
  json doc;
  doc["horizon"] = T;
  doc["rate_limit"] = s.rate_limit();
  json donors = json::array();
  for (const Donor& d : s.donors()) {
    donors.push_back({{"id", d.id},
                      {"lat", d.location.lat},
                      {"lon", d.location.lon},
                      {"first_notify_day", d.first_notify_day}});
  }
  doc["donors"] = std::move(donors);
  json recipients = json::array();
  for (const Recipient& r : s.recipients()) {
    recipients.push_back(
        {{"id", r.id},
         {"lat", r.location.lat},
         {"lon", r.location.lon},
         {"kind", r.kind == RecipientKind::kStatic ? "static" : "dynamic"}});
  }
  doc["recipients"] = std::move(recipients);
  json edges = json::array();
  json weights = json::array();
  for (int e = 0; e < s.num_edges(); ++e) {
    const Edge& edge = s.edge(e);
    edges.push_back({s.donor(edge.donor).id, s.recipient(edge.recipient).id});
    weights.push_back(CompactSeries(s.raw_weights(), e, T));
  }
  doc["edges"] = std::move(edges);
  doc["weights"] = std::move(weights);
  json avail = json::object();
  for (int v = 0; v < s.num_recipients(); ++v) {
    if (s.recipient(v).kind == RecipientKind::kStatic) continue;
    avail[s.recipient(v).id] = CompactSeries(s.raw_availability(), v, T);
  }
  doc["availability"] = std::move(avail);
  if (s.has_normalization()) {
    json norm = json::object();
    for (int v = 0; v < s.num_recipients(); ++v) {
      norm[s.recipient(v).id] = s.normalization(v);
    }
    doc["normalization"] = std::move(norm);
  }
  return doc;
}

absl::StatusOr<json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", e.what()));
  }
}

absl::Status WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << text;
  out.close();
  if (!out) return absl::UnavailableError(absl::StrCat("error writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<Scenario> LoadScenario(const std::string& path) {
  auto doc = ReadJsonFile(path);
  if (!doc.ok()) return doc.status();
  auto s = ScenarioFromJson(*doc);
  if (!s.ok()) return s.status();
  const auto violations = ValidateScenario(*s);
  if (!violations.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        path, ": invalid scenario: ", absl::StrJoin(violations, "; ")));
  }
  return s;
}

absl::Status SaveScenario(const Scenario& s, const std::string& path) {
  return WriteTextFile(path, ScenarioToJson(s).dump(1) + "\n");
}

}  // namespace bdmatch
