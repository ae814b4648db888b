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

#include "report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace bdmatch::cli {

std::string FormatNumber(double x) { return absl::StrFormat("%.9g", x); }

int CsvTable::Column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

std::string Quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string ToCsv(const CsvTable& table) {
  std::string out;
  auto append_row = [&](const std::vector<std::string>& row) {
    std::vector<std::string> quoted;
    quoted.reserve(row.size());
    for (const auto& f : row) quoted.push_back(Quote(f));
    absl::StrAppend(&out, absl::StrJoin(quoted, ","), "\n");
  };
  append_row(table.header);
  for (const auto& row : table.rows) append_row(row);
  return out;
}

absl::StatusOr<CsvTable> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else if (c != '\r') {
      field += c;
      field_started = true;
    }
  }
  if (quoted) return absl::InvalidArgumentError("csv: unterminated quote");
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) return absl::InvalidArgumentError("csv: missing header");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("csv: row ", i, " has ", records[i].size(),
                       " fields, header has ", table.header.size()));
    }
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto table = ParseCsv(buffer.str());
  if (!table.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", table.status().message()));
  }
  return table;
}

CsvTable TrialsTable(const Scenario& s,
                     const std::vector<AggregateResult>& results) {
  CsvTable table;
  table.header = {"trial", "policy", "gamma", "total_weight"};
  for (const Recipient& r : s.recipients()) table.header.push_back(r.id);
  for (const AggregateResult& agg : results) {
    for (const TrialResult& tr : agg.trials) {
      std::vector<std::string> row = {
          absl::StrCat(tr.trial), PolicyKindName(agg.policy.kind),
          FormatNumber(agg.policy.gamma_param()),
          FormatNumber(tr.outcome.total_weight)};
      for (double y : tr.outcome.recipient_weight) row.push_back(FormatNumber(y));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

CsvTable AggregateTable(const Scenario& s,
                        const std::vector<AggregateResult>& results) {
  CsvTable table;
  table.header = {"policy",        "gamma_param",  "trial_count",
                  "mean_total_weight", "std_err_total", "gamma_empirical"};
  for (const Recipient& r : s.recipients()) table.header.push_back(r.id);
  for (const AggregateResult& agg : results) {
    std::string gamma_empirical;
    if (s.has_normalization()) {
      const FairnessSet fair = PositiveNormalizationSet(s);
      std::vector<double> y, m;
      for (int v : fair.recipients) {
        y.push_back(agg.mean_recipient_weight[v]);
        m.push_back(s.normalization(v));
      }
      if (auto g = GammaOf(y, m); g.ok()) gamma_empirical = FormatNumber(*g);
    }
    std::vector<std::string> row = {
        PolicyKindName(agg.policy.kind),
        FormatNumber(agg.policy.gamma_param()),
        absl::StrCat(agg.trial_count),
        FormatNumber(agg.mean_total_weight),
        FormatNumber(agg.std_err_total),
        gamma_empirical};
    for (double y : agg.mean_recipient_weight) row.push_back(FormatNumber(y));
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable SweepTable(const std::vector<SweepRow>& rows) {
  CsvTable table;
  table.header = {"policy",          "gamma_param",    "total_weight",
                  "weight_fraction_of_max", "gamma_empirical", "min_normalized",
                  "max_normalized",  "lp_bound"};
  for (const SweepRow& r : rows) {
    table.rows.push_back(
        {r.policy, FormatNumber(r.gamma_param), FormatNumber(r.total_weight),
         FormatNumber(r.report.weight_fraction_of_max),
         FormatNumber(r.report.gamma_empirical),
         FormatNumber(r.report.min_normalized),
         FormatNumber(r.report.max_normalized),
         r.report.lp_bound.has_value() ? FormatNumber(*r.report.lp_bound)
                                       : std::string()});
  }
  return table;
}

std::string RenderSweepSvg(const std::vector<SweepRow>& rows,
                           const std::string& title) {
  constexpr double kWidth = 640, kHeight = 480;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  double y_lo = 1.0, y_hi = 1.0;
  for (const SweepRow& r : rows) {
    y_lo = std::min(y_lo, r.report.weight_fraction_of_max);
    y_hi = std::max(y_hi, r.report.weight_fraction_of_max);
  }
  y_lo = std::floor(y_lo * 10.0) / 10.0;
  y_hi = std::ceil(y_hi * 10.0 + 1e-9) / 10.0;
  if (y_hi - y_lo < 0.1) y_lo = y_hi - 0.1;
  auto px = [&](double g) { return kLeft + g * plot_w; };
  auto py = [&](double f) {
    return kTop + (y_hi - f) / (y_hi - y_lo) * plot_h;
  };

  std::string svg = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
      "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  absl::StrAppend(&svg,
                  "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  absl::StrAppendFormat(
      &svg, "<text x=\"%.1f\" y=\"22\" text-anchor=\"middle\" "
            "font-size=\"14\">%s</text>\n",
      kLeft + plot_w / 2, title);
  // Axes, ticks and grid.
  absl::StrAppendFormat(
      &svg,
      "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
      "fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, plot_w, plot_h);
  for (int i = 0; i <= 10; ++i) {
    const double g = i / 10.0;
    absl::StrAppendFormat(
        &svg,
        "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
        "stroke=\"#ddd\"/>\n<text x=\"%.1f\" y=\"%.1f\" "
        "text-anchor=\"middle\">%.1f</text>\n",
        px(g), kTop, px(g), kTop + plot_h, px(g), kTop + plot_h + 16, g);
  }
  const int y_ticks = static_cast<int>(std::lround((y_hi - y_lo) * 10.0));
  for (int i = 0; i <= y_ticks; ++i) {
    const double f = y_lo + i / 10.0;
    absl::StrAppendFormat(
        &svg,
        "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
        "stroke=\"#ddd\"/>\n<text x=\"%.1f\" y=\"%.1f\" "
        "text-anchor=\"end\">%.1f</text>\n",
        kLeft, py(f), kLeft + plot_w, py(f), kLeft - 6, py(f) + 4, f);
  }
  absl::StrAppendFormat(
      &svg, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">Gamma</text>\n",
      kLeft + plot_w / 2, kHeight - 18);
  absl::StrAppendFormat(
      &svg,
      "<text x=\"18\" y=\"%.1f\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 %.1f)\">weight fraction of max</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2);

  auto marker = [&](const std::string& policy, double x, double y) {
    if (policy == "max") {
      return absl::StrFormat(
          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"6\" fill=\"none\" "
          "stroke=\"red\" stroke-width=\"2\"/>\n",
          x, y);
    }
    const std::string color = policy == "rand" ? "blue" : "green";
    if (policy == "rand") {
      return absl::StrFormat(
          "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" "
          "stroke=\"%s\" stroke-width=\"2\"/>\n",
          x - 5, y - 5, x + 5, y + 5, x - 5, y + 5, x + 5, y - 5, color);
    }
    return absl::StrFormat(
        "<path d=\"M%.2f %.2fL%.2f %.2fM%.2f %.2fL%.2f %.2f\" stroke=\"%s\" "
        "stroke-width=\"2\"/>\n",
        x - 6, y, x + 6, y, x, y - 6, x, y + 6, color);
  };
  for (const SweepRow& r : rows) {
    const double x = px(r.report.gamma_empirical);
    const double y = py(r.report.weight_fraction_of_max);
    absl::StrAppend(&svg, marker(r.policy, x, y));
    if (r.policy == "adaptmatch") {
      absl::StrAppendFormat(
          &svg,
          "<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" "
          "fill=\"green\">%.1f</text>\n",
          x + 7, y - 5, r.gamma_param);
    }
  }
  // Legend.
  const double lx = kLeft + plot_w + 20;
  const char* names[] = {"max", "rand", "adaptmatch"};
  for (int i = 0; i < 3; ++i) {
    const double ly = kTop + 20 + 24 * i;
    absl::StrAppend(&svg, marker(names[i], lx, ly));
    absl::StrAppendFormat(&svg, "<text x=\"%.1f\" y=\"%.1f\">%s</text>\n",
                          lx + 14, ly + 4, names[i]);
  }
  absl::StrAppend(&svg, "</svg>\n");
  return svg;
}

}  // namespace bdmatch::cli
