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

#include "commands.h"

#include <filesystem>
#include <iostream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "bdmatch/metrics.h"
#include "bdmatch/oracle.h"
#include "bdmatch/policy.h"
#include "bdmatch/scenario_io.h"
#include "bdmatch/simulator.h"
#include "bdmatch/solver.h"
#include "bdmatch/synthgen.h"
#include "report.h"

namespace bdmatch::cli {

namespace {

namespace fs = std::filesystem;

absl::Status EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

std::string OutPath(const GlobalOptions& g, const std::string& name) {
  return (fs::path(g.out_dir) / name).string();
}

void Warn(const std::string& message) {
  std::cerr << "warning: " << message << "\n";
}

// A loaded scenario with normalization scores, the fixed realization and the
// options used to prepare policies.
struct Experiment {
  Scenario scenario;
  Mode mode = Mode::kFixedTime;
  DemandRealization realization;
  RealizationMode realization_mode = RealizationMode::kFixed;
  PrepareOptions prepare;
};

absl::StatusOr<Experiment> LoadExperiment(const GlobalOptions& g,
                                          const std::string& path,
                                          const NormalizationFlags& flags) {
  if (g.trials < 1) return absl::InvalidArgumentError("--trials must be >= 1");
  if (flags.trials < 1) {
    return absl::InvalidArgumentError("--norm-trials must be >= 1");
  }
  Experiment ex;
  auto mode = ParseMode(g.mode);
  if (!mode.ok()) return mode.status();
  ex.mode = *mode;
  auto rmode = ParseRealizationMode(flags.realization);
  if (!rmode.ok()) return rmode.status();
  ex.realization_mode = *rmode;
  auto protocol = ParseNormalizationProtocol(flags.protocol);
  if (!protocol.ok()) return protocol.status();
  auto s = LoadScenario(path);
  if (!s.ok()) return s.status();
  ex.scenario = *std::move(s);

  Rng rng(FixedRealizationSeed(g.seed));
  ex.realization = DrawRealization(ex.scenario, rng);

  if (!ex.scenario.has_normalization()) {
    NormalizationOptions norm;
    norm.trials = flags.trials;
    norm.protocol = *protocol;
    norm.mode = ex.mode;
    norm.realization = ex.realization;
    norm.seed = g.seed;
    norm.threads = g.threads;
    auto m = EstimateNormalization(ex.scenario, norm);
    if (!m.ok()) return m.status();
    ex.scenario.set_normalization(*std::move(m));
  }
  FairnessSet fair = PositiveNormalizationSet(ex.scenario);
  for (const auto& w : fair.warnings) Warn(w);
  ex.prepare.fairness_recipients = std::move(fair.recipients);
  ex.prepare.beta.trials = flags.beta_trials;
  ex.prepare.beta.seed = DeriveSeed(g.seed, kBetaStream);
  return ex;
}

absl::StatusOr<AggregateResult> Evaluate(const GlobalOptions& g,
                                         const Experiment& ex,
                                         const PolicySpec& spec) {
  auto prepared = PreparePolicy(ex.scenario, spec, ex.prepare);
  if (!prepared.ok()) return prepared.status();
  EvaluateOptions eval;
  eval.trials = g.trials;
  eval.realization_mode = ex.realization_mode;
  eval.realization = ex.realization;
  eval.seed = g.seed;
  eval.threads = g.threads;
  return MonteCarloEvaluate(ex.scenario, *prepared, eval);
}

absl::Status WriteTable(const std::string& path, const CsvTable& table) {
  if (auto st = WriteTextFile(path, ToCsv(table)); !st.ok()) return st;
  std::cerr << "wrote " << path << "\n";
  return absl::OkStatus();
}

}  // namespace

int ExitCode(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      return 2;
    default:
      return 1;
  }
}

absl::Status Generate(const GlobalOptions& g, const GenerateOptions& o) {
  auto cfg = LoadGeneratorConfig(o.config);
  if (!cfg.ok()) return cfg.status();
  if (o.seed.has_value()) cfg->seed = *o.seed;
  auto s = GenerateCity(*cfg);
  if (!s.ok()) return s.status();
  const auto violations = ValidateScenario(*s);
  if (!violations.empty()) {
    return absl::InternalError(
        absl::StrCat("generated scenario is invalid: ", violations.front()));
  }
  std::string out = o.output;
  if (out.empty()) {
    if (auto st = EnsureDir(g.out_dir); !st.ok()) return st;
    out = OutPath(g, "scenario.json");
  } else if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) {
    if (auto st = EnsureDir(parent.string()); !st.ok()) return st;
  }
  if (auto st = SaveScenario(*s, out); !st.ok()) return st;
  int num_static = 0;
  for (const Recipient& r : s->recipients()) {
    num_static += r.kind == RecipientKind::kStatic ? 1 : 0;
  }
  std::cerr << absl::StrFormat(
      "%s: %d donors, %d recipients (%d static), %d edges, T=%d, K=%d -> %s\n",
      cfg->name, s->num_donors(), s->num_recipients(), num_static,
      s->num_edges(), s->horizon(), s->rate_limit(), out);
  return absl::OkStatus();
}

absl::Status Run(const GlobalOptions& g, const RunOptions& o) {
  auto ex = LoadExperiment(g, o.scenario, o.norm);
  if (!ex.ok()) return ex.status();
  auto spec = ParsePolicySpec(o.policy, ex->mode);
  if (!spec.ok()) return spec.status();
  auto agg = Evaluate(g, *ex, *spec);
  if (!agg.ok()) return agg.status();
  if (auto st = EnsureDir(g.out_dir); !st.ok()) return st;
  const std::vector<AggregateResult> results = {*agg};
  if (auto st = WriteTable(OutPath(g, "trials.csv"),
                           TrialsTable(ex->scenario, results));
      !st.ok()) {
    return st;
  }
  return WriteTable(OutPath(g, "aggregate.csv"),
                    AggregateTable(ex->scenario, results));
}

absl::Status Sweep(const GlobalOptions& g, const SweepOptions& o) {
  auto ex = LoadExperiment(g, o.scenario, o.norm);
  if (!ex.ok()) return ex.status();
  if (ex->mode != Mode::kFixedTime) {
    return absl::InvalidArgumentError(
        "sweep evaluates adaptmatch, which is defined for --mode fixed only");
  }
  std::vector<double> gammas = o.gammas;
  if (gammas.empty()) {
    for (int i = 0; i <= 10; ++i) gammas.push_back(i / 10.0);
  }
  for (double gamma : gammas) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("sweep gamma %g outside [0,1]", gamma));
    }
  }

  std::vector<PolicySpec> specs;
  PolicySpec max_spec;
  max_spec.kind = PolicyKind::kMax;
  PolicySpec rand_spec;
  rand_spec.kind = PolicyKind::kRand;
  specs.push_back(max_spec);
  specs.push_back(rand_spec);
  for (double gamma : gammas) {
    PolicySpec spec;
    spec.kind = PolicyKind::kAdaptMatch;
    spec.gamma = gamma;
    spec.fallback_gamma = gamma;
    specs.push_back(spec);
  }

  std::vector<AggregateResult> results;
  for (const PolicySpec& spec : specs) {
    auto agg = Evaluate(g, *ex, spec);
    if (!agg.ok()) return agg.status();
    results.push_back(*std::move(agg));
  }
  const double max_weight = results.front().mean_total_weight;
  if (!(max_weight > 0.0)) {
    return absl::FailedPreconditionError(
        "max matches no weight on this scenario; weight fractions undefined");
  }
  std::vector<SweepRow> rows;
  for (const AggregateResult& agg : results) {
    std::optional<double> lp_bound;
    if (o.lp_bound) {
      SolveOptions solve;
      solve.gamma = agg.policy.gamma_param();
      solve.fairness_recipients = ex->prepare.fairness_recipients;
      auto lp = SolveFixedTimeLp(ex->scenario, solve);
      if (!lp.ok()) return lp.status();
      lp_bound = lp->objective;
    }
    auto report =
        MakeFairnessReport(ex->scenario, agg.mean_recipient_weight,
                           agg.mean_total_weight, max_weight, lp_bound);
    if (!report.ok()) return report.status();
    SweepRow row;
    row.policy = PolicyKindName(agg.policy.kind);
    row.gamma_param = agg.policy.gamma_param();
    row.total_weight = agg.mean_total_weight;
    row.report = *std::move(report);
    rows.push_back(std::move(row));
  }
  if (auto st = EnsureDir(g.out_dir); !st.ok()) return st;
  if (auto st = WriteTable(OutPath(g, "sweep.csv"), SweepTable(rows));
      !st.ok()) {
    return st;
  }
  const std::string svg_path = OutPath(g, "sweep.svg");
  if (auto st = WriteTextFile(
          svg_path,
          RenderSweepSvg(rows, fs::path(o.scenario).stem().string()));
      !st.ok()) {
    return st;
  }
  std::cerr << "wrote " << svg_path << "\n";
  return absl::OkStatus();
}

absl::Status Oracle(const GlobalOptions& g, const OracleOptions& o) {
  auto ex = LoadExperiment(g, o.scenario, o.norm);
  if (!ex.ok()) return ex.status();
  const Scenario& s = ex->scenario;
  nlohmann::json doc;
  doc["what"] = o.what;
  if (o.what == "opt") {
    auto best = BruteForceOpt(s, ex->realization, ex->mode, o.gamma);
    if (!best.ok()) return best.status();
    doc["gamma"] = o.gamma;
    doc["objective"] = best->objective;
    nlohmann::json matching = nlohmann::json::array();
    for (const auto& [e, t] : best->matching) {
      matching.push_back({{"donor", s.donor(s.edge(e).donor).id},
                          {"recipient", s.recipient(s.edge(e).recipient).id},
                          {"t", t}});
    }
    doc["matching"] = std::move(matching);
  } else if (o.what == "expectation") {
    auto spec = ParsePolicySpec(o.policy, ex->mode);
    if (!spec.ok()) return spec.status();
    auto prepared = PreparePolicy(s, *spec, ex->prepare);
    if (!prepared.ok()) return prepared.status();
    auto y = BruteForcePolicyExpectation(s, *prepared, std::nullopt);
    if (!y.ok()) return y.status();
    doc["policy"] = spec->ToString();
    nlohmann::json ys = nlohmann::json::object();
    for (int v = 0; v < s.num_recipients(); ++v) ys[s.recipient(v).id] = (*y)[v];
    doc["expected_recipient_weight"] = std::move(ys);
  } else if (o.what == "allocation") {
    auto alloc = FindProportionalAllocation(s, o.gamma);
    if (!alloc.ok()) return alloc.status();
    doc["gamma"] = o.gamma;
    if (alloc->has_value()) {
      nlohmann::json edges = nlohmann::json::array();
      for (int e : **alloc) {
        edges.push_back({s.donor(s.edge(e).donor).id,
                         s.recipient(s.edge(e).recipient).id});
      }
      doc["allocation"] = std::move(edges);
    } else {
      doc["allocation"] = nullptr;
    }
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown oracle query '", o.what, "' (expected opt|expectation|allocation)"));
  }
  if (auto st = EnsureDir(g.out_dir); !st.ok()) return st;
  const std::string path = OutPath(g, "oracle.json");
  if (auto st = WriteTextFile(path, doc.dump(1) + "\n"); !st.ok()) return st;
  std::cerr << "wrote " << path << "\n";
  return absl::OkStatus();
}

}  // namespace bdmatch::cli
