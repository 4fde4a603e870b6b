// Copyright 2026 The Trajshield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "trajshield/budget.h"
#include "trajshield/error.h"
#include "trajshield/grid_map.h"
#include "trajshield/ingest.h"
#include "trajshield/metrics.h"
#include "trajshield/mobility.h"
#include "trajshield/pipeline.h"
#include "trajshield/road_graph.h"
#include "trajshield/scenario.h"
#include "trajshield/version.h"

namespace trajshield::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string ReadFile(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + what + " " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream OpenOut(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

std::string WithSuffix(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

std::string CsvBanner(const std::string& hash) {
  return "# trajshield " + std::string(kVersion) + " config_hash=" + hash + "\n";
}

int Fail(const Error& e) {
  std::cerr << "trajshield: " << e.what() << "\n";
  return e.code() == ErrorCode::kInfeasible ? kExitInfeasible : kExitInput;
}

}  // namespace

int RunIngest(const IngestOptions& opts) {
  const std::string report_path =
      opts.report.empty() ? WithSuffix(opts.out, ".report.json") : opts.report;
  try {
    const GpsFormat format = ParseGpsFormat(opts.format);
    const std::string map_text = ReadFile(opts.map_config, "map config");
    const GridMap map = GridMap::FromJson(map_text);
    const std::string input = ReadFile(opts.input, "input");
    const std::string hash =
        HashHex(Fnv1a64(opts.format + "\n" + map_text, Fnv1a64(input)));

    json report = {{"trajshield_version", kVersion},
                   {"config_hash", hash},
                   {"input", opts.input},
                   {"format", opts.format}};
    std::istringstream in(input);
    const ParseReport parsed =
        ParseGpsLines(in, format, fs::path(opts.input).stem().string());
    const json parse_json = json::parse(parsed.ToJson());
    for (auto it = parse_json.begin(); it != parse_json.end(); ++it)
      report[it.key()] = *it;
    if (parsed.records.empty()) {
      const Error err(ErrorCode::kEmptyInput,
                      "no valid GPS records in " + opts.input + " (" +
                          std::to_string(parsed.errors.size()) + " malformed lines)");
      report["error"] = err.what();
      auto out = OpenOut(report_path);
      out << report.dump(2) << "\n";
      throw err;
    }

    DiscretizeStats stats;
    std::vector<Trajectory> trajs;
    std::string discretize_error;
    try {
      trajs = DiscretizeById(parsed.records, map, &stats);
    } catch (const Error& e) {
      discretize_error = e.what();
    }
    report["fixes_out_of_bounds"] = stats.out_of_bounds;
    report["bins"] = stats.bins;
    report["carried_bins"] = stats.carried_bins;
    report["trajectories"] = trajs.size();
    if (!discretize_error.empty()) report["error"] = discretize_error;
    {
      auto out = OpenOut(report_path);
      out << report.dump(2) << "\n";
    }
    if (!discretize_error.empty()) {
      throw Error(ErrorCode::kNoInBoundsFixes, discretize_error);
    }
    auto out = OpenOut(opts.out);
    out << CsvBanner(hash);
    if (trajs.size() == 1) {
      WriteNormalizedCsv(out, trajs.front());
    } else {
      WriteTrajectoriesCsv(out, trajs);
    }
    std::cerr << "ingested " << parsed.records.size() << " records ("
              << parsed.errors.size() << " malformed lines) into " << trajs.size()
              << " trajectories\n";
    return kExitOk;
  } catch (const Error& e) {
    return Fail(e);
  }
}

int RunRelease(const RunOptions& opts) {
  try {
    const std::string map_text = ReadFile(opts.map_config, "map config");
    const GridMap map = GridMap::FromJson(map_text);
    const std::string traj_text = ReadFile(opts.trajectory, "trajectory file");
    const std::string history_path =
        opts.history.empty() ? opts.trajectory : opts.history;
    const std::string history_text = ReadFile(history_path, "history file");
    std::string graph_text;
    std::string sensitive_text;
    RoadGraph graph = RoadGraph::Grid4(map);
    if (!opts.graph.empty()) {
      graph_text = ReadFile(opts.graph, "graph file");
      std::istringstream in(graph_text);
      graph = RoadGraph::Parse(in, map);
    }
    std::vector<SensitiveLocation> sensitive;
    if (!opts.sensitive.empty()) {
      sensitive_text = ReadFile(opts.sensitive, "sensitive file");
      sensitive = LoadSensitiveLocations(opts.sensitive);
    }
    std::istringstream traj_in(traj_text);
    const std::vector<Trajectory> trajs = ReadTrajectoriesCsv(traj_in);
    std::istringstream hist_in(history_text);
    const std::vector<Trajectory> history = ReadTrajectoriesCsv(hist_in);
    if (trajs.empty())
      throw Error(ErrorCode::kEmptyInput, "no trajectory in " + opts.trajectory);
    const Trajectory* traj = &trajs.front();
    if (!opts.user.empty()) {
      traj = nullptr;
      for (const auto& t : trajs) {
        if (t.user_id == opts.user) traj = &t;
      }
      if (!traj)
        throw Error(ErrorCode::kInvalidArgument, "no trajectory for user " + opts.user);
    }
    for (const auto& s : traj->steps) map.CheckCell(s.cell);

    PipelineConfig cfg;
    cfg.delta = opts.delta;
    cfg.e_m = opts.e_m;
    cfg.mechanism = ParseMechanism(opts.mechanism);
    cfg.on_infeasible = ParseInfeasiblePolicy(opts.on_infeasible);
    cfg.Validate();
    BudgetOptions budget_options;
    budget_options.epsilon_default = opts.epsilon_default;
    const TransitionMatrix m = TransitionMatrix::Build(history, map, opts.smoothing);
    BudgetAllocation budgets;
    if (sensitive.empty()) {
      budgets.epsilon_s = opts.epsilon_s;
      budgets.epsilon_default = opts.epsilon_default;
    } else {
      budgets =
          AllocateBudgets(history, graph, sensitive, opts.epsilon_s, budget_options);
    }

    const json params = {
        {"epsilon_s", opts.epsilon_s},
        {"epsilon_default", opts.epsilon_default},
        {"e_m", opts.e_m},
        {"delta", opts.delta},
        {"smoothing", opts.smoothing},
        {"mechanism", std::string(MechanismName(cfg.mechanism))},
        {"on_infeasible", std::string(InfeasiblePolicyName(cfg.on_infeasible))},
        {"seed", opts.seed},
        {"user", traj->user_id}};
    uint64_t h = Fnv1a64(params.dump());
    for (const std::string& s :
         {map_text, traj_text, history_text, graph_text, sensitive_text}) {
      h = Fnv1a64(s, h);
    }
    const std::string hash = HashHex(h);

    const PipelineModel model{&map, &m, &budgets};
    const PipelineResult run = RunPipeline(*traj, cfg, model, opts.seed);
    const auto evals = EvaluateRun(run, m, InitialPosterior(cfg, map), map);

    auto out = OpenOut(opts.out);
    out << json({{"trajshield_version", kVersion},
                 {"config_hash", hash},
                 {"kind", "release_records"},
                 {"params", params}})
               .dump()
        << "\n";
    for (const auto& r : run.records) out << r.ToJsonLine() << "\n";

    double total = 0.0;
    json per_step = json::array();
    json metrics = json::array();
    double sums[7] = {0, 0, 0, 0, 0, 0, 0};
    for (size_t i = 0; i < run.records.size(); ++i) {
      const auto& r = run.records[i];
      const auto& e = evals[i];
      total += r.privacy_cost();
      per_step.push_back(
          {{"t", r.t}, {"epsilon", r.epsilon_used}, {"cost", r.privacy_cost()}});
      metrics.push_back({{"t", e.t},
                         {"p_optimal", e.p_optimal},
                         {"p_bayesian", e.p_bayesian},
                         {"q", e.q},
                         {"success_optimal", e.optimal.success},
                         {"success_bayesian", e.bayesian.success},
                         {"error_optimal_m", e.optimal.error_m},
                         {"error_bayesian_m", e.bayesian.error_m}});
      const double v[7] = {e.p_optimal,       e.p_bayesian,       e.q,
                           e.optimal.success, e.bayesian.success, e.optimal.error_m,
                           e.bayesian.error_m};
      for (int k = 0; k < 7; ++k) sums[k] += v[k];
    }
    const double n = static_cast<double>(run.records.size());
    json summary = {{"trajshield_version", kVersion},
                    {"config_hash", hash},
                    {"steps", run.records.size()},
                    {"mechanism", std::string(MechanismName(cfg.mechanism))},
                    {"pls_stage", cfg.mechanism != MechanismTag::kUniform},
                    {"total_privacy_cost", total},
                    {"per_step_cost", per_step},
                    {"means",
                     {{"p_optimal", sums[0] / n},
                      {"p_bayesian", sums[1] / n},
                      {"q", sums[2] / n},
                      {"success_optimal", sums[3] / n},
                      {"success_bayesian", sums[4] / n},
                      {"error_optimal_m", sums[5] / n},
                      {"error_bayesian_m", sums[6] / n}}},
                    {"per_step_metrics", metrics}};
    if (cfg.mechanism == MechanismTag::kUniform) {
      summary["note"] =
          "uniform baseline over the delta-location set; no protection-set stage";
    }
    auto sum_out = OpenOut(opts.summary.empty() ? WithSuffix(opts.out, ".summary.json")
                                                : opts.summary);
    sum_out << summary.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return Fail(e);
  }
}

int RunSweepCommand(const SweepOptions& opts) {
  try {
    const std::string text = ReadFile(opts.config, "sweep config");
    json cfg;
    try {
      cfg = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, std::string("sweep config: ") + e.what());
    }
    if (!cfg.contains("scenario") || !cfg.contains("sweep")) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sweep config needs 'scenario' and 'sweep'");
    }
    std::string scenario_text;
    if (cfg["scenario"].is_string()) {
      fs::path p = cfg["scenario"].get<std::string>();
      if (p.is_relative()) p = fs::path(opts.config).parent_path() / p;
      scenario_text = ReadFile(p.string(), "scenario config");
    } else {
      scenario_text = cfg["scenario"].dump();
    }
    const ScenarioConfig sc = ScenarioConfig::FromJson(scenario_text);
    const SweepSpec spec = SweepSpec::FromJson(cfg["sweep"].dump());
    const std::string hash = HashHex(Fnv1a64(spec.ToJson(), Fnv1a64(sc.ToJson())));

    const Scenario scenario = BuildScenario(sc);
    const std::vector<SweepRow> rows = RunSweep(scenario, spec, opts.parallel);

    json failed = json::array();
    for (const auto& r : rows) {
      if (r.status != "ok") {
        std::cerr << "sweep point eps_s=" << r.epsilon_s << " e_m=" << r.e_m
                  << " delta=" << r.delta << " seed=" << r.seed << ": " << r.status
                  << "\n";
        failed.push_back({{"epsilon_s", r.epsilon_s},
                          {"e_m", r.e_m},
                          {"delta", r.delta},
                          {"seed", r.seed},
                          {"status", r.status}});
      }
    }
    const std::string csv_name = sc.name + "_sweep.csv";
    {
      auto out = OpenOut((fs::path(opts.out_dir) / csv_name).string());
      out << CsvBanner(hash);
      WriteSweepCsv(out, rows);
    }
    json manifest = {{"trajshield_version", kVersion},
                     {"config_hash", hash},
                     {"scenario", json::parse(sc.ToJson())},
                     {"sweep", json::parse(spec.ToJson())},
                     {"seeds", spec.seeds},
                     {"csv", csv_name},
                     {"rows", rows.size()},
                     {"failed_points", failed}};
    auto out = OpenOut((fs::path(opts.out_dir) / "manifest.json").string());
    out << manifest.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return Fail(e);
  }
}

int RunGen(const GenOptions& opts) {
  try {
    const GridMap map(opts.rows, opts.cols, opts.cell_size_m);
    WalkParams params;
    params.num_trajectories = opts.num_trajectories;
    params.length = opts.length;
    params.momentum = opts.momentum;
    params.stay_prob = opts.stay_prob;
    params.seed = opts.seed;
    const std::vector<Trajectory> trajs =
        GenerateRandomWalks(RoadGraph::Grid4(map), params);
    const json params_json = {{"rows", opts.rows},
                              {"cols", opts.cols},
                              {"cell_size_m", opts.cell_size_m},
                              {"num_trajectories", opts.num_trajectories},
                              {"length", opts.length},
                              {"momentum", opts.momentum},
                              {"stay_prob", opts.stay_prob},
                              {"seed", opts.seed}};
    const std::string hash = HashHex(Fnv1a64(params_json.dump()));
    auto out = OpenOut(opts.out);
    out << CsvBanner(hash);
    WriteTrajectoriesCsv(out, trajs);
    if (!opts.map_out.empty()) {
      auto m = OpenOut(opts.map_out);
      m << json::parse(map.ToJson()).dump(2) << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return Fail(e);
  }
}

}  // namespace trajshield::cli
