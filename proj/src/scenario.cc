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

#include "trajshield/scenario.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "trajshield/error.h"
#include "trajshield/mechanisms.h"

namespace trajshield {

namespace {

using nlohmann::json;

double Uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int UniformIndex(Rng& rng, int n) {
  return std::min(n - 1, static_cast<int>(Uniform01(rng) * n));
}

CellId DrawFrom(std::span<const double> probs, Rng& rng) {
  const double u = Uniform01(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    last_positive = static_cast<int>(i);
    if (u < cum) return Cell(static_cast<int>(i));
  }
  return Cell(last_positive);
}

}  // namespace

uint64_t DeriveSeed(uint64_t base, uint64_t index) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Trajectory> GenerateRandomWalks(const RoadGraph& graph,
                                            const WalkParams& params) {
  if (params.num_trajectories < 0 || params.length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "walks need a positive length");
  }
  if (params.stay_prob < 0.0 || params.stay_prob > 1.0 || params.momentum < 0.0 ||
      params.momentum > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "walk probabilities must lie in [0, 1]");
  }
  const GridMap& map = graph.map();
  Rng rng(params.seed);
  std::vector<Trajectory> out;
  out.reserve(params.num_trajectories);
  for (int k = 0; k < params.num_trajectories; ++k) {
    std::vector<CellId> cells;
    CellId cur = Cell(UniformIndex(rng, map.num_cells()));
    cells.push_back(cur);
    int drow = 0;
    int dcol = 0;
    for (int step = 1; step < params.length; ++step) {
      if (Uniform01(rng) < params.stay_prob) {
        cells.push_back(cur);
        continue;
      }
      const auto& edges = graph.OutEdges(cur);
      if (edges.empty()) {
        cells.push_back(cur);
        continue;
      }
      const GridCoord at = map.CoordOf(cur);
      CellId next = cur;
      bool moved = false;
      if ((drow != 0 || dcol != 0) && Uniform01(rng) < params.momentum) {
        const int r = at.row + drow;
        const int c = at.col + dcol;
        if (r >= 0 && r < map.rows() && c >= 0 && c < map.cols() &&
            graph.HasEdge(cur, map.CellAt(r, c))) {
          next = map.CellAt(r, c);
          moved = true;
        }
      }
      if (!moved) next = edges[UniformIndex(rng, static_cast<int>(edges.size()))].to;
      const GridCoord to = map.CoordOf(next);
      drow = to.row - at.row;
      dcol = to.col - at.col;
      cur = next;
      cells.push_back(cur);
    }
    out.push_back(Trajectory::FromCells("w" + std::to_string(k), cells));
  }
  return out;
}

std::vector<Trajectory> SampleMarkovTrajectories(const TransitionMatrix& m,
                                                 const ProbVector& start, int count,
                                                 int length, uint64_t seed) {
  if (start.size() != m.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "start distribution size differs");
  }
  if (count < 0 || length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need a positive trajectory length");
  }
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::vector<CellId> cells;
    CellId cur = DrawFrom(start.values(), rng);
    cells.push_back(cur);
    for (int step = 1; step < length; ++step) {
      cur = DrawFrom(m.Row(cur), rng);
      cells.push_back(cur);
    }
    out.push_back(Trajectory::FromCells("e" + std::to_string(k), cells));
  }
  return out;
}

ScenarioConfig ScenarioConfig::FromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    ScenarioConfig c;
    c.name = j.value("name", c.name);
    if (j.contains("map")) c.map = GridMap::FromJson(j.at("map").dump());
    if (j.contains("history")) {
      const json& h = j.at("history");
      c.history.num_trajectories =
          h.value("num_trajectories", c.history.num_trajectories);
      c.history.length = h.value("length", c.history.length);
      c.history.stay_prob = h.value("stay_prob", c.history.stay_prob);
      c.history.momentum = h.value("momentum", c.history.momentum);
      c.history.seed = h.value("seed", c.history.seed);
    }
    c.smoothing = j.value("smoothing", c.smoothing);
    if (j.contains("sensitive")) {
      for (const json& s : j.at("sensitive")) {
        SensitiveLocation loc;
        loc.cell = Cell(s.at(0).get<int>());
        loc.semantic_class = s.size() > 1 ? s.at(1).get<int>() : 4;
        c.sensitive.push_back(loc);
      }
    }
    c.sensitive_top_visited = j.value("sensitive_top_visited", 0);
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      c.budget_options.weights.alpha = w.value("alpha", c.budget_options.weights.alpha);
      c.budget_options.weights.beta = w.value("beta", c.budget_options.weights.beta);
      c.budget_options.weights.gamma = w.value("gamma", c.budget_options.weights.gamma);
    }
    const std::string mode = j.value("neighbor_mode", std::string("out"));
    if (mode == "out") {
      c.budget_options.neighbor_mode = NeighborMode::kOut;
    } else if (mode == "union") {
      c.budget_options.neighbor_mode = NeighborMode::kUnion;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown neighbor_mode '" + mode + "'");
    }
    c.budget_options.cap_adjacent_at_sensitive =
        j.value("cap_adjacent_at_sensitive", false);
    c.budget_options.epsilon_default =
        j.value("epsilon_default", c.budget_options.epsilon_default);
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      c.eval_trajectories = e.value("trajectories", c.eval_trajectories);
      c.eval_length = e.value("length", c.eval_length);
      c.eval_seed = e.value("seed", c.eval_seed);
    }
    if (j.contains("pipeline")) {
      const json& p = j.at("pipeline");
      c.pipeline.delta = p.value("delta", c.pipeline.delta);
      c.pipeline.e_m = p.value("e_m", c.pipeline.e_m);
      c.pipeline.em_decay = p.value("em_decay", c.pipeline.em_decay);
      c.pipeline.em_max_adjustments =
          p.value("em_max_adjustments", c.pipeline.em_max_adjustments);
      c.pipeline.mechanism = ParseMechanism(p.value("mechanism", std::string("pf")));
      c.pipeline.on_infeasible =
          ParseInfeasiblePolicy(p.value("on_infeasible", std::string("fail")));
    }
    const std::string defender = j.value("defender_model", std::string("learned"));
    if (defender == "learned") {
      c.defender = DefenderModel::kLearned;
    } else if (defender == "uniform") {
      c.defender = DefenderModel::kUniform;
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown defender_model '" + defender + "'");
    }
    c.pipeline.Validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("scenario config: ") + e.what());
  }
}

ScenarioConfig ScenarioConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string ScenarioConfig::ToJson() const {
  json sens = json::array();
  for (const auto& s : sensitive) sens.push_back({Index(s.cell), s.semantic_class});
  json j = {
      {"name", name},
      {"map", json::parse(map.ToJson())},
      {"history",
       {{"num_trajectories", history.num_trajectories},
        {"length", history.length},
        {"stay_prob", history.stay_prob},
        {"momentum", history.momentum},
        {"seed", history.seed}}},
      {"smoothing", smoothing},
      {"sensitive", sens},
      {"sensitive_top_visited", sensitive_top_visited},
      {"weights",
       {{"alpha", budget_options.weights.alpha},
        {"beta", budget_options.weights.beta},
        {"gamma", budget_options.weights.gamma}}},
      {"neighbor_mode",
       budget_options.neighbor_mode == NeighborMode::kOut ? "out" : "union"},
      {"cap_adjacent_at_sensitive", budget_options.cap_adjacent_at_sensitive},
      {"epsilon_default", budget_options.epsilon_default},
      {"eval",
       {{"trajectories", eval_trajectories},
        {"length", eval_length},
        {"seed", eval_seed}}},
      {"pipeline",
       {{"delta", pipeline.delta},
        {"e_m", pipeline.e_m},
        {"em_decay", pipeline.em_decay},
        {"em_max_adjustments", pipeline.em_max_adjustments},
        {"mechanism", std::string(MechanismName(pipeline.mechanism))},
        {"on_infeasible", std::string(InfeasiblePolicyName(pipeline.on_infeasible))}}},
      {"defender_model", defender == DefenderModel::kLearned ? "learned" : "uniform"}};
  return j.dump();
}

BudgetAllocation Scenario::Budgets(double epsilon_s) const {
  return AllocateBudgets(history, graph, sensitive, epsilon_s, config.budget_options);
}

Scenario BuildScenario(const ScenarioConfig& config) {
  config.pipeline.Validate();
  RoadGraph graph = RoadGraph::Grid4(config.map);
  std::vector<Trajectory> history = GenerateRandomWalks(graph, config.history);
  TransitionMatrix learned =
      TransitionMatrix::Build(history, config.map, config.smoothing);
  TransitionMatrix defender = config.defender == DefenderModel::kLearned
                                  ? learned
                                  : TransitionMatrix::Uniform(config.map.num_cells());

  std::vector<SensitiveLocation> sensitive = config.sensitive;
  if (config.sensitive_top_visited > 0) {
    std::vector<int64_t> visits(config.map.num_cells(), 0);
    for (const auto& t : history) {
      for (const auto& s : t.steps) ++visits[Index(s.cell)];
    }
    std::vector<int> order(visits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return visits[a] > visits[b]; });
    int added = 0;
    for (int i : order) {
      if (added >= config.sensitive_top_visited) break;
      const bool dup = std::any_of(sensitive.begin(), sensitive.end(),
                                   [&](const auto& s) { return Index(s.cell) == i; });
      if (dup) continue;
      sensitive.push_back({Cell(i), 4});
      ++added;
    }
  }

  std::vector<Trajectory> eval = SampleMarkovTrajectories(
      learned, ProbVector::Uniform(config.map.num_cells()), config.eval_trajectories,
      config.eval_length, config.eval_seed);
  return Scenario{config,
                  std::move(graph),
                  std::move(history),
                  std::move(learned),
                  std::move(defender),
                  std::move(sensitive),
                  std::move(eval)};
}

}  // namespace trajshield
