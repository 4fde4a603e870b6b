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

// Synthetic experiment worlds: a grid, a road graph, a mobility history
// drawn from biased random walks, the transition matrix learned from it,
// sensitive cells, and evaluation trajectories sampled from that matrix.

#ifndef TRAJSHIELD_SCENARIO_H_
#define TRAJSHIELD_SCENARIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "trajshield/budget.h"
#include "trajshield/grid_map.h"
#include "trajshield/mobility.h"
#include "trajshield/pipeline.h"
#include "trajshield/road_graph.h"

namespace trajshield {

struct WalkParams {
  int num_trajectories = 200;
  int length = 40;
  // Probability of staying in place for one step.
  double stay_prob = 0.1;
  // Probability of repeating the previous move when the edge exists.
  double momentum = 0.7;
  uint64_t seed = 1;
};

// Random walks on the road graph; starts are uniform over the map.
std::vector<Trajectory> GenerateRandomWalks(const RoadGraph& graph,
                                            const WalkParams& params);

// Markov chain samples from `m` with starts drawn from `start`.
std::vector<Trajectory> SampleMarkovTrajectories(const TransitionMatrix& m,
                                                 const ProbVector& start, int count,
                                                 int length, uint64_t seed);

// Counter-based seed derivation (splitmix64 of base and index).
uint64_t DeriveSeed(uint64_t base, uint64_t index);

enum class DefenderModel {
  kLearned,
  // Defender propagates with a uniform matrix; the attacker still uses the
  // learned one.
  kUniform,
};

struct ScenarioConfig {
  std::string name = "synthetic";
  GridMap map{16, 16, kDefaultCellSizeM};
  WalkParams history;
  double smoothing = 0.0;
  std::vector<SensitiveLocation> sensitive;
  // Adds this many of the most visited history cells as class-4 sensitive
  // cells.
  int sensitive_top_visited = 0;
  BudgetOptions budget_options;
  int eval_trajectories = 20;
  int eval_length = 8;
  uint64_t eval_seed = 2;
  PipelineConfig pipeline;
  DefenderModel defender = DefenderModel::kLearned;

  // Throws InvalidArgument / ParseError.
  static ScenarioConfig FromJson(const std::string& text);
  static ScenarioConfig Load(const std::string& path);
  std::string ToJson() const;
};

struct Scenario {
  ScenarioConfig config;
  RoadGraph graph;
  std::vector<Trajectory> history;
  TransitionMatrix learned_m;
  TransitionMatrix defender_m;
  std::vector<SensitiveLocation> sensitive;
  std::vector<Trajectory> eval;

  const GridMap& map() const { return config.map; }
  BudgetAllocation Budgets(double epsilon_s) const;
};

Scenario BuildScenario(const ScenarioConfig& config);

}  // namespace trajshield

#endif  // TRAJSHIELD_SCENARIO_H_
