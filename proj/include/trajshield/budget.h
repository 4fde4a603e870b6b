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

// Personalized privacy budget allocation.
//
// Each sensitive location gets a sensitivity score
//   S = alpha * L + beta * F + gamma * C
// from its stay duration L, access frequency F and semantic class C. The
// total budget epsilon_s is split in inverse proportion to S. Each road-graph
// neighbor j of a sensitive cell i then receives
//   eps'_j = d(i, j) * (sum_k 1 / d(i, k)) * eps_i,
// and a cell that ends up with several budgets keeps the smallest one.

#ifndef TRAJSHIELD_BUDGET_H_
#define TRAJSHIELD_BUDGET_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajshield/grid_map.h"
#include "trajshield/mobility.h"
#include "trajshield/road_graph.h"

namespace trajshield {

struct SensitivityWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

// Half-open range of timesteps [t1, t2).
struct TimeWindow {
  int t1 = 0;
  int t2 = 0;
};

struct SensitiveLocation {
  CellId cell{};
  int semantic_class = 1;  // 1 (e.g. a park) .. 4 (e.g. a hospital)
};

struct SensitivityProfile {
  CellId cell{};
  double stay_duration = 0.0;
  double access_frequency = 0.0;
  int semantic_class = 1;
  double sensitivity = 0.0;
};

// Fraction of the window's timesteps at which the user occupies `cell`,
// averaged over the given trajectories.
double StayDuration(CellId cell, std::span<const Trajectory> trajectories,
                    TimeWindow window);

// Visits to `cell` over all visits, one visit per trajectory step.
double AccessFrequency(CellId cell, std::span<const Trajectory> trajectories);

double Sensitivity(double stay_duration, double access_frequency, int semantic_class,
                   const SensitivityWeights& weights);

// eps_i = (1 / S_i) / (sum_k 1 / S_k) * epsilon_s.
std::map<CellId, double> AllocateSensitive(const std::map<CellId, double>& sensitivities,
                                           double epsilon_s);

// Budgets for the neighbors of one sensitive cell at the given distances.
std::map<CellId, double> AllocateAdjacent(
    double eps_sensitive, const std::map<CellId, double>& neighbor_distances_m);
std::map<CellId, double> AllocateAdjacent(CellId sensitive_cell, double eps_sensitive,
                                          std::span<const CellId> neighbors,
                                          const GridMap& map);

struct BudgetOptions {
  SensitivityWeights weights;
  NeighborMode neighbor_mode = NeighborMode::kOut;
  // Clamp eps'_j to at most eps_i.
  bool cap_adjacent_at_sensitive = false;
  // Defaults to the span of the trajectory history.
  std::optional<TimeWindow> window;
  // Budget for cells that are neither sensitive nor adjacent.
  double epsilon_default = 1.0;
};

struct BudgetAllocation {
  double epsilon_s = 0.0;
  double epsilon_default = 1.0;
  std::vector<SensitivityProfile> profiles;
  std::map<CellId, double> sensitive;
  std::map<CellId, double> adjacent;
  std::map<CellId, double> resolved;
  // Number of (sensitive, neighbor) pairs evaluated.
  int64_t pair_evaluations = 0;

  // Resolved budget, or epsilon_default for unbudgeted cells.
  double BudgetFor(CellId c) const;

  std::string ToJson() const;
  static BudgetAllocation FromJson(const std::string& text);
};

BudgetAllocation AllocateBudgets(std::span<const Trajectory> history,
                                 const RoadGraph& graph,
                                 std::span<const SensitiveLocation> sensitive,
                                 double epsilon_s, const BudgetOptions& options = {});

// Reads `cell_index[,semantic_class]` lines; class defaults to 4.
std::vector<SensitiveLocation> LoadSensitiveLocations(const std::string& path);

}  // namespace trajshield

#endif  // TRAJSHIELD_BUDGET_H_
