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

#include "trajshield/budget.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

double StayDuration(CellId cell, std::span<const Trajectory> trajectories,
                    TimeWindow window) {
  if (window.t2 <= window.t1) {
    throw Error(ErrorCode::kEmptyWindow, "stay window needs t2 > t1");
  }
  if (trajectories.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no trajectories");
  }
  int64_t occupied = 0;
  for (const auto& tr : trajectories) {
    for (const auto& s : tr.steps) {
      if (s.t >= window.t1 && s.t < window.t2 && s.cell == cell) ++occupied;
    }
  }
  const double span = static_cast<double>(window.t2 - window.t1) *
                      static_cast<double>(trajectories.size());
  return static_cast<double>(occupied) / span;
}

double AccessFrequency(CellId cell, std::span<const Trajectory> trajectories) {
  int64_t visits = 0;
  int64_t total = 0;
  for (const auto& tr : trajectories) {
    for (const auto& s : tr.steps) {
      ++total;
      if (s.cell == cell) ++visits;
    }
  }
  if (total == 0) throw Error(ErrorCode::kEmptyInput, "no visits recorded");
  return static_cast<double>(visits) / static_cast<double>(total);
}

double Sensitivity(double stay_duration, double access_frequency, int semantic_class,
                   const SensitivityWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 ||
      (w.alpha == 0 && w.beta == 0 && w.gamma == 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sensitivity weights must be >= 0 and not all zero");
  }
  if (semantic_class < 1 || semantic_class > 4) {
    throw Error(ErrorCode::kInvalidArgument, "semantic class must be in 1..4");
  }
  if (stay_duration < 0 || stay_duration > 1 || access_frequency < 0 ||
      access_frequency > 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "stay duration and access frequency must lie in [0, 1]");
  }
  return w.alpha * stay_duration + w.beta * access_frequency + w.gamma * semantic_class;
}

std::map<CellId, double> AllocateSensitive(const std::map<CellId, double>& sensitivities,
                                           double epsilon_s) {
  if (!(epsilon_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_s must be positive");
  }
  if (sensitivities.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no sensitive locations");
  }
  double inv_sum = 0.0;
  for (const auto& [cell, s] : sensitivities) {
    if (!(s > 0.0)) {
      throw Error(ErrorCode::kNonpositiveSensitivity,
                  "cell " + std::to_string(Index(cell)) + " has sensitivity " +
                      std::to_string(s));
    }
    inv_sum += 1.0 / s;
  }
  std::map<CellId, double> out;
  for (const auto& [cell, s] : sensitivities) {
    out[cell] = (1.0 / s) / inv_sum * epsilon_s;
  }
  return out;
}

std::map<CellId, double> AllocateAdjacent(
    double eps_sensitive, const std::map<CellId, double>& neighbor_distances_m) {
  if (neighbor_distances_m.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no neighbors to allocate");
  }
  double inv_sum = 0.0;
  for (const auto& [cell, d] : neighbor_distances_m) {
    if (!(d > 0.0)) {
      throw Error(ErrorCode::kZeroDistance, "neighbor " + std::to_string(Index(cell)) +
                                                " coincides with the sensitive cell");
    }
    inv_sum += 1.0 / d;
  }
  std::map<CellId, double> out;
  for (const auto& [cell, d] : neighbor_distances_m) {
    out[cell] = inv_sum / (1.0 / d) * eps_sensitive;
  }
  return out;
}

std::map<CellId, double> AllocateAdjacent(CellId sensitive_cell, double eps_sensitive,
                                          std::span<const CellId> neighbors,
                                          const GridMap& map) {
  std::map<CellId, double> distances;
  for (CellId j : neighbors) {
    map.CheckCell(j);
    distances[j] = map.Distance(sensitive_cell, j);
  }
  return AllocateAdjacent(eps_sensitive, distances);
}

double BudgetAllocation::BudgetFor(CellId c) const {
  auto it = resolved.find(c);
  return it == resolved.end() ? epsilon_default : it->second;
}

BudgetAllocation AllocateBudgets(std::span<const Trajectory> history,
                                 const RoadGraph& graph,
                                 std::span<const SensitiveLocation> sensitive,
                                 double epsilon_s, const BudgetOptions& options) {
  if (sensitive.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no sensitive locations");
  }
  if (!(options.epsilon_default > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_default must be positive");
  }
  TimeWindow window;
  if (options.window) {
    window = *options.window;
  } else {
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (const auto& tr : history) {
      for (const auto& s : tr.steps) {
        lo = std::min(lo, s.t);
        hi = std::max(hi, s.t);
      }
    }
    if (lo > hi) throw Error(ErrorCode::kEmptyInput, "empty trajectory history");
    window = {lo, hi + 1};
  }

  BudgetAllocation out;
  out.epsilon_s = epsilon_s;
  out.epsilon_default = options.epsilon_default;

  std::map<CellId, double> scores;
  for (const auto& loc : sensitive) {
    if (!graph.HasVertex(loc.cell)) {
      throw Error(ErrorCode::kUnknownVertex,
                  "sensitive cell " + std::to_string(Index(loc.cell)) + " not in graph");
    }
    SensitivityProfile p;
    p.cell = loc.cell;
    p.stay_duration = StayDuration(loc.cell, history, window);
    p.access_frequency = AccessFrequency(loc.cell, history);
    p.semantic_class = loc.semantic_class;
    p.sensitivity = Sensitivity(p.stay_duration, p.access_frequency, p.semantic_class,
                                options.weights);
    scores[loc.cell] = p.sensitivity;
    out.profiles.push_back(p);
  }
  out.sensitive = AllocateSensitive(scores, epsilon_s);

  const GridMap& map = graph.map();
  for (const auto& [cell, eps_i] : out.sensitive) {
    const auto neighbors = graph.AdjacentNodes(cell, options.neighbor_mode);
    if (neighbors.empty()) continue;
    const auto budgets = AllocateAdjacent(cell, eps_i, neighbors, map);
    for (auto [j, eps_j] : budgets) {
      ++out.pair_evaluations;
      if (options.cap_adjacent_at_sensitive) eps_j = std::min(eps_j, eps_i);
      auto [it, inserted] = out.adjacent.emplace(j, eps_j);
      if (!inserted) it->second = std::min(it->second, eps_j);
    }
  }

  out.resolved = out.sensitive;
  for (const auto& [j, eps_j] : out.adjacent) {
    auto [it, inserted] = out.resolved.emplace(j, eps_j);
    if (!inserted) it->second = std::min(it->second, eps_j);
  }
  return out;
}

namespace {

nlohmann::json BudgetMapToJson(const std::map<CellId, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [c, v] : m) j[std::to_string(Index(c))] = v;
  return j;
}

std::map<CellId, double> BudgetMapFromJson(const nlohmann::json& j) {
  std::map<CellId, double> out;
  for (const auto& [k, v] : j.items()) out[Cell(std::stoi(k))] = v.get<double>();
  return out;
}

}  // namespace

std::string BudgetAllocation::ToJson() const {
  nlohmann::json profiles_json = nlohmann::json::array();
  for (const auto& p : profiles) {
    profiles_json.push_back({{"cell", Index(p.cell)},
                             {"stay_duration", p.stay_duration},
                             {"access_frequency", p.access_frequency},
                             {"semantic_class", p.semantic_class},
                             {"sensitivity", p.sensitivity}});
  }
  nlohmann::json j = {{"epsilon_s", epsilon_s},
                      {"epsilon_default", epsilon_default},
                      {"profiles", profiles_json},
                      {"sensitive", BudgetMapToJson(sensitive)},
                      {"adjacent", BudgetMapToJson(adjacent)},
                      {"resolved", BudgetMapToJson(resolved)}};
  return j.dump(2);
}

BudgetAllocation BudgetAllocation::FromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BudgetAllocation out;
    out.epsilon_s = j.at("epsilon_s").get<double>();
    out.epsilon_default = j.value("epsilon_default", 1.0);
    for (const auto& p : j.value("profiles", nlohmann::json::array())) {
      out.profiles.push_back(
          {Cell(p.at("cell").get<int>()), p.at("stay_duration").get<double>(),
           p.at("access_frequency").get<double>(), p.at("semantic_class").get<int>(),
           p.at("sensitivity").get<double>()});
    }
    out.sensitive = BudgetMapFromJson(j.at("sensitive"));
    out.adjacent = BudgetMapFromJson(j.at("adjacent"));
    out.resolved = BudgetMapFromJson(j.at("resolved"));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("budget JSON: ") + e.what());
  }
}

std::vector<SensitiveLocation> LoadSensitiveLocations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open sensitive-location file " + path);
  std::vector<SensitiveLocation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long cell = 0;
    if (!(fields >> cell)) {
      if (lineno == 1) continue;  // header
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(lineno) + ": bad cell index");
    }
    int cls = 4;
    if (!(fields >> cls)) cls = 4;
    out.push_back({Cell(static_cast<int>(cell)), cls});
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyInput, path + ": no sensitive cells");
  return out;
}

}  // namespace trajshield
