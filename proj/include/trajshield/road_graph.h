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

#ifndef TRAJSHIELD_ROAD_GRAPH_H_
#define TRAJSHIELD_ROAD_GRAPH_H_

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "trajshield/grid_map.h"

namespace trajshield {

// Which neighbors count as "adjacent" to a vertex.
enum class NeighborMode { kOut, kUnion };

struct Edge {
  CellId to;
  double weight_m;
};

// Weighted directed road graph over the cells of a map. Every map cell is a
// vertex; i->j and j->i are distinct edges. Stored as sorted adjacency lists.
class RoadGraph {
 public:
  explicit RoadGraph(const GridMap& map);

  // Bidirectional edges between 4-adjacent cells, weighted by center distance.
  static RoadGraph Grid4(const GridMap& map);
  // Edge list: one `from to [weight_m]` per line; `#` starts a comment.
  static RoadGraph Parse(std::istream& in, const GridMap& map);
  static RoadGraph Load(const std::string& path, const GridMap& map);

  // Adds or replaces the edge. Weight defaults to the map distance.
  void AddEdge(CellId from, CellId to, std::optional<double> weight_m = {});

  bool HasVertex(CellId c) const { return map_.Contains(c); }
  int num_vertices() const { return map_.num_cells(); }
  int num_edges() const { return num_edges_; }

  // B_i: sorted out-neighbors (or out- and in-neighbors for kUnion).
  std::vector<CellId> AdjacentNodes(CellId i,
                                    NeighborMode mode = NeighborMode::kOut) const;
  double EdgeWeight(CellId from, CellId to) const;
  bool HasEdge(CellId from, CellId to) const;
  const std::vector<Edge>& OutEdges(CellId from) const;

  const GridMap& map() const { return map_; }

 private:
  void CheckVertex(CellId c) const;

  GridMap map_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<CellId>> in_;
  int num_edges_ = 0;
};

}  // namespace trajshield

#endif  // TRAJSHIELD_ROAD_GRAPH_H_
