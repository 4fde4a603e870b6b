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

#include "trajshield/road_graph.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "trajshield/error.h"

namespace trajshield {

namespace {

template <typename Edges>
auto FindEdge(Edges& edges, CellId to) {
  return std::lower_bound(edges.begin(), edges.end(), to,
                          [](const Edge& e, CellId c) { return Index(e.to) < Index(c); });
}

}  // namespace

RoadGraph::RoadGraph(const GridMap& map)
    : map_(map), out_(map.num_cells()), in_(map.num_cells()) {}

RoadGraph RoadGraph::Grid4(const GridMap& map) {
  RoadGraph g(map);
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      const CellId here = map.CellAt(r, c);
      if (c + 1 < map.cols()) {
        g.AddEdge(here, map.CellAt(r, c + 1));
        g.AddEdge(map.CellAt(r, c + 1), here);
      }
      if (r + 1 < map.rows()) {
        g.AddEdge(here, map.CellAt(r + 1, c));
        g.AddEdge(map.CellAt(r + 1, c), here);
      }
    }
  }
  return g;
}

RoadGraph RoadGraph::Parse(std::istream& in, const GridMap& map) {
  RoadGraph g(map);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long from = 0;
    long to = 0;
    if (!(fields >> from)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorCode::kParseError,
                  "edge list line " + std::to_string(lineno) + ": bad 'from'");
    }
    if (!(fields >> to)) {
      throw Error(ErrorCode::kParseError,
                  "edge list line " + std::to_string(lineno) + ": missing 'to'");
    }
    std::optional<double> weight;
    double w = 0.0;
    if (fields >> w) weight = w;
    std::string rest;
    if (fields >> rest) {
      throw Error(ErrorCode::kParseError,
                  "edge list line " + std::to_string(lineno) + ": trailing fields");
    }
    try {
      g.AddEdge(Cell(static_cast<int>(from)), Cell(static_cast<int>(to)), weight);
    } catch (const Error& e) {
      throw Error(e.code(), "edge list line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return g;
}

RoadGraph RoadGraph::Load(const std::string& path, const GridMap& map) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open graph file " + path);
  return Parse(in, map);
}

void RoadGraph::CheckVertex(CellId c) const {
  if (!HasVertex(c)) {
    throw Error(ErrorCode::kUnknownVertex,
                "vertex " + std::to_string(Index(c)) + " not in graph");
  }
}

void RoadGraph::AddEdge(CellId from, CellId to, std::optional<double> weight_m) {
  CheckVertex(from);
  CheckVertex(to);
  if (from == to) {
    throw Error(ErrorCode::kInvalidArgument,
                "self-loop on vertex " + std::to_string(Index(from)));
  }
  const double w = weight_m.value_or(map_.Distance(from, to));
  if (!(w > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge weight must be positive");
  }
  auto& edges = out_[Index(from)];
  auto it = FindEdge(edges, to);
  if (it != edges.end() && it->to == to) {
    it->weight_m = w;
    return;
  }
  edges.insert(it, Edge{to, w});
  auto& rev = in_[Index(to)];
  rev.insert(std::lower_bound(rev.begin(), rev.end(), from,
                              [](CellId a, CellId b) { return Index(a) < Index(b); }),
             from);
  ++num_edges_;
}

std::vector<CellId> RoadGraph::AdjacentNodes(CellId i, NeighborMode mode) const {
  CheckVertex(i);
  std::vector<CellId> out;
  for (const Edge& e : out_[Index(i)]) out.push_back(e.to);
  if (mode == NeighborMode::kUnion) {
    const auto& rev = in_[Index(i)];
    std::vector<CellId> merged;
    std::set_union(out.begin(), out.end(), rev.begin(), rev.end(),
                   std::back_inserter(merged),
                   [](CellId a, CellId b) { return Index(a) < Index(b); });
    out = std::move(merged);
  }
  return out;
}

bool RoadGraph::HasEdge(CellId from, CellId to) const {
  if (!HasVertex(from) || !HasVertex(to)) return false;
  const auto& edges = out_[Index(from)];
  auto it = FindEdge(edges, to);
  return it != edges.end() && it->to == to;
}

double RoadGraph::EdgeWeight(CellId from, CellId to) const {
  CheckVertex(from);
  CheckVertex(to);
  const auto& edges = out_[Index(from)];
  auto it = FindEdge(edges, to);
  if (it == edges.end() || it->to != to) {
    throw Error(ErrorCode::kNoSuchEdge, "no edge " + std::to_string(Index(from)) +
                                            " -> " + std::to_string(Index(to)));
  }
  return it->weight_m;
}

const std::vector<Edge>& RoadGraph::OutEdges(CellId from) const {
  CheckVertex(from);
  return out_[Index(from)];
}

}  // namespace trajshield
