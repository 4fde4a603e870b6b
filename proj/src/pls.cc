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

#include "trajshield/pls.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

bool ProtectionLocationSet::Contains(CellId c) const {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

std::string ProtectionLocationSet::ToJson() const {
  nlohmann::json ids = nlohmann::json::array();
  for (CellId c : cells) ids.push_back(Index(c));
  nlohmann::json j = {{"anchor", Index(anchor)},
                      {"cells", ids},
                      {"diameter_m", diameter_m},
                      {"e_value", e_value},
                      {"rotation", static_cast<int>(rotation)}};
  return j.dump();
}

double SetDiameter(std::span<const CellId> cells, const GridMap& map) {
  double best = 0.0;
  for (size_t i = 0; i < cells.size(); ++i) {
    for (size_t k = i + 1; k < cells.size(); ++k) {
      best = std::max(best, map.Distance(cells[i], cells[k]));
    }
  }
  return best;
}

double ConditionalError(std::span<const CellId> cells, const ProbVector& prior,
                        const GridMap& map) {
  if (prior.size() != map.num_cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "prior size differs from map");
  }
  ConditionalErrorAccumulator acc(prior, map);
  for (CellId c : cells) acc.Add(c);
  if (!(acc.mass() > 0.0)) {
    throw Error(ErrorCode::kZeroMass, "prior has no mass on the set");
  }
  return acc.Value();
}

ConditionalErrorAccumulator::ConditionalErrorAccumulator(const ProbVector& prior,
                                                         const GridMap& map)
    : prior_(prior), map_(map), weighted_dist_(map.num_cells(), 0.0) {}

void ConditionalErrorAccumulator::Add(CellId c) {
  map_.CheckCell(c);
  const double w = prior_[c];
  if (w == 0.0) return;
  mass_ += w;
  const GridCoord at = map_.CoordOf(c);
  double* out = weighted_dist_.data();
  for (int r = 0; r < map_.rows(); ++r) {
    for (int col = 0; col < map_.cols(); ++col) {
      *out++ += w * map_.OffsetDistance(r - at.row, col - at.col);
    }
  }
}

double ConditionalErrorAccumulator::Value() const {
  if (!(mass_ > 0.0)) return 0.0;
  return *std::min_element(weighted_dist_.begin(), weighted_dist_.end()) / mass_;
}

double PlsThreshold(double epsilon, double e_m) { return std::exp(epsilon) * e_m; }

std::optional<ProtectionLocationSet> SearchPlsWithRotation(
    CellId anchor, std::span<const CellId> pool, const ProbVector& prior, double epsilon,
    double e_m, const GridMap& map, Rotation rotation) {
  const HilbertCurve curve = HilbertCurve::ForMap(map, rotation);
  std::vector<std::pair<uint64_t, CellId>> keyed;
  keyed.reserve(pool.size());
  for (CellId c : pool) {
    map.CheckCell(c);
    keyed.emplace_back(curve.Rank(c, map), c);
  }
  std::sort(keyed.begin(), keyed.end());
  keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());

  auto pos = std::find_if(keyed.begin(), keyed.end(),
                          [&](const auto& kc) { return kc.second == anchor; });
  if (pos == keyed.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "anchor " + std::to_string(Index(anchor)) + " not in candidate pool");
  }
  const double threshold = PlsThreshold(epsilon, e_m);

  ProtectionLocationSet out;
  out.anchor = anchor;
  out.rotation = rotation;
  out.cells.push_back(anchor);
  ConditionalErrorAccumulator acc(prior, map);
  acc.Add(anchor);

  const auto n = static_cast<std::ptrdiff_t>(keyed.size());
  std::ptrdiff_t lo = pos - keyed.begin();
  std::ptrdiff_t hi = lo;
  while (!(acc.mass() > 0.0 && acc.Value() >= threshold)) {
    const bool can_left = lo > 0;
    const bool can_right = hi + 1 < n;
    if (!can_left && !can_right) return std::nullopt;
    bool go_left = can_left;
    if (can_left && can_right) {
      const double dl = map.Distance(anchor, keyed[lo - 1].second);
      const double dr = map.Distance(anchor, keyed[hi + 1].second);
      go_left = dl <= dr;
    }
    const CellId next = go_left ? keyed[--lo].second : keyed[++hi].second;
    for (CellId c : out.cells) {
      out.diameter_m = std::max(out.diameter_m, map.Distance(c, next));
    }
    acc.Add(next);
    if (go_left) {
      out.cells.insert(out.cells.begin(), next);
    } else {
      out.cells.push_back(next);
    }
  }
  out.e_value = acc.Value();
  return out;
}

ProtectionLocationSet SearchPls(CellId anchor, std::span<const CellId> pool,
                                const ProbVector& prior, double epsilon, double e_m,
                                const GridMap& map) {
  if (!(epsilon >= 0.0) || !(e_m > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need epsilon >= 0 and E_m > 0");
  }
  std::optional<ProtectionLocationSet> best;
  for (Rotation r : kAllRotations) {
    auto found = SearchPlsWithRotation(anchor, pool, prior, epsilon, e_m, map, r);
    if (!found) continue;
    if (!best || found->diameter_m < best->diameter_m ||
        (found->diameter_m == best->diameter_m && found->size() < best->size())) {
      best = std::move(found);
    }
  }
  if (!best) {
    throw Error(ErrorCode::kInfeasible,
                "no protection set around cell " + std::to_string(Index(anchor)) +
                    " reaches E >= " + std::to_string(PlsThreshold(epsilon, e_m)) + " m");
  }
  return *best;
}

}  // namespace trajshield
