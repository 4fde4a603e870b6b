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

// Protection location sets (PLS).
//
// The conditional inference error of a set is
//   E(S) = min over guesses g on the whole map of
//          sum_{x in S} prior[x] / prior[S] * d(g, x),
// i.e. the expected error of the best guess by an attacker who knows the user
// is somewhere in S. A set protects with budget eps and error bound E_m when
// E(S) >= e^eps * E_m. The search grows a window along a Hilbert curve from
// the protected cell, under four rotations of the curve, and keeps the
// qualifying window with the smallest diameter.

#ifndef TRAJSHIELD_PLS_H_
#define TRAJSHIELD_PLS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajshield/grid_map.h"
#include "trajshield/mobility.h"

namespace trajshield {

struct ProtectionLocationSet {
  std::vector<CellId> cells;  // in curve order
  double diameter_m = 0.0;
  double e_value = 0.0;
  CellId anchor{};
  Rotation rotation = Rotation::k0;

  bool Contains(CellId c) const;
  int size() const { return static_cast<int>(cells.size()); }
  std::string ToJson() const;
};

// Largest pairwise center distance; 0 for fewer than two cells.
double SetDiameter(std::span<const CellId> cells, const GridMap& map);

// Exact E(S), minimizing over every cell of the map. Throws ZeroMass when
// the prior puts no mass on S.
double ConditionalError(std::span<const CellId> cells, const ProbVector& prior,
                        const GridMap& map);

// Maintains E(S) as cells are added, in O(|map|) per insertion.
class ConditionalErrorAccumulator {
 public:
  ConditionalErrorAccumulator(const ProbVector& prior, const GridMap& map);

  void Add(CellId c);
  double mass() const { return mass_; }
  // +0 when the accumulated mass is zero.
  double Value() const;

 private:
  const ProbVector& prior_;
  const GridMap& map_;
  std::vector<double> weighted_dist_;
  double mass_ = 0.0;
};

// e^eps * E_m.
double PlsThreshold(double epsilon, double e_m);

// Window search under one rotation; nullopt when the whole pool falls short.
std::optional<ProtectionLocationSet> SearchPlsWithRotation(
    CellId anchor, std::span<const CellId> pool, const ProbVector& prior, double epsilon,
    double e_m, const GridMap& map, Rotation rotation);

// Best window over all four rotations: smallest diameter, then fewer cells,
// then lower rotation. Throws Infeasible if no rotation qualifies.
ProtectionLocationSet SearchPls(CellId anchor, std::span<const CellId> pool,
                                const ProbVector& prior, double epsilon, double e_m,
                                const GridMap& map);

}  // namespace trajshield

#endif  // TRAJSHIELD_PLS_H_
