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

// Location perturbation mechanisms over a protection set.
//
// Permute-and-Flip (closed form): for true cell x and protection set S with
// diameter D, release x' in S with probability proportional to
//   exp(-eps * (d(x, x') - d_sm) / (2 D)),
// where d_sm is the distance from x to its nearest other member of S.
//
// The exponential and uniform mechanisms are comparison baselines.

#ifndef TRAJSHIELD_MECHANISMS_H_
#define TRAJSHIELD_MECHANISMS_H_

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajshield/grid_map.h"
#include "trajshield/mobility.h"
#include "trajshield/pls.h"

namespace trajshield {

enum class MechanismTag { kPf, kExp, kUniform };

std::string_view MechanismName(MechanismTag tag);
// Accepts "pf", "exp", "uniform" (case-insensitive).
MechanismTag ParseMechanism(std::string_view name);

// Callers own their generator; nothing in the library draws from hidden state.
using Rng = std::mt19937_64;

struct PerturbationDistribution {
  CellId true_cell{};
  std::vector<CellId> support;
  std::vector<double> probs;
  MechanismTag tag = MechanismTag::kPf;

  // 0 for cells outside the support.
  double ProbOf(CellId c) const;
  double ExpectedDistance(const GridMap& map) const;
};

PerturbationDistribution PfDistribution(CellId true_cell,
                                        std::span<const CellId> pls_cells, double epsilon,
                                        const GridMap& map);
PerturbationDistribution PfDistribution(CellId true_cell,
                                        const ProtectionLocationSet& pls, double epsilon,
                                        const GridMap& map);

// Weights exp(-eps * d(x, x') / (2 D)) over the protection set.
PerturbationDistribution ExpMechanismDistribution(CellId true_cell,
                                                  std::span<const CellId> pls_cells,
                                                  double epsilon, const GridMap& map);
PerturbationDistribution ExpMechanismDistribution(CellId true_cell,
                                                  const ProtectionLocationSet& pls,
                                                  double epsilon, const GridMap& map);

// Uniform over the delta-location set.
PerturbationDistribution UniformDlsDistribution(CellId true_cell,
                                                const DeltaLocationSet& dset);

// Inverse-CDF draw from 53 random bits; deterministic given the generator.
CellId Sample(const PerturbationDistribution& dist, Rng& rng);

using MechanismBuilder = std::function<PerturbationDistribution(
    CellId true_cell, std::span<const CellId> cells, double epsilon, const GridMap& map)>;

struct DpRatio {
  double max_ratio = 1.0;
  // False when some output has zero probability under one input only.
  bool is_dp = true;
};

// max over x, y in the set and outputs x' of f(x'|x) / f(x'|y).
DpRatio VerifyDpRatio(const MechanismBuilder& build, std::span<const CellId> pls_cells,
                      double epsilon, const GridMap& map);

// f(x'|x) for every cell x of the map. Several cells may share one
// distribution, e.g. cells protected through the same surrogate.
class MechanismTable {
 public:
  explicit MechanismTable(int num_cells) : by_cell_(num_cells) {}

  void Set(CellId x, std::shared_ptr<const PerturbationDistribution> dist);
  bool Has(CellId x) const;
  // Throws MissingMechanism.
  const PerturbationDistribution& For(CellId x) const;
  int num_cells() const { return static_cast<int>(by_cell_.size()); }

  // f(released | x) for every x; 0 where no distribution is set.
  std::vector<double> Likelihood(CellId released) const;
  // Ascending union of all supports.
  std::vector<CellId> Outputs() const;

 private:
  std::vector<std::shared_ptr<const PerturbationDistribution>> by_cell_;
};

using MechanismTablePtr = std::shared_ptr<const MechanismTable>;

}  // namespace trajshield

#endif  // TRAJSHIELD_MECHANISMS_H_
