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

#include "trajshield/mechanisms.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "trajshield/error.h"

namespace trajshield {

namespace {

void CheckPlsInput(CellId true_cell, std::span<const CellId> cells, double epsilon,
                   const GridMap& map) {
  if (cells.size() < 2) {
    throw Error(
        ErrorCode::kDegeneratePls,
        "protection set needs at least two cells, got " + std::to_string(cells.size()));
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be finite and >= 0");
  }
  for (CellId c : cells) map.CheckCell(c);
  if (std::find(cells.begin(), cells.end(), true_cell) == cells.end()) {
    throw Error(
        ErrorCode::kInvalidArgument,
        "true cell " + std::to_string(Index(true_cell)) + " not in protection set");
  }
}

PerturbationDistribution Normalized(CellId true_cell, std::span<const CellId> cells,
                                    std::vector<double> weights, MechanismTag tag) {
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return {true_cell, std::vector<CellId>(cells.begin(), cells.end()), std::move(weights),
          tag};
}

// Distance-utility weights exp(-eps * (d(x, x') - shift) / (2 D)).
PerturbationDistribution DistanceWeighted(CellId true_cell, std::span<const CellId> cells,
                                          double epsilon, const GridMap& map,
                                          bool shift_by_nearest_other, MechanismTag tag) {
  CheckPlsInput(true_cell, cells, epsilon, map);
  const double diameter = SetDiameter(cells, map);
  if (!(diameter > 0.0)) {
    throw Error(ErrorCode::kDegeneratePls, "protection set has zero diameter");
  }
  double shift = 0.0;
  if (shift_by_nearest_other) {
    shift = std::numeric_limits<double>::infinity();
    for (CellId c : cells) {
      if (c != true_cell) shift = std::min(shift, map.Distance(true_cell, c));
    }
  }
  std::vector<double> weights;
  weights.reserve(cells.size());
  for (CellId c : cells) {
    weights.push_back(
        std::exp(-epsilon * (map.Distance(true_cell, c) - shift) / (2.0 * diameter)));
  }
  return Normalized(true_cell, cells, std::move(weights), tag);
}

}  // namespace

std::string_view MechanismName(MechanismTag tag) {
  switch (tag) {
    case MechanismTag::kPf:
      return "pf";
    case MechanismTag::kExp:
      return "exp";
    case MechanismTag::kUniform:
      return "uniform";
  }
  return "unknown";
}

MechanismTag ParseMechanism(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "pf") return MechanismTag::kPf;
  if (lower == "exp") return MechanismTag::kExp;
  if (lower == "uniform") return MechanismTag::kUniform;
  throw Error(ErrorCode::kInvalidArgument, "unknown mechanism '" + lower + "'");
}

double PerturbationDistribution::ProbOf(CellId c) const {
  for (size_t i = 0; i < support.size(); ++i) {
    if (support[i] == c) return probs[i];
  }
  return 0.0;
}

double PerturbationDistribution::ExpectedDistance(const GridMap& map) const {
  double out = 0.0;
  for (size_t i = 0; i < support.size(); ++i) {
    out += probs[i] * map.Distance(true_cell, support[i]);
  }
  return out;
}

PerturbationDistribution PfDistribution(CellId true_cell,
                                        std::span<const CellId> pls_cells, double epsilon,
                                        const GridMap& map) {
  return DistanceWeighted(true_cell, pls_cells, epsilon, map,
                          /*shift_by_nearest_other=*/true, MechanismTag::kPf);
}

PerturbationDistribution PfDistribution(CellId true_cell,
                                        const ProtectionLocationSet& pls, double epsilon,
                                        const GridMap& map) {
  return PfDistribution(true_cell, pls.cells, epsilon, map);
}

PerturbationDistribution ExpMechanismDistribution(CellId true_cell,
                                                  std::span<const CellId> pls_cells,
                                                  double epsilon, const GridMap& map) {
  return DistanceWeighted(true_cell, pls_cells, epsilon, map,
                          /*shift_by_nearest_other=*/false, MechanismTag::kExp);
}

PerturbationDistribution ExpMechanismDistribution(CellId true_cell,
                                                  const ProtectionLocationSet& pls,
                                                  double epsilon, const GridMap& map) {
  return ExpMechanismDistribution(true_cell, pls.cells, epsilon, map);
}

PerturbationDistribution UniformDlsDistribution(CellId true_cell,
                                                const DeltaLocationSet& dset) {
  if (dset.cells.empty()) {
    throw Error(ErrorCode::kEmptyInput, "delta-location set is empty");
  }
  if (!dset.Contains(true_cell)) {
    throw Error(ErrorCode::kInvalidArgument, "cell " + std::to_string(Index(true_cell)) +
                                                 " not in delta-location set");
  }
  const double p = 1.0 / static_cast<double>(dset.cells.size());
  return {true_cell, dset.cells, std::vector<double>(dset.cells.size(), p),
          MechanismTag::kUniform};
}

CellId Sample(const PerturbationDistribution& dist, Rng& rng) {
  if (dist.support.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot sample an empty distribution");
  }
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double cum = 0.0;
  for (size_t i = 0; i < dist.support.size(); ++i) {
    cum += dist.probs[i];
    if (u < cum) return dist.support[i];
  }
  // Rounding left u above the final cumulative sum.
  for (size_t i = dist.support.size(); i-- > 0;) {
    if (dist.probs[i] > 0.0) return dist.support[i];
  }
  return dist.support.back();
}

DpRatio VerifyDpRatio(const MechanismBuilder& build, std::span<const CellId> pls_cells,
                      double epsilon, const GridMap& map) {
  std::vector<PerturbationDistribution> rows;
  rows.reserve(pls_cells.size());
  for (CellId x : pls_cells) rows.push_back(build(x, pls_cells, epsilon, map));

  std::vector<CellId> outputs;
  for (const auto& r : rows) {
    outputs.insert(outputs.end(), r.support.begin(), r.support.end());
  }
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

  DpRatio out;
  for (CellId o : outputs) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      const double p = r.ProbOf(o);
      hi = std::max(hi, p);
      lo = std::min(lo, p);
    }
    if (hi == 0.0) continue;
    if (lo == 0.0) {
      out.is_dp = false;
      out.max_ratio = std::numeric_limits<double>::infinity();
      return out;
    }
    out.max_ratio = std::max(out.max_ratio, hi / lo);
  }
  return out;
}

void MechanismTable::Set(CellId x, std::shared_ptr<const PerturbationDistribution> dist) {
  if (Index(x) < 0 || Index(x) >= num_cells()) {
    throw Error(ErrorCode::kOutOfBounds, "mechanism cell out of range");
  }
  by_cell_[Index(x)] = std::move(dist);
}

bool MechanismTable::Has(CellId x) const {
  return Index(x) >= 0 && Index(x) < num_cells() && by_cell_[Index(x)] != nullptr;
}

const PerturbationDistribution& MechanismTable::For(CellId x) const {
  if (!Has(x)) {
    throw Error(ErrorCode::kMissingMechanism,
                "no perturbation distribution for cell " + std::to_string(Index(x)));
  }
  return *by_cell_[Index(x)];
}

std::vector<double> MechanismTable::Likelihood(CellId released) const {
  std::vector<double> out(by_cell_.size(), 0.0);
  for (size_t x = 0; x < by_cell_.size(); ++x) {
    if (by_cell_[x]) out[x] = by_cell_[x]->ProbOf(released);
  }
  return out;
}

std::vector<CellId> MechanismTable::Outputs() const {
  std::vector<CellId> out;
  const PerturbationDistribution* last = nullptr;
  for (const auto& d : by_cell_) {
    if (!d || d.get() == last) continue;
    last = d.get();
    out.insert(out.end(), d->support.begin(), d->support.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace trajshield
