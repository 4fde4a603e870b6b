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

// First-order Markov mobility model: trajectories, the transition matrix
// learned from them, prior/posterior propagation and the delta-location set.

#ifndef TRAJSHIELD_MOBILITY_H_
#define TRAJSHIELD_MOBILITY_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajshield/grid_map.h"

namespace trajshield {

struct TrajectoryStep {
  int t = 0;
  CellId cell{};
};

struct Trajectory {
  std::string user_id;
  std::vector<TrajectoryStep> steps;

  // Steps at t = 0, 1, 2, ...
  static Trajectory FromCells(std::string user_id, std::span<const CellId> cells);

  // Throws InvalidArgument unless timesteps strictly increase.
  void Validate() const;
  std::vector<CellId> Cells() const;
  bool empty() const { return steps.empty(); }
  size_t size() const { return steps.size(); }
};

// Trajectory CSV: `t,cell_index` or `user_id,t,cell_index` rows, optional
// header row, `#` comment lines. Rows are grouped by user in file order.
std::vector<Trajectory> ReadTrajectoriesCsv(std::istream& in);
std::vector<Trajectory> LoadTrajectoriesCsv(const std::string& path);
void WriteTrajectoriesCsv(std::ostream& out, std::span<const Trajectory> trajs);

// Probability distribution over map cells.
class ProbVector {
 public:
  ProbVector() = default;
  // Validates: entries >= 0 and sum = 1 within 1e-9.
  explicit ProbVector(std::vector<double> p);

  static ProbVector Uniform(int n);
  static ProbVector OneHot(int n, CellId c);
  // Normalizes nonnegative weights; throws ZeroMass when they sum to 0.
  static ProbVector FromWeights(std::vector<double> weights);

  double operator[](CellId c) const { return p_[Index(c)]; }
  double at(int i) const { return p_[i]; }
  int size() const { return static_cast<int>(p_.size()); }
  std::span<const double> values() const { return p_; }
  double Sum() const;

 private:
  std::vector<double> p_;
};

class TransitionMatrix {
 public:
  // Counts consecutive step pairs across all trajectories. Rows with no
  // outgoing transitions become a self-loop. With smoothing > 0 every row is
  // (n_ij + smoothing) / (sum_j n_ij + N * smoothing) instead.
  static TransitionMatrix Build(std::span<const Trajectory> trajectories,
                                const GridMap& map, double smoothing = 0.0);
  // Row-major probabilities; each row must sum to 1 within 1e-9.
  static TransitionMatrix FromProbabilities(int n, std::vector<double> probs);
  static TransitionMatrix Identity(int n);
  // Every row uniform: the "no correlation" model.
  static TransitionMatrix Uniform(int n);

  int size() const { return n_; }
  double Prob(CellId from, CellId to) const {
    return probs_[static_cast<size_t>(Index(from)) * n_ + Index(to)];
  }
  int64_t Count(CellId from, CellId to) const {
    return counts_.empty() ? 0
                           : counts_[static_cast<size_t>(Index(from)) * n_ + Index(to)];
  }
  std::span<const double> Row(CellId from) const {
    return std::span<const double>(probs_).subspan(static_cast<size_t>(Index(from)) * n_,
                                                   n_);
  }

  // Dense row-major CSV of probabilities, one matrix row per line.
  void WriteCsv(std::ostream& out) const;
  static TransitionMatrix ReadCsv(std::istream& in);

 private:
  TransitionMatrix(int n, std::vector<int64_t> counts, std::vector<double> probs);

  int n_ = 0;
  std::vector<int64_t> counts_;
  std::vector<double> probs_;
};

// p_{t+1}^- = p_t^+ M.
ProbVector PropagatePrior(const ProbVector& posterior_prev, const TransitionMatrix& m);

// Bayes update: posterior[x] ~ prior[x] * likelihood[x], where likelihood[x]
// is f(released | x). Throws ZeroEvidence when the evidence is zero.
ProbVector Posterior(const ProbVector& prior, std::span<const double> likelihood);

struct DeltaLocationSet {
  std::vector<CellId> cells;  // ascending
  double delta = 0.0;
  double covered_mass = 0.0;

  bool Contains(CellId c) const;
  int size() const { return static_cast<int>(cells.size()); }
};

// Smallest set of cells with prior mass >= 1 - delta, picked greedily by
// descending prior (ties by ascending id). Never includes zero-prior cells.
DeltaLocationSet ComputeDeltaLocationSet(const ProbVector& prior, double delta);

// The true cell if it is in the set, otherwise the nearest member (ties by
// ascending id).
CellId SurrogateLocation(CellId true_cell, const DeltaLocationSet& dset,
                         const GridMap& map);

}  // namespace trajshield

#endif  // TRAJSHIELD_MOBILITY_H_
