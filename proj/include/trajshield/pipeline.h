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

// Per-timestep release of a trajectory.
//
// Each step propagates the previous posterior through the transition matrix,
// takes the delta-location set of the resulting prior, and builds one
// perturbation distribution per member of that set (cells outside the set
// are released through their surrogate). The user's cell is then perturbed
// and the posterior is updated with the same distributions an attacker would
// use. When some protection set cannot reach the error bound, the bound is
// multiplied by `em_decay` and the whole step is retried.

#ifndef TRAJSHIELD_PIPELINE_H_
#define TRAJSHIELD_PIPELINE_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajshield/budget.h"
#include "trajshield/grid_map.h"
#include "trajshield/mechanisms.h"
#include "trajshield/mobility.h"
#include "trajshield/pls.h"

namespace trajshield {

enum class InfeasiblePolicy {
  kFail,
  // Protect a cell that still fails after every retry with the whole
  // delta-location set.
  kWholePool,
};

std::string_view InfeasiblePolicyName(InfeasiblePolicy policy);
InfeasiblePolicy ParseInfeasiblePolicy(std::string_view name);

struct PipelineConfig {
  double delta = 0.1;
  double e_m = kDefaultCellSizeM;
  double em_decay = 0.8;
  int em_max_adjustments = 5;
  MechanismTag mechanism = MechanismTag::kPf;
  InfeasiblePolicy on_infeasible = InfeasiblePolicy::kFail;
  // Belief before the first release; uniform over the map when unset.
  std::optional<ProbVector> initial_posterior;

  // Throws InvalidArgument.
  void Validate() const;
};

// Inputs shared by every step. Not owned.
struct PipelineModel {
  const GridMap* map = nullptr;
  const TransitionMatrix* m = nullptr;
  const BudgetAllocation* budgets = nullptr;
};

// Everything one step needs before the user's cell is known.
struct StepMechanisms {
  DeltaLocationSet dset;
  // surrogate[i]: the delta-set cell releasing on behalf of cell i.
  std::vector<CellId> surrogate;
  // Protection set per delta-set cell (same order as dset.cells); empty for
  // the uniform baseline.
  std::vector<ProtectionLocationSet> pls;
  double e_m_used = 0.0;
  int em_adjustments = 0;
  int fallback_cells = 0;
  MechanismTablePtr table;

  const ProtectionLocationSet* PlsFor(CellId dset_cell) const;
};

// `search_prior`, when given, replaces `prior` in the protection-set search
// only; the delta-location set and surrogates still come from `prior`.
StepMechanisms BuildStepMechanisms(const ProbVector& prior, const PipelineConfig& cfg,
                                   const PipelineModel& model,
                                   const ProbVector* search_prior = nullptr);

struct ReleaseRecord {
  int t = 0;
  CellId true_cell{};
  CellId protected_cell{};
  int dset_size = 0;
  MechanismTag mechanism = MechanismTag::kPf;
  // Empty for the uniform baseline.
  ProtectionLocationSet pls;
  CellId released{};
  double epsilon_used = 0.0;
  double e_m_used = 0.0;
  int em_adjustments = 0;
  int fallback_cells = 0;
  ProbVector posterior;

  bool has_pls() const { return !pls.cells.empty(); }
  // Privacy cost charged for this release, 2 * epsilon_used.
  double privacy_cost() const { return 2.0 * epsilon_used; }

  // One JSON object on a single line; posterior as sparse [index, p] pairs.
  std::string ToJsonLine() const;
  static ReleaseRecord FromJsonLine(const std::string& line);
};

struct PipelineState {
  ProbVector posterior_prev;
  int t = 0;
};

struct StepResult {
  ReleaseRecord record;
  ProbVector prior;
  MechanismTablePtr table;
};

// One release. The state is advanced (posterior and t) on success.
StepResult ReleaseStep(PipelineState& state, CellId true_cell, const PipelineConfig& cfg,
                       const PipelineModel& model, Rng& rng);

struct PipelineResult {
  std::vector<ReleaseRecord> records;
  // Per step: the prior the step was built from and its mechanisms.
  std::vector<ProbVector> priors;
  std::vector<MechanismTablePtr> tables;
};

PipelineResult RunPipeline(const Trajectory& trajectory, const PipelineConfig& cfg,
                           const PipelineModel& model, uint64_t seed);

ProbVector InitialPosterior(const PipelineConfig& cfg, const GridMap& map);

// Rebuilds every posterior from the released cells alone; returns the
// largest absolute difference to the logged posteriors.
double ReplayPosteriorDeviation(std::span<const ReleaseRecord> records,
                                const PipelineConfig& cfg, const PipelineModel& model);

}  // namespace trajshield

#endif  // TRAJSHIELD_PIPELINE_H_
