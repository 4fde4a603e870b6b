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

// Evaluation quantities, all computed by exact summation:
//   privacy  p = sum_{x, x'} Pr(x) f(x'|x) d(x, h(x'))
//   QoS loss q = sum_{x, x'} Pr(x) f(x'|x) d(x, x')
// where h is the attacker's deterministic guess from the posterior given x'.

#ifndef TRAJSHIELD_METRICS_H_
#define TRAJSHIELD_METRICS_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajshield/adversary.h"
#include "trajshield/grid_map.h"
#include "trajshield/mechanisms.h"
#include "trajshield/mobility.h"
#include "trajshield/pipeline.h"
#include "trajshield/scenario.h"

namespace trajshield {

// Throws MissingMechanism when a cell with prior mass has no distribution.
double PrivacyMetric(const ProbVector& prior, const MechanismTable& mech, AttackMode mode,
                     const GridMap& map);
double QosLoss(const ProbVector& prior, const MechanismTable& mech, const GridMap& map);

// Attack quantities for a known true cell, averaged over x' ~ f(.|true_cell).
struct TargetedAttack {
  double success = 0.0;  // Pr[h(x') == true_cell]
  double error_m = 0.0;  // E[d(h(x'), true_cell)]
};

TargetedAttack EvaluateAttack(const ProbVector& prior, const MechanismTable& mech,
                              CellId true_cell, AttackMode mode, const GridMap& map);

struct StepEvaluation {
  int t = 0;
  double p_optimal = 0.0;
  double p_bayesian = 0.0;
  double q = 0.0;
  TargetedAttack optimal;
  TargetedAttack bayesian;
  int dset_size = 0;
  double pls_diameter_m = 0.0;
};

StepEvaluation EvaluateStep(const ProbVector& prior, const MechanismTable& mech,
                            CellId true_cell, const GridMap& map);

// Follows the attacker's own belief chain (its matrix and initial belief)
// through the run's releases and evaluates every step against it.
std::vector<StepEvaluation> EvaluateRun(const PipelineResult& run,
                                        const TransitionMatrix& attacker_m,
                                        const ProbVector& attacker_initial,
                                        const GridMap& map);

// Per-location comparison at one step: for every cell of the delta-location
// set, the attack outcome when protection sets are searched with the
// propagated prior versus a uniform (uncorrelated) prior. The attacker uses
// the propagated prior in both cases; the delta-location set and the E_m
// actually used by the correlated search are shared.
struct LocationComparison {
  CellId cell{};
  TargetedAttack correlated_optimal;
  TargetedAttack uncorrelated_optimal;
  TargetedAttack correlated_bayesian;
  TargetedAttack uncorrelated_bayesian;
};

std::vector<LocationComparison> CompareWithUncorrelatedSearch(const ProbVector& prior,
                                                              const PipelineConfig& cfg,
                                                              const PipelineModel& model);

struct SweepSpec {
  std::vector<double> epsilon_s{1.0};
  std::vector<double> e_m{kDefaultCellSizeM};
  std::vector<double> delta{0.1};
  int trials = 1;
  std::vector<uint64_t> seeds{1};
  // Attack used for the privacy column; success is always the Bayesian one.
  AttackMode attack_mode = AttackMode::kOptimal;

  static SweepSpec FromJson(const std::string& text);
  std::string ToJson() const;
};

struct SweepRow {
  std::string scenario;
  double epsilon_s = 0.0;
  double e_m = 0.0;
  double delta = 0.0;
  uint64_t seed = 0;
  double p_mean = 0.0;
  double p_std = 0.0;
  double q_mean = 0.0;
  double q_std = 0.0;
  double dset_size_mean = 0.0;
  double pls_diam_mean = 0.0;
  double attack_success_mean = 0.0;
  int trials_ok = 0;
  std::string status = "ok";
};

// Trial k of a (grid point, seed) pair releases eval trajectory
// k mod |eval| with pipeline seed DeriveSeed(seed, k). Failed trials are
// counted and skipped; a point with no successful trial carries the first
// error in `status`.
SweepRow RunSweepPoint(const Scenario& scenario, const SweepSpec& spec, double epsilon_s,
                       double e_m, double delta, uint64_t seed);

// Rows ordered by (epsilon_s, e_m, delta, seed) grid position regardless of
// the number of workers.
std::vector<SweepRow> RunSweep(const Scenario& scenario, const SweepSpec& spec,
                               int workers = 1);

std::string SweepCsvHeader();
void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows);

// Sample mean and (n - 1) standard deviation; 0 deviation for n < 2.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd Summarize(std::span<const double> values);

}  // namespace trajshield

#endif  // TRAJSHIELD_METRICS_H_
