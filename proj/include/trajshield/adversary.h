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

// The correlation-aware attacker. It knows the transition matrix and the
// exact perturbation distributions, and alternates a Bayes update on each
// released cell with a Markov step to the next prior.

#ifndef TRAJSHIELD_ADVERSARY_H_
#define TRAJSHIELD_ADVERSARY_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajshield/grid_map.h"
#include "trajshield/mechanisms.h"
#include "trajshield/mobility.h"

namespace trajshield {

enum class AttackMode { kOptimal, kBayesian };

std::string_view AttackModeName(AttackMode mode);
AttackMode ParseAttackMode(std::string_view name);

struct Inference {
  CellId inferred{};
  double expected_error_m = 0.0;
};

// sum_x posterior[x] * d(guess, x).
double ExpectedError(const ProbVector& posterior, CellId guess, const GridMap& map);

// Guess minimizing the expected distance, searched over the whole map; ties
// go to the lowest id. expected_error_m is the attained minimum.
Inference OptimalInference(const ProbVector& posterior, const GridMap& map);

// Most probable cell, ties to the lowest id.
CellId BayesianInference(const ProbVector& posterior);

// Guess for the given mode together with its expected error.
Inference Infer(const ProbVector& posterior, AttackMode mode, const GridMap& map);

struct AttackOutcome {
  CellId inferred{};
  double expected_error_m = 0.0;
  // Posterior probability that the guess is the true cell.
  double success_prob = 0.0;
  ProbVector prior;
  ProbVector posterior;
};

// Runs the attack over a released trajectory. `initial_posterior` is the
// belief before the first release; each step propagates it through `m`,
// conditions on the released cell with that step's mechanisms, then infers.
std::vector<AttackOutcome> AttackTrajectory(std::span<const CellId> released,
                                            std::span<const MechanismTablePtr> mechanisms,
                                            const ProbVector& initial_posterior,
                                            const TransitionMatrix& m, AttackMode mode,
                                            const GridMap& map);

std::string AttackTraceToJson(std::span<const AttackOutcome> trace);

}  // namespace trajshield

#endif  // TRAJSHIELD_ADVERSARY_H_
