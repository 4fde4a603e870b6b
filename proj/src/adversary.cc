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

#include "trajshield/adversary.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <string>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

std::string_view AttackModeName(AttackMode mode) {
  return mode == AttackMode::kOptimal ? "optimal" : "bayesian";
}

AttackMode ParseAttackMode(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower)
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "optimal") return AttackMode::kOptimal;
  if (lower == "bayesian") return AttackMode::kBayesian;
  throw Error(ErrorCode::kInvalidArgument, "unknown attack mode '" + lower + "'");
}

double ExpectedError(const ProbVector& posterior, CellId guess, const GridMap& map) {
  double out = 0.0;
  for (int x = 0; x < posterior.size(); ++x) {
    const double w = posterior.at(x);
    if (w != 0.0) out += w * map.Distance(guess, Cell(x));
  }
  return out;
}

Inference OptimalInference(const ProbVector& posterior, const GridMap& map) {
  if (posterior.size() != map.num_cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "posterior size differs from map");
  }
  struct Mass {
    int row;
    int col;
    double w;
  };
  std::vector<Mass> support;
  for (int x = 0; x < posterior.size(); ++x) {
    if (posterior.at(x) != 0.0) {
      const GridCoord at = map.CoordOf(Cell(x));
      support.push_back({at.row, at.col, posterior.at(x)});
    }
  }
  Inference best{Cell(0), std::numeric_limits<double>::infinity()};
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      double err = 0.0;
      for (const Mass& m : support) err += m.w * map.OffsetDistance(r - m.row, c - m.col);
      if (err < best.expected_error_m) best = {map.CellAt(r, c), err};
    }
  }
  return best;
}

CellId BayesianInference(const ProbVector& posterior) {
  const auto values = posterior.values();
  return Cell(
      static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin()));
}

Inference Infer(const ProbVector& posterior, AttackMode mode, const GridMap& map) {
  if (mode == AttackMode::kOptimal) return OptimalInference(posterior, map);
  const CellId guess = BayesianInference(posterior);
  return {guess, ExpectedError(posterior, guess, map)};
}

std::vector<AttackOutcome> AttackTrajectory(std::span<const CellId> released,
                                            std::span<const MechanismTablePtr> mechanisms,
                                            const ProbVector& initial_posterior,
                                            const TransitionMatrix& m, AttackMode mode,
                                            const GridMap& map) {
  if (released.size() != mechanisms.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need one mechanism table per released cell");
  }
  std::vector<AttackOutcome> out;
  out.reserve(released.size());
  ProbVector belief = initial_posterior;
  for (size_t t = 0; t < released.size(); ++t) {
    try {
      AttackOutcome step;
      step.prior = PropagatePrior(belief, m);
      step.posterior = Posterior(step.prior, mechanisms[t]->Likelihood(released[t]));
      const Inference inf = Infer(step.posterior, mode, map);
      step.inferred = inf.inferred;
      step.expected_error_m = inf.expected_error_m;
      step.success_prob = step.posterior[inf.inferred];
      belief = step.posterior;
      out.push_back(std::move(step));
    } catch (const Error& e) {
      throw e.WithStep(static_cast<int>(t));
    }
  }
  return out;
}

std::string AttackTraceToJson(std::span<const AttackOutcome> trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (size_t t = 0; t < trace.size(); ++t) {
    const auto& s = trace[t];
    const auto values = s.posterior.values();
    const auto top = std::max_element(values.begin(), values.end());
    int support = 0;
    for (double v : values) support += v > 0.0 ? 1 : 0;
    steps.push_back({{"t", t},
                     {"inferred", Index(s.inferred)},
                     {"expected_error_m", s.expected_error_m},
                     {"success_prob", s.success_prob},
                     {"posterior_max", top == values.end() ? 0.0 : *top},
                     {"posterior_support", support}});
  }
  return steps.dump();
}

}  // namespace trajshield
