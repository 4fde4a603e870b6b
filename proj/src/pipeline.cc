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

#include "trajshield/pipeline.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

namespace {

using nlohmann::json;

void CheckModel(const PipelineModel& model) {
  if (model.map == nullptr || model.m == nullptr || model.budgets == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "pipeline model is incomplete");
  }
  if (model.m->size() != model.map->num_cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "transition matrix size differs from map");
  }
}

ProtectionLocationSet WholePool(CellId anchor, const DeltaLocationSet& dset,
                                const ProbVector& prior, const GridMap& map) {
  if (dset.size() < 2) {
    throw Error(ErrorCode::kInfeasible, "delta-location set has fewer than two cells");
  }
  ProtectionLocationSet out;
  out.cells = dset.cells;
  out.anchor = anchor;
  out.diameter_m = SetDiameter(out.cells, map);
  out.e_value = ConditionalError(out.cells, prior, map);
  return out;
}

// Protection sets for every delta-set cell at one error bound, or nullopt
// when some cell cannot reach it.
std::optional<std::vector<ProtectionLocationSet>> TryAllCells(
    const ProbVector& prior, const DeltaLocationSet& dset, double e_m,
    const BudgetAllocation& budgets, const GridMap& map, int* failed_index) {
  std::vector<ProtectionLocationSet> out;
  out.reserve(dset.cells.size());
  for (size_t i = 0; i < dset.cells.size(); ++i) {
    const CellId c = dset.cells[i];
    try {
      out.push_back(SearchPls(c, dset.cells, prior, budgets.BudgetFor(c), e_m, map));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
      *failed_index = static_cast<int>(i);
      return std::nullopt;
    }
  }
  return out;
}

json PlsJson(const ProtectionLocationSet& pls) { return json::parse(pls.ToJson()); }

ProtectionLocationSet PlsFromJson(const json& j) {
  ProtectionLocationSet pls;
  for (int c : j.at("cells")) pls.cells.push_back(Cell(c));
  pls.anchor = Cell(j.at("anchor").get<int>());
  pls.diameter_m = j.at("diameter_m").get<double>();
  pls.e_value = j.at("e_value").get<double>();
  pls.rotation = static_cast<Rotation>(j.at("rotation").get<int>());
  return pls;
}

}  // namespace

std::string_view InfeasiblePolicyName(InfeasiblePolicy policy) {
  return policy == InfeasiblePolicy::kFail ? "fail" : "pool";
}

InfeasiblePolicy ParseInfeasiblePolicy(std::string_view name) {
  if (name == "fail") return InfeasiblePolicy::kFail;
  if (name == "pool") return InfeasiblePolicy::kWholePool;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown infeasibility policy '" + std::string(name) + "'");
}

void PipelineConfig::Validate() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  }
  if (!(e_m > 0.0) || !std::isfinite(e_m)) {
    throw Error(ErrorCode::kInvalidArgument, "e_m must be positive");
  }
  if (!(em_decay > 0.0 && em_decay < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "em_decay must lie in (0, 1)");
  }
  if (em_max_adjustments < 0) {
    throw Error(ErrorCode::kInvalidArgument, "em_max_adjustments must be >= 0");
  }
}

const ProtectionLocationSet* StepMechanisms::PlsFor(CellId dset_cell) const {
  const auto it = std::lower_bound(dset.cells.begin(), dset.cells.end(), dset_cell);
  if (it == dset.cells.end() || *it != dset_cell || pls.empty()) return nullptr;
  return &pls[it - dset.cells.begin()];
}

StepMechanisms BuildStepMechanisms(const ProbVector& prior, const PipelineConfig& cfg,
                                   const PipelineModel& model,
                                   const ProbVector* search_prior) {
  CheckModel(model);
  const ProbVector& weights = search_prior ? *search_prior : prior;
  if (weights.size() != prior.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "search prior size differs");
  }
  const GridMap& map = *model.map;
  StepMechanisms out;
  out.dset = ComputeDeltaLocationSet(prior, cfg.delta);
  out.surrogate.resize(map.num_cells());
  for (int i = 0; i < map.num_cells(); ++i) {
    out.surrogate[i] = SurrogateLocation(Cell(i), out.dset, map);
  }
  auto table = std::make_shared<MechanismTable>(map.num_cells());
  out.table = table;

  if (cfg.mechanism == MechanismTag::kUniform) {
    auto dist = std::make_shared<const PerturbationDistribution>(
        UniformDlsDistribution(out.dset.cells.front(), out.dset));
    for (int i = 0; i < map.num_cells(); ++i) table->Set(Cell(i), dist);
    return out;
  }

  int failed = -1;
  double e_m = cfg.e_m;
  std::optional<std::vector<ProtectionLocationSet>> found;
  for (int k = 0; k <= cfg.em_max_adjustments; ++k) {
    out.e_m_used = e_m;
    out.em_adjustments = k;
    found = TryAllCells(weights, out.dset, e_m, *model.budgets, map, &failed);
    if (found) break;
    if (k < cfg.em_max_adjustments) e_m *= cfg.em_decay;
  }
  if (!found) {
    if (cfg.on_infeasible == InfeasiblePolicy::kFail) {
      throw Error(ErrorCode::kInfeasible,
                  "no protection set for cell " +
                      std::to_string(Index(out.dset.cells[failed])) + " after " +
                      std::to_string(cfg.em_max_adjustments) +
                      " error-bound adjustments");
    }
    found.emplace();
    for (CellId c : out.dset.cells) {
      try {
        found->push_back(
            SearchPls(c, out.dset.cells, weights, model.budgets->BudgetFor(c), e_m, map));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasible) throw;
        found->push_back(WholePool(c, out.dset, weights, map));
        ++out.fallback_cells;
      }
    }
  }
  out.pls = std::move(*found);

  std::vector<std::shared_ptr<const PerturbationDistribution>> by_dset;
  by_dset.reserve(out.dset.cells.size());
  for (size_t i = 0; i < out.dset.cells.size(); ++i) {
    const CellId c = out.dset.cells[i];
    const double eps = model.budgets->BudgetFor(c);
    by_dset.push_back(std::make_shared<const PerturbationDistribution>(
        cfg.mechanism == MechanismTag::kPf
            ? PfDistribution(c, out.pls[i], eps, map)
            : ExpMechanismDistribution(c, out.pls[i], eps, map)));
  }
  for (int i = 0; i < map.num_cells(); ++i) {
    const CellId s = out.surrogate[i];
    const size_t pos = std::lower_bound(out.dset.cells.begin(), out.dset.cells.end(), s) -
                       out.dset.cells.begin();
    table->Set(Cell(i), by_dset[pos]);
  }
  return out;
}

std::string ReleaseRecord::ToJsonLine() const {
  json post = json::array();
  for (int i = 0; i < posterior.size(); ++i) {
    if (posterior.at(i) != 0.0) post.push_back({i, posterior.at(i)});
  }
  json j = {{"t", t},
            {"true_cell", Index(true_cell)},
            {"protected_cell", Index(protected_cell)},
            {"dset_size", dset_size},
            {"mechanism", std::string(MechanismName(mechanism))},
            {"pls", has_pls() ? PlsJson(pls) : json(nullptr)},
            {"released", Index(released)},
            {"epsilon_used", epsilon_used},
            {"privacy_cost", privacy_cost()},
            {"e_m_used", e_m_used},
            {"em_adjustments", em_adjustments},
            {"fallback_cells", fallback_cells},
            {"num_cells", posterior.size()},
            {"posterior", post}};
  return j.dump();
}

ReleaseRecord ReleaseRecord::FromJsonLine(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
    ReleaseRecord r;
    r.t = j.at("t").get<int>();
    r.true_cell = Cell(j.at("true_cell").get<int>());
    r.protected_cell = Cell(j.at("protected_cell").get<int>());
    r.dset_size = j.at("dset_size").get<int>();
    r.mechanism = ParseMechanism(j.at("mechanism").get<std::string>());
    if (!j.at("pls").is_null()) r.pls = PlsFromJson(j.at("pls"));
    r.released = Cell(j.at("released").get<int>());
    r.epsilon_used = j.at("epsilon_used").get<double>();
    r.e_m_used = j.at("e_m_used").get<double>();
    r.em_adjustments = j.at("em_adjustments").get<int>();
    r.fallback_cells = j.value("fallback_cells", 0);
    std::vector<double> dense(j.at("num_cells").get<int>(), 0.0);
    for (const auto& pair : j.at("posterior")) {
      dense.at(pair.at(0).get<int>()) = pair.at(1).get<double>();
    }
    r.posterior = ProbVector(std::move(dense));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad release record: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::kParseError, std::string("bad release record: ") + e.what());
  }
}

StepResult ReleaseStep(PipelineState& state, CellId true_cell, const PipelineConfig& cfg,
                       const PipelineModel& model, Rng& rng) {
  CheckModel(model);
  model.map->CheckCell(true_cell);
  try {
    StepResult out;
    out.prior = PropagatePrior(state.posterior_prev, *model.m);
    StepMechanisms step = BuildStepMechanisms(out.prior, cfg, model);

    ReleaseRecord& r = out.record;
    r.t = state.t;
    r.true_cell = true_cell;
    r.protected_cell = step.surrogate[Index(true_cell)];
    r.dset_size = step.dset.size();
    r.mechanism = cfg.mechanism;
    if (const ProtectionLocationSet* pls = step.PlsFor(r.protected_cell)) r.pls = *pls;
    r.epsilon_used = cfg.mechanism == MechanismTag::kUniform
                         ? 0.0
                         : model.budgets->BudgetFor(r.protected_cell);
    r.e_m_used = step.e_m_used;
    r.em_adjustments = step.em_adjustments;
    r.fallback_cells = step.fallback_cells;
    r.released = Sample(step.table->For(true_cell), rng);
    r.posterior = Posterior(out.prior, step.table->Likelihood(r.released));

    out.table = step.table;
    state.posterior_prev = r.posterior;
    ++state.t;
    return out;
  } catch (const Error& e) {
    if (e.step() >= 0) throw;
    throw e.WithStep(state.t);
  }
}

ProbVector InitialPosterior(const PipelineConfig& cfg, const GridMap& map) {
  if (!cfg.initial_posterior) return ProbVector::Uniform(map.num_cells());
  if (cfg.initial_posterior->size() != map.num_cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial posterior size differs from map");
  }
  return *cfg.initial_posterior;
}

PipelineResult RunPipeline(const Trajectory& trajectory, const PipelineConfig& cfg,
                           const PipelineModel& model, uint64_t seed) {
  if (trajectory.empty()) {
    throw Error(ErrorCode::kEmptyInput, "trajectory has no steps");
  }
  cfg.Validate();
  CheckModel(model);
  PipelineState state{InitialPosterior(cfg, *model.map), 0};
  Rng rng(seed);
  PipelineResult out;
  for (const TrajectoryStep& s : trajectory.steps) {
    StepResult step = ReleaseStep(state, s.cell, cfg, model, rng);
    out.records.push_back(std::move(step.record));
    out.priors.push_back(std::move(step.prior));
    out.tables.push_back(std::move(step.table));
  }
  return out;
}

double ReplayPosteriorDeviation(std::span<const ReleaseRecord> records,
                                const PipelineConfig& cfg, const PipelineModel& model) {
  CheckModel(model);
  ProbVector belief = InitialPosterior(cfg, *model.map);
  double worst = 0.0;
  for (const ReleaseRecord& r : records) {
    const ProbVector prior = PropagatePrior(belief, *model.m);
    const StepMechanisms step = BuildStepMechanisms(prior, cfg, model);
    belief = Posterior(prior, step.table->Likelihood(r.released));
    if (belief.size() != r.posterior.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "logged posterior size differs", r.t);
    }
    for (int i = 0; i < belief.size(); ++i) {
      worst = std::max(worst, std::abs(belief.at(i) - r.posterior.at(i)));
    }
  }
  return worst;
}

}  // namespace trajshield
