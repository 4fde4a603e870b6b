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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "test_util.h"
#include "trajshield/error.h"
#include "trajshield/scenario.h"

namespace trajshield {
namespace {

using testing::Gen;

// A small world whose transition matrix comes from momentum random walks.
struct World {
  GridMap map{6, 6, 620.0};
  RoadGraph graph = RoadGraph::Grid4(map);
  std::vector<Trajectory> history;
  TransitionMatrix m = TransitionMatrix::Identity(36);
  BudgetAllocation budgets;

  World() {
    WalkParams wp;
    wp.num_trajectories = 80;
    wp.length = 20;
    wp.seed = 3;
    history = GenerateRandomWalks(graph, wp);
    m = TransitionMatrix::Build(history, map);
    std::vector<SensitiveLocation> s{{Cell(14), 4}, {Cell(21), 2}};
    budgets = AllocateBudgets(history, graph, s, 2.0);
  }
  PipelineModel model() const { return {&map, &m, &budgets}; }
};

TEST(PipelineTest, SingletonDeltaSetIsInfeasible) {
  GridMap map(3, 3, 620.0);
  TransitionMatrix m = TransitionMatrix::Identity(9);
  BudgetAllocation budgets;
  PipelineModel model{&map, &m, &budgets};
  PipelineConfig cfg;
  cfg.e_m = 1e-3;
  PipelineState state{ProbVector::OneHot(9, Cell(4)), 3};
  Rng rng(1);
  for (auto policy : {InfeasiblePolicy::kFail, InfeasiblePolicy::kWholePool}) {
    cfg.on_infeasible = policy;
    try {
      ReleaseStep(state, Cell(4), cfg, model, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
      EXPECT_EQ(e.step(), 3);
    }
  }
  EXPECT_EQ(state.t, 3);  // state untouched on failure
}

TEST(PipelineTest, UniformPriorStepPassesRecheck) {
  GridMap map(4, 4, 620.0);
  TransitionMatrix m = TransitionMatrix::Uniform(16);
  BudgetAllocation budgets;  // every cell gets epsilon_default = 1
  PipelineModel model{&map, &m, &budgets};
  PipelineConfig cfg;
  cfg.delta = 0.2;
  cfg.e_m = 100.0;
  PipelineState state{ProbVector::Uniform(16), 0};
  Rng rng(9);
  StepResult step = ReleaseStep(state, Cell(5), cfg, model, rng);
  const ReleaseRecord& r = step.record;
  ASSERT_TRUE(r.has_pls());
  EXPECT_EQ(r.em_adjustments, 0);
  EXPECT_DOUBLE_EQ(r.epsilon_used, 1.0);
  const double e = testing::RefConditionalError(r.pls.cells, step.prior, map);
  EXPECT_GE(e, std::exp(1.0) * 100.0);
  EXPECT_TRUE(r.pls.Contains(r.released));
  EXPECT_EQ(state.t, 1);
}

TEST(PipelineTest, FiveStepTrajectoryChainsPosteriors) {
  World w;
  PipelineConfig cfg;
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  Trajectory tr = w.history[0];
  tr.steps.resize(5);
  PipelineResult run = RunPipeline(tr, cfg, w.model(), 42);
  ASSERT_EQ(run.records.size(), 5u);
  double total = 0.0;
  ProbVector belief = ProbVector::Uniform(36);
  for (size_t t = 0; t < run.records.size(); ++t) {
    const ReleaseRecord& r = run.records[t];
    EXPECT_EQ(r.t, static_cast<int>(t));
    const ProbVector prior = PropagatePrior(belief, w.m);
    for (int i = 0; i < 36; ++i) EXPECT_NEAR(run.priors[t].at(i), prior.at(i), 1e-15);
    belief = r.posterior;
    EXPECT_NEAR(r.privacy_cost(), 2.0 * w.budgets.BudgetFor(r.protected_cell), 1e-15);
    total += r.privacy_cost();
  }
  double expected = 0.0;
  for (const auto& r : run.records) expected += 2.0 * r.epsilon_used;
  EXPECT_NEAR(total, expected, 1e-12);
}

TEST(PipelineTest, EveryRecordMeetsItsLoggedBound) {
  World w;
  PipelineConfig cfg;
  cfg.e_m = 700.0;
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  for (int k = 0; k < 6; ++k) {
    PipelineResult run = RunPipeline(w.history[k], cfg, w.model(), 100 + k);
    for (size_t t = 0; t < run.records.size(); ++t) {
      const ReleaseRecord& r = run.records[t];
      ASSERT_TRUE(r.has_pls());
      EXPECT_NEAR(r.e_m_used, 700.0 * std::pow(0.8, r.em_adjustments), 1e-9);
      const double e = testing::RefConditionalError(r.pls.cells, run.priors[t], w.map);
      if (r.fallback_cells == 0) {
        EXPECT_GE(e, std::exp(r.epsilon_used) * r.e_m_used - 1e-9);
      }
      EXPECT_NEAR(r.pls.e_value, e, 1e-9);
    }
  }
}

TEST(PipelineTest, ErrorBoundDecaysUntilFeasible) {
  // Two cells 620 m apart: E is at most 310 m, so E_m = 400 m needs two
  // decays with budget 0.01 (e^0.01 * 400 * 0.64 = 258.6).
  GridMap map(1, 2, 620.0);
  TransitionMatrix m = TransitionMatrix::Uniform(2);
  BudgetAllocation budgets;
  budgets.epsilon_default = 0.01;
  PipelineModel model{&map, &m, &budgets};
  PipelineConfig cfg;
  cfg.delta = 0.01;
  cfg.e_m = 400.0;
  PipelineState state{ProbVector::Uniform(2), 0};
  Rng rng(3);
  StepResult step = ReleaseStep(state, Cell(0), cfg, model, rng);
  EXPECT_EQ(step.record.em_adjustments, 2);
  EXPECT_NEAR(step.record.e_m_used, 256.0, 1e-9);
  cfg.em_max_adjustments = 1;
  EXPECT_THROW(ReleaseStep(state, Cell(0), cfg, model, rng), Error);
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  StepResult pooled = ReleaseStep(state, Cell(0), cfg, model, rng);
  EXPECT_EQ(pooled.record.fallback_cells, 2);
  EXPECT_EQ(pooled.record.pls.size(), 2);
}

TEST(PipelineTest, EmptyTrajectoryRejected) {
  World w;
  Trajectory empty;
  try {
    RunPipeline(empty, PipelineConfig{}, w.model(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(PipelineTest, SameSeedSameRecords) {
  World w;
  PipelineConfig cfg;
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  PipelineResult a = RunPipeline(w.history[1], cfg, w.model(), 7);
  PipelineResult b = RunPipeline(w.history[1], cfg, w.model(), 7);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_EQ(a.records[t].ToJsonLine(), b.records[t].ToJsonLine());
  }
}

TEST(PipelineTest, UniformMechanismReleasesInsideDeltaSet) {
  World w;
  PipelineConfig cfg;
  cfg.mechanism = MechanismTag::kUniform;
  PipelineResult run = RunPipeline(w.history[2], cfg, w.model(), 11);
  for (size_t t = 0; t < run.records.size(); ++t) {
    const ReleaseRecord& r = run.records[t];
    DeltaLocationSet d = ComputeDeltaLocationSet(run.priors[t], cfg.delta);
    EXPECT_TRUE(d.Contains(r.released));
    EXPECT_FALSE(r.has_pls());
    EXPECT_EQ(r.epsilon_used, 0.0);
    EXPECT_EQ(r.dset_size, d.size());
  }
}

TEST(PipelineTest, ReplayReproducesPosteriors) {
  World w;
  for (MechanismTag tag :
       {MechanismTag::kPf, MechanismTag::kExp, MechanismTag::kUniform}) {
    PipelineConfig cfg;
    cfg.mechanism = tag;
    cfg.on_infeasible = InfeasiblePolicy::kWholePool;
    PipelineResult run = RunPipeline(w.history[3], cfg, w.model(), 5);
    EXPECT_LE(ReplayPosteriorDeviation(run.records, cfg, w.model()), 1e-12);
    std::vector<ReleaseRecord> parsed;
    for (const auto& r : run.records) {
      parsed.push_back(ReleaseRecord::FromJsonLine(r.ToJsonLine()));
      EXPECT_EQ(parsed.back().ToJsonLine(), r.ToJsonLine());
    }
    EXPECT_LE(ReplayPosteriorDeviation(parsed, cfg, w.model()), 1e-12);
    // A tampered release no longer replays.
    if (parsed.size() > 1) {
      const int other = Index(parsed[1].released) == 0 ? 1 : 0;
      parsed[1].posterior = ProbVector::OneHot(36, Cell(other));
      EXPECT_GT(ReplayPosteriorDeviation(parsed, cfg, w.model()), 0.1);
    }
  }
}

TEST(PipelineTest, CellsOutsideDeltaSetUseTheirSurrogate) {
  World w;
  PipelineConfig cfg;
  cfg.delta = 0.3;
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  ProbVector prior = PropagatePrior(ProbVector::OneHot(36, Cell(14)), w.m);
  prior = PropagatePrior(prior, w.m);
  StepMechanisms step = BuildStepMechanisms(prior, cfg, w.model());
  ASSERT_EQ(step.pls.size(), step.dset.cells.size());
  for (int i = 0; i < 36; ++i) {
    const CellId s = step.surrogate[i];
    EXPECT_TRUE(step.dset.Contains(s));
    EXPECT_EQ(&step.table->For(Cell(i)), &step.table->For(s));
    EXPECT_EQ(step.table->For(Cell(i)).true_cell, s);
  }
  for (CellId c : step.dset.cells) {
    ASSERT_NE(step.PlsFor(c), nullptr);
    EXPECT_EQ(step.PlsFor(c)->anchor, c);
  }
  // A different search prior changes the protection sets, not the delta set.
  ProbVector flat = ProbVector::Uniform(36);
  StepMechanisms other = BuildStepMechanisms(prior, cfg, w.model(), &flat);
  EXPECT_EQ(other.dset.cells, step.dset.cells);
}

TEST(PipelineTest, ConfigValidation) {
  PipelineConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.e_m = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.em_decay = 1.0;
  EXPECT_THROW(cfg.Validate(), Error);
  EXPECT_EQ(ParseInfeasiblePolicy("pool"), InfeasiblePolicy::kWholePool);
  EXPECT_THROW(ParseInfeasiblePolicy("skip"), Error);
  EXPECT_THROW(ReleaseRecord::FromJsonLine("{\"t\": 1}"), Error);
}

TEST(PipelineTest, InitialPosteriorIsConfigurable) {
  World w;
  PipelineConfig cfg;
  cfg.on_infeasible = InfeasiblePolicy::kWholePool;
  cfg.initial_posterior = ProbVector::OneHot(36, w.history[4].steps[0].cell);
  Trajectory tr = w.history[4];
  tr.steps.resize(3);
  PipelineResult run = RunPipeline(tr, cfg, w.model(), 1);
  const ProbVector expected = PropagatePrior(*cfg.initial_posterior, w.m);
  for (int i = 0; i < 36; ++i) EXPECT_EQ(run.priors[0].at(i), expected.at(i));
  EXPECT_LE(ReplayPosteriorDeviation(run.records, cfg, w.model()), 1e-12);
  cfg.initial_posterior = ProbVector::Uniform(4);
  EXPECT_THROW(RunPipeline(tr, cfg, w.model(), 1), Error);
}

}  // namespace
}  // namespace trajshield
