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

#include "trajshield/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "test_util.h"
#include "trajshield/error.h"

namespace trajshield {
namespace {

using testing::Gen;

std::shared_ptr<const PerturbationDistribution> Dist(CellId x, std::vector<int> support,
                                                     std::vector<double> probs) {
  PerturbationDistribution d{x, {}, std::move(probs), MechanismTag::kPf};
  for (int s : support) d.support.push_back(Cell(s));
  return std::make_shared<const PerturbationDistribution>(std::move(d));
}

MechanismTable IdentityTable(int n) {
  MechanismTable t(n);
  for (int i = 0; i < n; ++i) t.Set(Cell(i), Dist(Cell(i), {i}, {1.0}));
  return t;
}

// Random table: every cell releases over a random subset containing itself.
MechanismTable RandomTable(int n, Gen& gen) {
  MechanismTable t(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> support{i};
    for (int j = 0; j < n; ++j) {
      if (j != i && gen.Coin(0.5)) support.push_back(j);
    }
    std::vector<double> w;
    for (size_t k = 0; k < support.size(); ++k) w.push_back(gen.Uniform(0.05, 1.0));
    const double total = testing::Sum(w);
    for (double& v : w) v /= total;
    t.Set(Cell(i), Dist(Cell(i), support, w));
  }
  return t;
}

// p by enumerating (x, x') pairs with an explicit posterior per output.
double RefPrivacy(const ProbVector& prior, const MechanismTable& mech, AttackMode mode,
                  const GridMap& map) {
  const int n = prior.size();
  double p = 0.0;
  for (int out = 0; out < n; ++out) {
    std::vector<double> joint(n);
    double evidence = 0.0;
    for (int x = 0; x < n; ++x) {
      joint[x] =
          prior.at(x) * (mech.Has(Cell(x)) ? mech.For(Cell(x)).ProbOf(Cell(out)) : 0);
      evidence += joint[x];
    }
    if (evidence == 0.0) continue;
    std::vector<double> post(n);
    for (int x = 0; x < n; ++x) post[x] = joint[x] / evidence;
    CellId guess;
    if (mode == AttackMode::kBayesian) {
      int best = 0;
      for (int x = 1; x < n; ++x) {
        if (post[x] > post[best]) best = x;
      }
      guess = Cell(best);
    } else {
      guess = testing::RefOptimalGuess(ProbVector(post), map).first;
    }
    for (int x = 0; x < n; ++x) p += joint[x] * testing::RefDistance(Cell(x), guess, map);
  }
  return p;
}

TEST(PrivacyMetricTest, IdentityMechanismGivesZero) {
  GridMap map(3, 3, 620.0);
  Gen gen(101);
  ProbVector prior = gen.Prior(9);
  MechanismTable id = IdentityTable(9);
  EXPECT_EQ(PrivacyMetric(prior, id, AttackMode::kBayesian, map), 0.0);
  EXPECT_EQ(PrivacyMetric(prior, id, AttackMode::kOptimal, map), 0.0);
  EXPECT_EQ(QosLoss(prior, id, map), 0.0);
}

TEST(PrivacyMetricTest, UniformOverTwoCells) {
  GridMap map(1, 2, 620.0);
  MechanismTable t(2);
  auto u = Dist(Cell(0), {0, 1}, {0.5, 0.5});
  t.Set(Cell(0), u);
  t.Set(Cell(1), u);
  ProbVector prior = ProbVector::Uniform(2);
  // Each output leaves the belief uniform; the guess is cell 0.
  EXPECT_NEAR(PrivacyMetric(prior, t, AttackMode::kBayesian, map), 310.0, 1e-9);
  EXPECT_NEAR(RefPrivacy(prior, t, AttackMode::kBayesian, map), 310.0, 1e-9);
  EXPECT_NEAR(QosLoss(prior, t, map), 310.0, 1e-9);
}

TEST(PrivacyMetricTest, MatchesEnumerationOnSmallInstances) {
  Gen gen(103);
  for (int trial = 0; trial < 200; ++trial) {
    GridMap map(gen.Int(1, 2), gen.Int(1, 2), 620.0);
    const int n = map.num_cells();
    ProbVector prior = gen.SparsePrior(n, 0.2);
    MechanismTable t = RandomTable(n, gen);
    for (AttackMode mode : {AttackMode::kOptimal, AttackMode::kBayesian}) {
      EXPECT_NEAR(PrivacyMetric(prior, t, mode, map), RefPrivacy(prior, t, mode, map),
                  1e-9);
    }
  }
}

TEST(PrivacyMetricTest, ScalesLinearlyWithDistance) {
  Gen gen(107);
  GridMap small(3, 3, 100.0);
  GridMap big(3, 3, 350.0);
  for (int trial = 0; trial < 20; ++trial) {
    ProbVector prior = gen.Prior(9);
    MechanismTable t = RandomTable(9, gen);
    for (AttackMode mode : {AttackMode::kOptimal, AttackMode::kBayesian}) {
      EXPECT_NEAR(PrivacyMetric(prior, t, mode, big),
                  3.5 * PrivacyMetric(prior, t, mode, small), 1e-8);
    }
    EXPECT_NEAR(QosLoss(prior, t, big), 3.5 * QosLoss(prior, t, small), 1e-8);
  }
}

TEST(QosLossTest, PointMassDisplacement) {
  GridMap map(1, 3, 620.0);
  MechanismTable t(3);
  t.Set(Cell(1), Dist(Cell(1), {2}, {1.0}));
  EXPECT_DOUBLE_EQ(QosLoss(ProbVector::OneHot(3, Cell(1)), t, map), 620.0);
  // A cell with prior mass but no distribution is an error.
  try {
    QosLoss(ProbVector::Uniform(3), t, map);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMechanism);
  }
}

TEST(QosLossTest, PfNoWorseThanExponential) {
  Gen gen(109);
  GridMap map(6, 6, 620.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto cells = gen.DistinctCells(36, gen.Int(3, 10));
    const double eps = gen.Uniform(0.1, 4.0);
    MechanismTable pf(36), ex(36);
    std::vector<double> w(36, 0.0);
    for (CellId c : cells) {
      pf.Set(c, std::make_shared<const PerturbationDistribution>(
                    PfDistribution(c, cells, eps, map)));
      ex.Set(c, std::make_shared<const PerturbationDistribution>(
                    ExpMechanismDistribution(c, cells, eps, map)));
      w[Index(c)] = gen.Uniform(0.1, 1.0);
    }
    ProbVector prior = ProbVector::FromWeights(w);
    EXPECT_LE(QosLoss(prior, pf, map), QosLoss(prior, ex, map) + 1e-9);
  }
}

TEST(MetricsTest, ExactSumsAgreeWithMonteCarlo) {
  Gen gen(113);
  for (int trial = 0; trial < 6; ++trial) {
    GridMap map(3, 3, 620.0);
    ProbVector prior = gen.SparsePrior(9, 0.3);
    MechanismTable t = RandomTable(9, gen);
    const double p_exact = PrivacyMetric(prior, t, AttackMode::kOptimal, map);
    const double q_exact = QosLoss(prior, t, map);
    PerturbationDistribution prior_dist{Cell(0), {}, {}, MechanismTag::kPf};
    for (int i = 0; i < 9; ++i) {
      prior_dist.support.push_back(Cell(i));
      prior_dist.probs.push_back(prior.at(i));
    }
    // Guess per output, computed once.
    std::vector<CellId> guess(9, Cell(0));
    for (int o = 0; o < 9; ++o) {
      auto lik = t.Likelihood(Cell(o));
      double ev = 0.0;
      for (int x = 0; x < 9; ++x) ev += prior.at(x) * lik[x];
      if (ev > 0.0) guess[o] = OptimalInference(Posterior(prior, lik), map).inferred;
    }
    Rng rng(500 + trial);
    const int n = 100000;
    double sp = 0, sp2 = 0, sq = 0, sq2 = 0;
    for (int i = 0; i < n; ++i) {
      const CellId x = Sample(prior_dist, rng);
      const CellId o = Sample(t.For(x), rng);
      const double dp = map.Distance(x, guess[Index(o)]);
      const double dq = map.Distance(x, o);
      sp += dp;
      sp2 += dp * dp;
      sq += dq;
      sq2 += dq * dq;
    }
    const double mp = sp / n, mq = sq / n;
    const double se_p = std::sqrt((sp2 / n - mp * mp) / n);
    const double se_q = std::sqrt((sq2 / n - mq * mq) / n);
    EXPECT_LE(std::abs(mp - p_exact), 3.0 * se_p + 1e-9);
    EXPECT_LE(std::abs(mq - q_exact), 3.0 * se_q + 1e-9);
    EXPECT_GE(p_exact, 0.0);
    EXPECT_GE(q_exact, 0.0);
  }
}

TEST(EvaluateAttackTest, MatchesEnumeration) {
  Gen gen(127);
  GridMap map(3, 3, 620.0);
  for (int trial = 0; trial < 50; ++trial) {
    ProbVector prior = gen.Prior(9);
    MechanismTable t = RandomTable(9, gen);
    const CellId x = Cell(gen.Int(0, 8));
    for (AttackMode mode : {AttackMode::kOptimal, AttackMode::kBayesian}) {
      TargetedAttack a = EvaluateAttack(prior, t, x, mode, map);
      double success = 0.0, err = 0.0;
      const auto& f = t.For(x);
      for (size_t i = 0; i < f.support.size(); ++i) {
        const CellId g =
            Infer(Posterior(prior, t.Likelihood(f.support[i])), mode, map).inferred;
        success += g == x ? f.probs[i] : 0.0;
        err += f.probs[i] * map.Distance(g, x);
      }
      EXPECT_NEAR(a.success, success, 1e-12);
      EXPECT_NEAR(a.error_m, err, 1e-9);
    }
    StepEvaluation s = EvaluateStep(prior, t, x, map);
    EXPECT_NEAR(s.optimal.error_m,
                EvaluateAttack(prior, t, x, AttackMode::kOptimal, map).error_m, 1e-9);
    EXPECT_NEAR(s.bayesian.success,
                EvaluateAttack(prior, t, x, AttackMode::kBayesian, map).success, 1e-12);
    EXPECT_NEAR(s.p_optimal, PrivacyMetric(prior, t, AttackMode::kOptimal, map), 1e-9);
    EXPECT_NEAR(s.p_bayesian, PrivacyMetric(prior, t, AttackMode::kBayesian, map), 1e-9);
    EXPECT_LE(s.p_optimal, s.p_bayesian + 1e-9);
  }
}

ScenarioConfig SmallScenario() {
  ScenarioConfig c;
  c.name = "small";
  c.map = GridMap(6, 6, 620.0);
  c.history.num_trajectories = 60;
  c.history.length = 15;
  c.history.seed = 5;
  c.sensitive_top_visited = 3;
  c.eval_trajectories = 3;
  c.eval_length = 3;
  c.pipeline.on_infeasible = InfeasiblePolicy::kWholePool;
  return c;
}

TEST(SweepTest, SinglePointMatchesDirectRun) {
  Scenario s = BuildScenario(SmallScenario());
  SweepSpec spec;
  spec.epsilon_s = {2.0};
  spec.e_m = {500.0};
  spec.delta = {0.1};
  spec.seeds = {9};
  spec.trials = 1;
  auto rows = RunSweep(s, spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trials_ok, 1);
  EXPECT_EQ(rows[0].status, "ok");

  BudgetAllocation b = s.Budgets(2.0);
  PipelineConfig cfg = s.config.pipeline;
  cfg.e_m = 500.0;
  PipelineModel model{&s.map(), &s.defender_m, &b};
  PipelineResult run = RunPipeline(s.eval[0], cfg, model, DeriveSeed(9, 0));
  auto steps = EvaluateRun(run, s.learned_m, ProbVector::Uniform(36), s.map());
  double p = 0, q = 0;
  for (const auto& st : steps) {
    p += st.p_optimal;
    q += st.q;
  }
  EXPECT_NEAR(rows[0].p_mean, p / steps.size(), 1e-9);
  EXPECT_NEAR(rows[0].q_mean, q / steps.size(), 1e-9);
  EXPECT_EQ(rows[0].p_std, 0.0);
}

TEST(SweepTest, GridOrderSeedsAndParallelism) {
  Scenario s = BuildScenario(SmallScenario());
  SweepSpec spec;
  spec.epsilon_s = {1.0, 3.0};
  spec.e_m = {300.0};
  spec.delta = {0.1, 0.2};
  spec.seeds = {1, 2};
  spec.trials = 3;
  auto serial = RunSweep(s, spec, 1);
  auto parallel = RunSweep(s, spec, 4);
  ASSERT_EQ(serial.size(), 8u);
  std::ostringstream a, b;
  WriteSweepCsv(a, serial);
  WriteSweepCsv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(serial[0].epsilon_s, 1.0);
  EXPECT_EQ(serial[1].seed, 2u);
  EXPECT_EQ(serial[2].delta, 0.2);
  EXPECT_EQ(serial[4].epsilon_s, 3.0);
  for (const auto& r : serial) {
    EXPECT_GE(r.p_std, 0.0);
    EXPECT_GE(r.q_std, 0.0);
    EXPECT_EQ(r.trials_ok, 3);
  }
  EXPECT_EQ(a.str().substr(0, SweepCsvHeader().size()), SweepCsvHeader());
}

TEST(SweepTest, FailedPointsCarryStatus) {
  ScenarioConfig c = SmallScenario();
  c.pipeline.on_infeasible = InfeasiblePolicy::kFail;
  c.pipeline.em_max_adjustments = 0;
  Scenario s = BuildScenario(c);
  SweepSpec spec;
  spec.e_m = {1e6};
  spec.trials = 2;
  auto rows = RunSweep(s, spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].trials_ok, 0);
  EXPECT_NE(rows[0].status.find("Infeasible"), std::string::npos);
}

TEST(SweepTest, SpecJsonRoundTrip) {
  SweepSpec spec;
  spec.epsilon_s = {0.5, 1.0};
  spec.e_m = {310.0, 620.0};
  spec.delta = {0.05};
  spec.trials = 7;
  spec.seeds = {3, 4};
  spec.attack_mode = AttackMode::kBayesian;
  SweepSpec back = SweepSpec::FromJson(spec.ToJson());
  EXPECT_EQ(back.ToJson(), spec.ToJson());
  EXPECT_THROW(SweepSpec::FromJson("{\"trials\": 0}"), Error);
}

TEST(SummarizeTest, MeanAndSampleDeviation) {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  MeanStd m = Summarize(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std, std::sqrt(5.0 / 3.0), 1e-15);
  std::vector<double> one{7.0};
  EXPECT_EQ(Summarize(one).std, 0.0);
}

TEST(CompareTest, CorrelatedSideMatchesPipelineMechanisms) {
  Scenario s = BuildScenario(SmallScenario());
  BudgetAllocation b = s.Budgets(2.0);
  PipelineConfig cfg = s.config.pipeline;
  PipelineModel model{&s.map(), &s.learned_m, &b};
  ProbVector prior =
      PropagatePrior(ProbVector::OneHot(36, s.eval[0].steps[0].cell), s.learned_m);
  auto cmp = CompareWithUncorrelatedSearch(prior, cfg, model);
  StepMechanisms step = BuildStepMechanisms(prior, cfg, model);
  ASSERT_EQ(cmp.size(), step.dset.cells.size());
  for (size_t i = 0; i < cmp.size(); ++i) {
    EXPECT_EQ(cmp[i].cell, step.dset.cells[i]);
    TargetedAttack a =
        EvaluateAttack(prior, *step.table, cmp[i].cell, AttackMode::kOptimal, s.map());
    EXPECT_EQ(cmp[i].correlated_optimal.error_m, a.error_m);
    EXPECT_GE(cmp[i].uncorrelated_bayesian.success, 0.0);
    EXPECT_LE(cmp[i].uncorrelated_bayesian.success, 1.0 + 1e-12);
  }
}

}  // namespace
}  // namespace trajshield
