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

#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <thread>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

namespace {

using nlohmann::json;

void CheckCoverage(const ProbVector& prior, const MechanismTable& mech) {
  if (prior.size() != mech.num_cells()) {
    throw Error(ErrorCode::kDimensionMismatch, "prior size differs from mechanism table");
  }
  for (int x = 0; x < prior.size(); ++x) {
    if (prior.at(x) > 0.0 && !mech.Has(Cell(x))) {
      throw Error(ErrorCode::kMissingMechanism,
                  "no perturbation distribution for cell " + std::to_string(x));
    }
  }
}

// Joint weights Pr(x) f(x'|x) for one output; nullopt when they vanish.
std::optional<ProbVector> PosteriorForOutput(const ProbVector& prior,
                                             const MechanismTable& mech, CellId output,
                                             double* mass) {
  std::vector<double> w = mech.Likelihood(output);
  double total = 0.0;
  for (int x = 0; x < prior.size(); ++x) {
    w[x] *= prior.at(x);
    total += w[x];
  }
  *mass = total;
  if (!(total > 0.0)) return std::nullopt;
  return ProbVector::FromWeights(std::move(w));
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

double PrivacyMetric(const ProbVector& prior, const MechanismTable& mech, AttackMode mode,
                     const GridMap& map) {
  CheckCoverage(prior, mech);
  double p = 0.0;
  for (CellId out : mech.Outputs()) {
    double mass = 0.0;
    const auto post = PosteriorForOutput(prior, mech, out, &mass);
    if (!post) continue;
    p += mass * Infer(*post, mode, map).expected_error_m;
  }
  return p;
}

double QosLoss(const ProbVector& prior, const MechanismTable& mech, const GridMap& map) {
  CheckCoverage(prior, mech);
  double q = 0.0;
  for (int x = 0; x < prior.size(); ++x) {
    if (prior.at(x) == 0.0) continue;
    const PerturbationDistribution& d = mech.For(Cell(x));
    for (size_t i = 0; i < d.support.size(); ++i) {
      q += prior.at(x) * d.probs[i] * map.Distance(Cell(x), d.support[i]);
    }
  }
  return q;
}

TargetedAttack EvaluateAttack(const ProbVector& prior, const MechanismTable& mech,
                              CellId true_cell, AttackMode mode, const GridMap& map) {
  CheckCoverage(prior, mech);
  const PerturbationDistribution& f = mech.For(true_cell);
  TargetedAttack out;
  for (size_t i = 0; i < f.support.size(); ++i) {
    if (f.probs[i] == 0.0) continue;
    double mass = 0.0;
    const auto post = PosteriorForOutput(prior, mech, f.support[i], &mass);
    // Evidence the attacker deems impossible leaves it with its prior.
    const CellId guess = Infer(post ? *post : prior, mode, map).inferred;
    out.success += guess == true_cell ? f.probs[i] : 0.0;
    out.error_m += f.probs[i] * map.Distance(guess, true_cell);
  }
  return out;
}

StepEvaluation EvaluateStep(const ProbVector& prior, const MechanismTable& mech,
                            CellId true_cell, const GridMap& map) {
  CheckCoverage(prior, mech);
  StepEvaluation out;
  const PerturbationDistribution& f = mech.For(true_cell);
  for (CellId o : mech.Outputs()) {
    double mass = 0.0;
    const auto post = PosteriorForOutput(prior, mech, o, &mass);
    const double f_true = f.ProbOf(o);
    if (!post && f_true == 0.0) continue;
    const ProbVector& belief = post ? *post : prior;
    const Inference opt = OptimalInference(belief, map);
    const CellId bay = BayesianInference(belief);
    if (post) {
      out.p_optimal += mass * opt.expected_error_m;
      out.p_bayesian += mass * ExpectedError(belief, bay, map);
    }
    if (f_true > 0.0) {
      out.optimal.success += opt.inferred == true_cell ? f_true : 0.0;
      out.optimal.error_m += f_true * map.Distance(opt.inferred, true_cell);
      out.bayesian.success += bay == true_cell ? f_true : 0.0;
      out.bayesian.error_m += f_true * map.Distance(bay, true_cell);
    }
  }
  out.q = QosLoss(prior, mech, map);
  return out;
}

std::vector<StepEvaluation> EvaluateRun(const PipelineResult& run,
                                        const TransitionMatrix& attacker_m,
                                        const ProbVector& attacker_initial,
                                        const GridMap& map) {
  std::vector<StepEvaluation> out;
  out.reserve(run.records.size());
  ProbVector belief = attacker_initial;
  for (size_t t = 0; t < run.records.size(); ++t) {
    const ReleaseRecord& r = run.records[t];
    try {
      const ProbVector prior = PropagatePrior(belief, attacker_m);
      StepEvaluation e = EvaluateStep(prior, *run.tables[t], r.true_cell, map);
      e.t = r.t;
      e.dset_size = r.dset_size;
      e.pls_diameter_m = r.pls.diameter_m;
      out.push_back(e);
      belief = Posterior(prior, run.tables[t]->Likelihood(r.released));
    } catch (const Error& e) {
      if (e.step() >= 0) throw;
      throw e.WithStep(r.t);
    }
  }
  return out;
}

std::vector<LocationComparison> CompareWithUncorrelatedSearch(
    const ProbVector& prior, const PipelineConfig& cfg, const PipelineModel& model) {
  const GridMap& map = *model.map;
  const ProbVector flat = ProbVector::Uniform(map.num_cells());
  const StepMechanisms correlated = BuildStepMechanisms(prior, cfg, model);
  // Same E_m for both: the uncorrelated search starts where the correlated
  // one settled after its retries.
  PipelineConfig pinned = cfg;
  pinned.e_m = correlated.e_m_used;
  const StepMechanisms uncorrelated = BuildStepMechanisms(prior, pinned, model, &flat);
  std::vector<LocationComparison> out;
  out.reserve(correlated.dset.cells.size());
  for (CellId x : correlated.dset.cells) {
    LocationComparison c;
    c.cell = x;
    c.correlated_optimal =
        EvaluateAttack(prior, *correlated.table, x, AttackMode::kOptimal, map);
    c.uncorrelated_optimal =
        EvaluateAttack(prior, *uncorrelated.table, x, AttackMode::kOptimal, map);
    c.correlated_bayesian =
        EvaluateAttack(prior, *correlated.table, x, AttackMode::kBayesian, map);
    c.uncorrelated_bayesian =
        EvaluateAttack(prior, *uncorrelated.table, x, AttackMode::kBayesian, map);
    out.push_back(c);
  }
  return out;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

SweepSpec SweepSpec::FromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    SweepSpec s;
    if (j.contains("epsilon_s"))
      s.epsilon_s = j.at("epsilon_s").get<std::vector<double>>();
    if (j.contains("e_m")) s.e_m = j.at("e_m").get<std::vector<double>>();
    if (j.contains("delta")) s.delta = j.at("delta").get<std::vector<double>>();
    s.trials = j.value("trials", s.trials);
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    s.attack_mode = ParseAttackMode(j.value("attack_mode", std::string("optimal")));
    if (s.epsilon_s.empty() || s.e_m.empty() || s.delta.empty() || s.seeds.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "sweep grid and seeds must be nonempty");
    }
    if (s.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("sweep spec: ") + e.what());
  }
}

std::string SweepSpec::ToJson() const {
  json j = {{"epsilon_s", epsilon_s},
            {"e_m", e_m},
            {"delta", delta},
            {"trials", trials},
            {"seeds", seeds},
            {"attack_mode", std::string(AttackModeName(attack_mode))}};
  return j.dump();
}

SweepRow RunSweepPoint(const Scenario& scenario, const SweepSpec& spec, double epsilon_s,
                       double e_m, double delta, uint64_t seed) {
  SweepRow row;
  row.scenario = scenario.config.name;
  row.epsilon_s = epsilon_s;
  row.e_m = e_m;
  row.delta = delta;
  row.seed = seed;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> dset;
  std::vector<double> diam;
  std::vector<double> success;
  std::string first_error;
  try {
    const BudgetAllocation budgets = scenario.Budgets(epsilon_s);
    PipelineConfig cfg = scenario.config.pipeline;
    cfg.e_m = e_m;
    cfg.delta = delta;
    cfg.Validate();
    const PipelineModel model{&scenario.map(), &scenario.defender_m, &budgets};
    const ProbVector attacker_initial = InitialPosterior(cfg, scenario.map());
    if (scenario.eval.empty()) {
      throw Error(ErrorCode::kEmptyInput, "scenario has no evaluation trajectories");
    }
    for (int k = 0; k < spec.trials; ++k) {
      const Trajectory& traj = scenario.eval[k % scenario.eval.size()];
      try {
        const PipelineResult run =
            RunPipeline(traj, cfg, model, DeriveSeed(seed, static_cast<uint64_t>(k)));
        const auto steps =
            EvaluateRun(run, scenario.learned_m, attacker_initial, scenario.map());
        double sp = 0, sq = 0, sd = 0, sdiam = 0, ss = 0;
        for (const auto& s : steps) {
          sp += spec.attack_mode == AttackMode::kOptimal ? s.p_optimal : s.p_bayesian;
          sq += s.q;
          sd += s.dset_size;
          sdiam += s.pls_diameter_m;
          ss += s.bayesian.success;
        }
        const double n = static_cast<double>(steps.size());
        p.push_back(sp / n);
        q.push_back(sq / n);
        dset.push_back(sd / n);
        diam.push_back(sdiam / n);
        success.push_back(ss / n);
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
  } catch (const Error& e) {
    first_error = e.what();
  }
  row.trials_ok = static_cast<int>(p.size());
  if (row.trials_ok == 0) {
    row.status = first_error.empty() ? "no trials" : first_error;
    return row;
  }
  const MeanStd ps = Summarize(p);
  const MeanStd qs = Summarize(q);
  row.p_mean = ps.mean;
  row.p_std = ps.std;
  row.q_mean = qs.mean;
  row.q_std = qs.std;
  row.dset_size_mean = Summarize(dset).mean;
  row.pls_diam_mean = Summarize(diam).mean;
  row.attack_success_mean = Summarize(success).mean;
  if (row.trials_ok < spec.trials) row.status = "partial: " + first_error;
  return row;
}

std::vector<SweepRow> RunSweep(const Scenario& scenario, const SweepSpec& spec,
                               int workers) {
  struct Task {
    double epsilon_s, e_m, delta;
    uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double eps : spec.epsilon_s) {
    for (double em : spec.e_m) {
      for (double d : spec.delta) {
        for (uint64_t s : spec.seeds) tasks.push_back({eps, em, d, s});
      }
    }
  }
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      rows[i] = RunSweepPoint(scenario, spec, t.epsilon_s, t.e_m, t.delta, t.seed);
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (n == 1) {
    work();
    return rows;
  }
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return rows;
}

std::string SweepCsvHeader() {
  return "scenario,epsilon_s,e_m,delta,seed,p_mean,p_std,q_mean,q_std,"
         "dset_size_mean,pls_diam_mean,attack_success_mean,trials_ok,status";
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepRow> rows) {
  out << SweepCsvHeader() << "\n";
  for (const SweepRow& r : rows) {
    std::string status = r.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    out << r.scenario << ',' << FormatDouble(r.epsilon_s) << ',' << FormatDouble(r.e_m)
        << ',' << FormatDouble(r.delta) << ',' << r.seed << ',' << FormatDouble(r.p_mean)
        << ',' << FormatDouble(r.p_std) << ',' << FormatDouble(r.q_mean) << ','
        << FormatDouble(r.q_std) << ',' << FormatDouble(r.dset_size_mean) << ','
        << FormatDouble(r.pls_diam_mean) << ',' << FormatDouble(r.attack_success_mean)
        << ',' << r.trials_ok << ',' << status << "\n";
  }
}

}  // namespace trajshield
