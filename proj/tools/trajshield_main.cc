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

#include <iostream>

#include "CLI11.hpp"
#include "commands.h"
#include "trajshield/version.h"

int main(int argc, char** argv) {
  namespace cli = trajshield::cli;
  CLI::App app{"Trajectory location-privacy release and evaluation"};
  app.set_version_flag("--version", std::string(trajshield::kVersion));
  app.require_subcommand(1);

  cli::IngestOptions ingest;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Discretize a GPS log into grid trajectories");
  ingest_cmd->add_option("--input", ingest.input, "GPS log file")->required();
  ingest_cmd->add_option("--format", ingest.format, "tdrive or geolife")
      ->check(CLI::IsMember({"tdrive", "geolife"}));
  ingest_cmd->add_option("--map-config", ingest.map_config, "Map config JSON")
      ->required();
  ingest_cmd->add_option("--out", ingest.out, "Trajectory CSV to write")->required();
  ingest_cmd->add_option("--report", ingest.report, "Ingestion report JSON");

  cli::RunOptions run;
  auto* run_cmd =
      app.add_subcommand("run", "Release a trajectory and evaluate the attacks");
  run_cmd->add_option("--trajectory", run.trajectory, "Trajectory CSV")->required();
  run_cmd->add_option("--map-config", run.map_config, "Map config JSON")->required();
  run_cmd->add_option("--graph", run.graph, "Road graph edge list");
  run_cmd->add_option("--sensitive", run.sensitive, "Sensitive cells file");
  run_cmd->add_option("--history", run.history, "Mobility history CSV");
  run_cmd->add_option("--user", run.user, "User id to release");
  run_cmd->add_option("--epsilon-s", run.epsilon_s, "Total sensitive budget");
  run_cmd->add_option("--epsilon-default", run.epsilon_default,
                      "Budget of cells without an allocation");
  run_cmd->add_option("--e-m", run.e_m, "Inference error bound in meters");
  run_cmd->add_option("--delta", run.delta, "Delta-location set parameter");
  run_cmd->add_option("--smoothing", run.smoothing, "Transition count smoothing");
  run_cmd->add_option("--mechanism", run.mechanism, "pf, exp or uniform")
      ->check(CLI::IsMember({"pf", "exp", "uniform"}));
  run_cmd->add_option("--on-infeasible", run.on_infeasible, "fail or pool")
      ->check(CLI::IsMember({"fail", "pool"}));
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--out", run.out, "Release records JSONL")->required();
  run_cmd->add_option("--summary", run.summary, "Summary JSON");

  cli::SweepOptions sweep;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run a parameter sweep on a synthetic scenario");
  sweep_cmd->add_option("--config", sweep.config, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory")->required();
  sweep_cmd->add_option("--parallel", sweep.parallel, "Worker threads")
      ->check(CLI::PositiveNumber);

  cli::GenOptions gen;
  auto* gen_cmd =
      app.add_subcommand("gen", "Generate random-walk trajectories on a grid");
  gen_cmd->add_option("--rows", gen.rows, "Grid rows");
  gen_cmd->add_option("--cols", gen.cols, "Grid columns");
  gen_cmd->add_option("--cell-size", gen.cell_size_m, "Cell side in meters");
  gen_cmd->add_option("--num", gen.num_trajectories, "Number of trajectories");
  gen_cmd->add_option("--length", gen.length, "Steps per trajectory");
  gen_cmd->add_option("--momentum", gen.momentum,
                      "Probability of repeating the last move");
  gen_cmd->add_option("--stay", gen.stay_prob, "Probability of staying put");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Trajectory CSV to write")->required();
  gen_cmd->add_option("--map-out", gen.map_out, "Also write the map config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitInput;
  }

  if (*ingest_cmd) return cli::RunIngest(ingest);
  if (*run_cmd) return cli::RunRelease(run);
  if (*sweep_cmd) return cli::RunSweepCommand(sweep);
  return cli::RunGen(gen);
}
