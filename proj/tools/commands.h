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

// Subcommands of the trajshield command-line tool. Each returns a process
// exit code: 0 on success, 2 for configuration or input errors, 3 when a
// release step is infeasible.

#ifndef TRAJSHIELD_TOOLS_COMMANDS_H_
#define TRAJSHIELD_TOOLS_COMMANDS_H_

#include <cstdint>
#include <string>

namespace trajshield::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;

struct IngestOptions {
  std::string input;
  std::string format = "tdrive";
  std::string map_config;
  std::string out;
  std::string report;  // defaults to <out>.report.json
};

struct RunOptions {
  std::string trajectory;
  std::string map_config;
  std::string graph;      // 4-neighbour grid when empty
  std::string sensitive;  // every cell gets epsilon_default when empty
  std::string history;    // defaults to the trajectory file
  std::string user;       // first trajectory when empty
  double epsilon_s = 1.0;
  double epsilon_default = 1.0;
  double e_m = 620.0;
  double delta = 0.1;
  double smoothing = 0.0;
  std::string mechanism = "pf";
  std::string on_infeasible = "fail";
  uint64_t seed = 1;
  std::string out;
  std::string summary;  // defaults to <out> with .summary.json
};

struct SweepOptions {
  std::string config;
  std::string out_dir;
  int parallel = 1;
};

struct GenOptions {
  int rows = 16;
  int cols = 16;
  double cell_size_m = 620.0;
  int num_trajectories = 100;
  int length = 40;
  double momentum = 0.7;
  double stay_prob = 0.1;
  uint64_t seed = 1;
  std::string out;
  std::string map_out;
};

int RunIngest(const IngestOptions& opts);
int RunRelease(const RunOptions& opts);
int RunSweepCommand(const SweepOptions& opts);
int RunGen(const GenOptions& opts);

}  // namespace trajshield::cli

#endif  // TRAJSHIELD_TOOLS_COMMANDS_H_
