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

// End-to-end checks of the command-line tool. TRAJSHIELD_CLI is the path of
// the built binary.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajshield/grid_map.h"
#include "trajshield/ingest.h"
#include "trajshield/mobility.h"

namespace trajshield {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("trajshield_cli_" + std::to_string(getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the tool with `args`; stderr goes to err.txt.
  int Cli(const std::string& args) {
    const std::string cmd = std::string("\"") + TRAJSHIELD_CLI + "\" " + args + " 2> \"" +
                            Path("err.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Read(const std::string& name) const {
    std::ifstream in(Path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  void Write(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name), std::ios::binary) << text;
  }

  // An 8x8 world with 100 walks of 20 steps.
  void MakeHistory() {
    ASSERT_EQ(Cli("gen --rows 8 --cols 8 --num 100 --length 20 --seed 3 --out " +
                  Path("h.csv") + " --map-out " + Path("map.json")),
              0);
  }

  std::string RunArgs(const std::string& out) const {
    return "run --trajectory " + Path("h.csv") + " --map-config " + Path("map.json") +
           " --user w5 --on-infeasible pool --out " + Path(out);
  }

  fs::path dir_;
};

TEST_F(CliTest, GenWritesBannerAndIsDeterministic) {
  MakeHistory();
  const std::string first = Read("h.csv");
  EXPECT_EQ(first.rfind("# trajshield ", 0), 0u);
  EXPECT_NE(first.find("config_hash="), std::string::npos);
  std::istringstream in(first);
  const auto trajs = ReadTrajectoriesCsv(in);
  ASSERT_EQ(trajs.size(), 100u);
  EXPECT_EQ(trajs[0].steps.size(), 20u);
  MakeHistory();
  EXPECT_EQ(Read("h.csv"), first);
  const GridMap map = GridMap::FromJson(Read("map.json"));
  EXPECT_EQ(map.num_cells(), 64);
}

TEST_F(CliTest, RunIsByteIdenticalAcrossInvocations) {
  MakeHistory();
  ASSERT_EQ(Cli(RunArgs("a.jsonl")), 0) << Read("err.txt");
  ASSERT_EQ(Cli(RunArgs("b.jsonl")), 0);
  EXPECT_EQ(Read("a.jsonl"), Read("b.jsonl"));
  EXPECT_EQ(Read("a.summary.json"), Read("b.summary.json"));

  std::istringstream lines(Read("a.jsonl"));
  std::string header;
  std::getline(lines, header);
  const json h = json::parse(header);
  EXPECT_TRUE(h.contains("trajshield_version"));
  EXPECT_EQ(h["config_hash"].get<std::string>().size(), 16u);
  int records = 0;
  for (std::string line; std::getline(lines, line);) ++records;
  EXPECT_EQ(records, 20);
  const json summary = json::parse(Read("a.summary.json"));
  EXPECT_EQ(summary["config_hash"], h["config_hash"]);
  EXPECT_EQ(summary["steps"], 20);
  EXPECT_TRUE(summary["pls_stage"].get<bool>());
}

TEST_F(CliTest, SeedChangesHashAndOutput) {
  MakeHistory();
  ASSERT_EQ(Cli(RunArgs("a.jsonl")), 0);
  ASSERT_EQ(Cli(RunArgs("b.jsonl") + " --seed 2"), 0);
  const json a = json::parse(Read("a.summary.json"));
  const json b = json::parse(Read("b.summary.json"));
  EXPECT_NE(a["config_hash"], b["config_hash"]);
}

TEST_F(CliTest, UniformModeIsNotedInSummary) {
  MakeHistory();
  ASSERT_EQ(Cli(RunArgs("u.jsonl") + " --mechanism uniform"), 0);
  const json s = json::parse(Read("u.summary.json"));
  EXPECT_FALSE(s["pls_stage"].get<bool>());
  EXPECT_NE(s["note"].get<std::string>().find("uniform"), std::string::npos);
  EXPECT_DOUBLE_EQ(s["total_privacy_cost"].get<double>(), 0.0);
}

TEST_F(CliTest, MissingGraphFileExitsTwoAndNamesThePath) {
  MakeHistory();
  const std::string missing = Path("no_such_graph.txt");
  EXPECT_EQ(Cli(RunArgs("a.jsonl") + " --graph " + missing), 2);
  EXPECT_NE(Read("err.txt").find(missing), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("a.jsonl")));
}

TEST_F(CliTest, InfeasibleReleaseExitsThree) {
  MakeHistory();
  EXPECT_EQ(Cli("run --trajectory " + Path("h.csv") + " --map-config " +
                Path("map.json") + " --e-m 100000 --out " + Path("x.jsonl")),
            3);
  EXPECT_NE(Read("err.txt").find("Infeasible"), std::string::npos);
}

TEST_F(CliTest, BadArgumentsExitTwo) {
  EXPECT_EQ(Cli("run"), 2);
  MakeHistory();
  EXPECT_EQ(Cli(RunArgs("a.jsonl") + " --mechanism laplace"), 2);
  EXPECT_EQ(Cli(RunArgs("a.jsonl") + " --delta 1.5"), 2);
}

TEST_F(CliTest, RunWithGraphAndSensitiveCells) {
  MakeHistory();
  std::string edges;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c + 1 < 8; ++c) {
      edges += std::to_string(r * 8 + c) + " " + std::to_string(r * 8 + c + 1) + "\n";
      edges += std::to_string(r * 8 + c + 1) + " " + std::to_string(r * 8 + c) + "\n";
    }
  }
  Write("graph.txt", edges);
  Write("sensitive.txt", "27,4\n36,2\n");
  ASSERT_EQ(Cli(RunArgs("a.jsonl") + " --graph " + Path("graph.txt") + " --sensitive " +
                Path("sensitive.txt") + " --epsilon-s 2"),
            0)
      << Read("err.txt");
  ASSERT_EQ(Cli(RunArgs("b.jsonl")), 0);
  EXPECT_NE(json::parse(Read("a.summary.json"))["config_hash"],
            json::parse(Read("b.summary.json"))["config_hash"]);
}

TEST_F(CliTest, SweepParallelMatchesSerial) {
  Write("sweep.json", R"({
    "scenario": {"name": "tiny", "map": {"rows": 6, "cols": 6, "cell_size_m": 620},
                 "history": {"num_trajectories": 60, "length": 15, "seed": 2},
                 "sensitive_top_visited": 4,
                 "eval": {"trajectories": 4, "length": 4, "seed": 3},
                 "pipeline": {"on_infeasible": "pool"}},
    "sweep": {"epsilon_s": [0.5, 2], "e_m": [310, 620], "delta": [0.1],
              "trials": 3, "seeds": [1, 2]}})");
  ASSERT_EQ(Cli("sweep --config " + Path("sweep.json") + " --out-dir " + Path("s1")), 0)
      << Read("err.txt");
  ASSERT_EQ(Cli("sweep --config " + Path("sweep.json") + " --out-dir " + Path("s3") +
                " --parallel 3"),
            0);
  const std::string serial = Read("s1/tiny_sweep.csv");
  EXPECT_EQ(serial, Read("s3/tiny_sweep.csv"));
  EXPECT_EQ(serial.rfind("# trajshield ", 0), 0u);
  int lines = 0;
  for (char ch : serial) lines += ch == '\n';
  EXPECT_EQ(lines, 2 + 8);  // banner, column header, 2x2x1 grid x 2 seeds
  const json manifest = json::parse(Read("s1/manifest.json"));
  EXPECT_EQ(manifest["rows"], 8);
  EXPECT_EQ(manifest["seeds"], json::array({1, 2}));
  EXPECT_EQ(manifest["config_hash"],
            json::parse(Read("s3/manifest.json"))["config_hash"]);
}

TEST_F(CliTest, IngestRoundTrip) {
  const GridMap map(10, 10, 620.0, {39.85, 116.30}, 177.0);
  Write("map.json", map.ToJson());
  std::vector<CellId> cells;
  for (int k = 0; k < 25; ++k) cells.push_back(Cell((k * 37) % 100));
  const Trajectory truth = Trajectory::FromCells("9", cells);
  Rng rng(5);
  const auto fixes = SynthesizeFixes(truth, map, 1201959044, 3, rng, "9");
  std::ostringstream log;
  WriteTDrive(log, fixes);
  Write("9.txt", log.str() + "9,garbage\n");
  ASSERT_EQ(Cli("ingest --input " + Path("9.txt") + " --format tdrive --map-config " +
                Path("map.json") + " --out " + Path("n.csv")),
            0)
      << Read("err.txt");
  std::istringstream in(Read("n.csv"));
  const auto back = ReadTrajectoriesCsv(in);
  ASSERT_EQ(back.size(), 1u);
  ASSERT_EQ(back[0].steps.size(), cells.size());
  for (size_t k = 0; k < cells.size(); ++k) EXPECT_EQ(back[0].steps[k].cell, cells[k]);
  const json report = json::parse(Read("n.report.json"));
  EXPECT_EQ(report["dropped"], 1);
  EXPECT_EQ(report["errors"][0]["line"], static_cast<int>(fixes.size()) + 1);
  EXPECT_TRUE(report.contains("config_hash"));
}

TEST_F(CliTest, MalformedOnlyIngestExitsTwoAndReportsEveryLine) {
  Write("map.json", GridMap(4, 4, 620.0).ToJson());
  Write("bad.txt", "x\n1,2,3\n1,2008-02-02 13:30:44,abc,1\n");
  EXPECT_EQ(Cli("ingest --input " + Path("bad.txt") + " --map-config " +
                Path("map.json") + " --out " + Path("n.csv")),
            2);
  const json report = json::parse(Read("n.report.json"));
  ASSERT_EQ(report["errors"].size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(report["errors"][k]["line"], k + 1);
  EXPECT_TRUE(report.contains("error"));
  EXPECT_FALSE(fs::exists(Path("n.csv")));
}

TEST_F(CliTest, IngestOutsideMapExitsTwo) {
  Write("map.json", GridMap(4, 4, 620.0, {39.85, 116.30}).ToJson());
  Write("far.txt", "1,2008-02-02 13:30:44,10.0,10.0\n");
  EXPECT_EQ(Cli("ingest --input " + Path("far.txt") + " --map-config " +
                Path("map.json") + " --out " + Path("n.csv")),
            2);
  EXPECT_NE(Read("err.txt").find("NoInBoundsFixes"), std::string::npos);
}

}  // namespace
}  // namespace trajshield
