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

#include "trajshield/mobility.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "test_util.h"
#include "trajshield/error.h"

namespace trajshield {
namespace {

using testing::Gen;

std::vector<CellId> Cells(std::initializer_list<int> ids) {
  std::vector<CellId> out;
  for (int i : ids) out.push_back(Cell(i));
  return out;
}

TEST(TransitionMatrixTest, CountsAndNormalizes) {
  GridMap map(1, 3, 620.0);
  const int a = 0, b = 1;
  std::vector<Trajectory> trajs{Trajectory::FromCells("u", Cells({a, b, a, b}))};
  TransitionMatrix m = TransitionMatrix::Build(trajs, map);
  EXPECT_EQ(m.Count(Cell(a), Cell(b)), 2);
  EXPECT_EQ(m.Count(Cell(b), Cell(a)), 1);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(a), Cell(b)), 1.0);
  // Never-left cell 2 keeps a self-loop.
  EXPECT_DOUBLE_EQ(m.Prob(Cell(2), Cell(2)), 1.0);
}

TEST(TransitionMatrixTest, RowNormalizationFromCounts) {
  GridMap map(1, 3, 620.0);
  // Row 0 counts [2, 1, 1].
  std::vector<Trajectory> trajs{
      Trajectory::FromCells("u", Cells({0, 0, 0, 1})),
      Trajectory::FromCells("v", Cells({0, 2})),
  };
  TransitionMatrix m = TransitionMatrix::Build(trajs, map);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(0), Cell(0)), 0.5);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(0), Cell(1)), 0.25);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(0), Cell(2)), 0.25);
}

TEST(TransitionMatrixTest, CountsAreAdditiveAcrossTrajectories) {
  GridMap map(3, 3, 620.0);
  Gen gen(3);
  std::vector<Trajectory> all;
  for (int k = 0; k < 5; ++k) {
    std::vector<CellId> cells;
    for (int i = 0; i < 6; ++i) cells.push_back(Cell(gen.Int(0, 8)));
    all.push_back(Trajectory::FromCells("u" + std::to_string(k), cells));
  }
  TransitionMatrix joint = TransitionMatrix::Build(all, map);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      int64_t sum = 0;
      for (const auto& t : all) {
        std::vector<Trajectory> one{t};
        sum += TransitionMatrix::Build(one, map).Count(Cell(i), Cell(j));
      }
      EXPECT_EQ(joint.Count(Cell(i), Cell(j)), sum);
    }
  }
}

TEST(TransitionMatrixTest, SmoothingAndErrors) {
  GridMap map(1, 2, 620.0);
  std::vector<Trajectory> trajs{Trajectory::FromCells("u", Cells({0, 1}))};
  TransitionMatrix m = TransitionMatrix::Build(trajs, map, 1.0);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(0), Cell(1)), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.Prob(Cell(1), Cell(0)), 0.5);
  std::vector<Trajectory> single{Trajectory::FromCells("u", Cells({0}))};
  EXPECT_THROW(TransitionMatrix::Build(single, map), Error);
  EXPECT_THROW(TransitionMatrix::FromProbabilities(2, {0.5, 0.4, 0.0, 1.0}), Error);
  EXPECT_THROW(TransitionMatrix::FromProbabilities(2, {1.0, 0.0, 1.0}), Error);
}

TEST(TransitionMatrixTest, CsvRoundTrip) {
  Gen gen(5);
  TransitionMatrix m = gen.Matrix(6);
  std::stringstream ss;
  m.WriteCsv(ss);
  TransitionMatrix back = TransitionMatrix::ReadCsv(ss);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      EXPECT_EQ(back.Prob(Cell(i), Cell(j)), m.Prob(Cell(i), Cell(j)));
    }
  }
}

TEST(PropagateTest, Examples) {
  Gen gen(1);
  TransitionMatrix m = gen.Matrix(5);
  ProbVector p = PropagatePrior(ProbVector::OneHot(5, Cell(3)), m);
  for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(p.at(j), m.Prob(Cell(3), Cell(j)));

  ProbVector q = gen.Prior(5);
  ProbVector same = PropagatePrior(q, TransitionMatrix::Identity(5));
  for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(same.at(j), q.at(j));

  TransitionMatrix hand = TransitionMatrix::FromProbabilities(2, {0.5, 0.5, 0.0, 1.0});
  ProbVector r = PropagatePrior(ProbVector::Uniform(2), hand);
  EXPECT_DOUBLE_EQ(r.at(0), 0.25);
  EXPECT_DOUBLE_EQ(r.at(1), 0.75);
  EXPECT_THROW(PropagatePrior(ProbVector::Uniform(3), hand), Error);
}

TEST(PropagateTest, MatchesDenseMultiplyAndKeepsMass) {
  Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.Int(1, 20);
    TransitionMatrix m = gen.Matrix(n);
    ProbVector prev = gen.SparsePrior(n, 0.3);
    ProbVector next = PropagatePrior(prev, m);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      double ref = 0.0;
      for (int i = 0; i < n; ++i) ref += prev.at(i) * m.Prob(Cell(i), Cell(j));
      EXPECT_NEAR(next.at(j), ref, 1e-15);
      total += next.at(j);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(PosteriorTest, Examples) {
  std::vector<double> identity_like{0.0, 1.0, 0.0};
  ProbVector p = Posterior(ProbVector::Uniform(3), identity_like);
  EXPECT_DOUBLE_EQ(p.at(1), 1.0);

  std::vector<double> lik{0.6, 0.2};
  ProbVector two = Posterior(ProbVector::Uniform(2), lik);
  EXPECT_DOUBLE_EQ(two.at(0), 0.75);
  EXPECT_DOUBLE_EQ(two.at(1), 0.25);

  std::vector<double> any{0.3, 0.9, 0.1};
  ProbVector kept = Posterior(ProbVector::OneHot(3, Cell(0)), any);
  EXPECT_DOUBLE_EQ(kept.at(0), 1.0);

  std::vector<double> zero{0.0, 0.5, 0.5};
  try {
    Posterior(ProbVector::OneHot(3, Cell(0)), zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroEvidence);
  }
}

TEST(PosteriorTest, MatchesBruteForceBayes) {
  Gen gen(13);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = gen.Int(1, 15);
    ProbVector prior = gen.SparsePrior(n, 0.2);
    std::vector<double> lik(n);
    for (double& l : lik) l = gen.Coin(0.2) ? 0.0 : gen.Uniform();
    double evidence = 0.0;
    for (int i = 0; i < n; ++i) evidence += prior.at(i) * lik[i];
    if (evidence == 0.0) continue;
    ProbVector post = Posterior(prior, lik);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(post.at(i), prior.at(i) * lik[i] / evidence, 1e-12);
    }
  }
}

TEST(DeltaSetTest, Examples) {
  ProbVector p({0.5, 0.3, 0.1, 0.05, 0.05});
  DeltaLocationSet d = ComputeDeltaLocationSet(p, 0.2);
  EXPECT_EQ(d.cells, Cells({0, 1}));
  EXPECT_NEAR(d.covered_mass, 0.8, 1e-12);

  DeltaLocationSet all = ComputeDeltaLocationSet(p, 1e-9);
  EXPECT_EQ(all.size(), 5);

  DeltaLocationSet tie = ComputeDeltaLocationSet(ProbVector::Uniform(4), 0.5);
  EXPECT_EQ(tie.cells, Cells({0, 1}));

  ProbVector sparse({0.0, 0.6, 0.0, 0.4});
  EXPECT_EQ(ComputeDeltaLocationSet(sparse, 1e-9).cells, Cells({1, 3}));
  EXPECT_THROW(ComputeDeltaLocationSet(p, 0.0), Error);
  EXPECT_THROW(ComputeDeltaLocationSet(p, 1.0), Error);
}

// Smallest k for which some k-subset reaches 1 - delta, by enumeration.
int MinimalSize(const ProbVector& p, double delta) {
  const int n = p.size();
  int best = n + 1;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int k = __builtin_popcount(mask);
    if (k >= best) continue;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) mass += p.at(i);
    }
    if (mass >= 1.0 - delta - 1e-12) best = k;
  }
  return best;
}

TEST(DeltaSetTest, MinimalByExhaustiveSearch) {
  Gen gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = gen.Int(1, 12);
    ProbVector p = gen.SparsePrior(n, 0.25);
    const double delta = gen.Uniform(0.001, 0.6);
    DeltaLocationSet d = ComputeDeltaLocationSet(p, delta);
    EXPECT_EQ(d.size(), MinimalSize(p, delta));
    EXPECT_GE(d.covered_mass, 1.0 - delta - 1e-12);
    for (CellId c : d.cells) EXPECT_GT(p[c], 0.0);
  }
}

TEST(DeltaSetTest, SizeNonIncreasingInDelta) {
  Gen gen(19);
  for (int trial = 0; trial < 200; ++trial) {
    ProbVector p = gen.Prior(gen.Int(2, 64));
    int prev = p.size() + 1;
    for (double delta : {0.01, 0.05, 0.1, 0.2}) {
      const int size = ComputeDeltaLocationSet(p, delta).size();
      EXPECT_LE(size, prev);
      prev = size;
    }
  }
}

TEST(SurrogateTest, Examples) {
  GridMap map(3, 3, 620.0);
  DeltaLocationSet d;
  d.cells = Cells({3, 5});
  EXPECT_EQ(SurrogateLocation(Cell(5), d, map), Cell(5));
  // Cell 4 sits midway between 3 and 5.
  EXPECT_EQ(SurrogateLocation(Cell(4), d, map), Cell(3));
  DeltaLocationSet far;
  far.cells = Cells({1, 8});
  // From 2: cell 1 at 620 m, cell 8 at 1240 m.
  EXPECT_EQ(SurrogateLocation(Cell(2), far, map), Cell(1));
  DeltaLocationSet empty;
  EXPECT_THROW(SurrogateLocation(Cell(0), empty, map), Error);
}

TEST(TrajectoryCsvTest, RoundTripAndValidation) {
  std::vector<Trajectory> trajs{Trajectory::FromCells("a", Cells({1, 2, 3})),
                                Trajectory::FromCells("b", Cells({4, 4}))};
  std::stringstream ss;
  WriteTrajectoriesCsv(ss, trajs);
  std::vector<Trajectory> back = ReadTrajectoriesCsv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].user_id, "a");
  EXPECT_EQ(back[0].Cells(), Cells({1, 2, 3}));
  EXPECT_EQ(back[1].Cells(), Cells({4, 4}));

  std::istringstream two("t,cell_index\n0,5\n1,6\n");
  std::vector<Trajectory> single = ReadTrajectoriesCsv(two);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].Cells(), Cells({5, 6}));

  std::istringstream backwards("0,5\n0,6\n");
  EXPECT_THROW(ReadTrajectoriesCsv(backwards), Error);
  std::istringstream junk("0,5\nx,y\n");
  EXPECT_THROW(ReadTrajectoriesCsv(junk), Error);
}

TEST(ProbVectorTest, Validation) {
  EXPECT_THROW(ProbVector({0.5, 0.4}), Error);
  EXPECT_THROW(ProbVector({1.5, -0.5}), Error);
  EXPECT_THROW(ProbVector::FromWeights({0.0, 0.0}), Error);
  ProbVector w = ProbVector::FromWeights({1.0, 3.0});
  EXPECT_DOUBLE_EQ(w.at(1), 0.75);
}

}  // namespace
}  // namespace trajshield
