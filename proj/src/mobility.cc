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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "trajshield/error.h"

namespace trajshield {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kMassSlack = 1e-12;

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool ParseLong(const std::string& s, long& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end != nullptr && *end == '\0';
}

}  // namespace

Trajectory Trajectory::FromCells(std::string user_id, std::span<const CellId> cells) {
  Trajectory tr{std::move(user_id), {}};
  tr.steps.reserve(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    tr.steps.push_back({static_cast<int>(i), cells[i]});
  }
  return tr;
}

void Trajectory::Validate() const {
  for (size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].t <= steps[i - 1].t) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trajectory '" + user_id + "': timesteps must strictly increase");
    }
  }
}

std::vector<CellId> Trajectory::Cells() const {
  std::vector<CellId> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.cell);
  return out;
}

std::vector<Trajectory> ReadTrajectoriesCsv(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitCsv(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    std::string user = "0";
    long t = 0;
    long cell = 0;
    bool ok = false;
    if (fields.size() == 2) {
      ok = ParseLong(fields[0], t) && ParseLong(fields[1], cell);
    } else if (fields.size() == 3) {
      user = fields[0];
      ok = ParseLong(fields[1], t) && ParseLong(fields[2], cell);
    }
    if (!ok) {
      // A non-numeric first row is a header.
      if (lineno == 1 || (out.empty() && fields.back() == "cell_index")) continue;
      throw Error(ErrorCode::kParseError,
                  "trajectory CSV line " + std::to_string(lineno));
    }
    if (out.empty() || out.back().user_id != user) out.push_back({user, {}});
    out.back().steps.push_back({static_cast<int>(t), Cell(static_cast<int>(cell))});
  }
  for (const auto& tr : out) tr.Validate();
  return out;
}

std::vector<Trajectory> LoadTrajectoriesCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open trajectory file " + path);
  return ReadTrajectoriesCsv(in);
}

void WriteTrajectoriesCsv(std::ostream& out, std::span<const Trajectory> trajs) {
  out << "user_id,t,cell_index\n";
  for (const auto& tr : trajs) {
    for (const auto& s : tr.steps) {
      out << tr.user_id << ',' << s.t << ',' << Index(s.cell) << '\n';
    }
  }
}

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "probability entries must be >= 0");
    }
  }
  if (std::abs(Sum() - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "probabilities must sum to 1");
  }
}

ProbVector ProbVector::Uniform(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "empty distribution");
  return ProbVector(std::vector<double>(n, 1.0 / n));
}

ProbVector ProbVector::OneHot(int n, CellId c) {
  if (Index(c) < 0 || Index(c) >= n) {
    throw Error(ErrorCode::kOutOfBounds, "one-hot cell out of range");
  }
  std::vector<double> p(n, 0.0);
  p[Index(c)] = 1.0;
  return ProbVector(std::move(p));
}

ProbVector ProbVector::FromWeights(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroMass, "weights sum to zero");
  for (double& w : weights) w /= total;
  ProbVector out;
  out.p_ = std::move(weights);
  return out;
}

double ProbVector::Sum() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

TransitionMatrix::TransitionMatrix(int n, std::vector<int64_t> counts,
                                   std::vector<double> probs)
    : n_(n), counts_(std::move(counts)), probs_(std::move(probs)) {}

TransitionMatrix TransitionMatrix::Build(std::span<const Trajectory> trajectories,
                                         const GridMap& map, double smoothing) {
  if (smoothing < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be >= 0");
  }
  const int n = map.num_cells();
  const size_t nn = static_cast<size_t>(n) * n;
  std::vector<int64_t> counts(nn, 0);
  bool any_pair = false;
  for (const auto& tr : trajectories) {
    tr.Validate();
    for (const auto& s : tr.steps) map.CheckCell(s.cell);
    for (size_t k = 1; k < tr.steps.size(); ++k) {
      ++counts[static_cast<size_t>(Index(tr.steps[k - 1].cell)) * n +
               Index(tr.steps[k].cell)];
      any_pair = true;
    }
  }
  if (!any_pair) {
    throw Error(ErrorCode::kEmptyInput,
                "need at least one trajectory with two or more steps");
  }
  std::vector<double> probs(nn, 0.0);
  for (int i = 0; i < n; ++i) {
    const size_t base = static_cast<size_t>(i) * n;
    int64_t row_sum = 0;
    for (int j = 0; j < n; ++j) row_sum += counts[base + j];
    if (smoothing > 0.0) {
      const double denom = static_cast<double>(row_sum) + n * smoothing;
      for (int j = 0; j < n; ++j) {
        probs[base + j] = (static_cast<double>(counts[base + j]) + smoothing) / denom;
      }
    } else if (row_sum == 0) {
      probs[base + i] = 1.0;
    } else {
      for (int j = 0; j < n; ++j) {
        probs[base + j] =
            static_cast<double>(counts[base + j]) / static_cast<double>(row_sum);
      }
    }
  }
  return TransitionMatrix(n, std::move(counts), std::move(probs));
}

TransitionMatrix TransitionMatrix::FromProbabilities(int n, std::vector<double> probs) {
  if (n < 1 || probs.size() != static_cast<size_t>(n) * n) {
    throw Error(ErrorCode::kDimensionMismatch, "transition matrix must be n x n");
  }
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = probs[static_cast<size_t>(i) * n + j];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "transition probabilities must be >= 0");
      }
      row += v;
    }
    if (std::abs(row - 1.0) > kSumTolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
  return TransitionMatrix(n, {}, std::move(probs));
}

TransitionMatrix TransitionMatrix::Identity(int n) {
  std::vector<double> p(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i) * n + i] = 1.0;
  return FromProbabilities(n, std::move(p));
}

TransitionMatrix TransitionMatrix::Uniform(int n) {
  return FromProbabilities(n, std::vector<double>(static_cast<size_t>(n) * n, 1.0 / n));
}

void TransitionMatrix::WriteCsv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (j) out << ',';
      out << probs_[static_cast<size_t>(i) * n_ + j];
    }
    out << '\n';
  }
  out.precision(old_precision);
}

TransitionMatrix TransitionMatrix::ReadCsv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  int rows = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = SplitCsv(line);
    if (rows == 0) width = fields.size();
    if (fields.size() != width) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged transition matrix CSV");
    }
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0') {
        throw Error(ErrorCode::kParseError, "bad number '" + f + "' in matrix CSV");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (static_cast<size_t>(rows) != width) {
    throw Error(ErrorCode::kDimensionMismatch, "transition matrix CSV is not square");
  }
  return FromProbabilities(rows, std::move(values));
}

ProbVector PropagatePrior(const ProbVector& posterior_prev, const TransitionMatrix& m) {
  const int n = m.size();
  if (posterior_prev.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "prior has " + std::to_string(posterior_prev.size()) +
                    " entries, matrix has " + std::to_string(n));
  }
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = posterior_prev.at(i);
    if (w == 0.0) continue;
    const auto row = m.Row(Cell(i));
    for (int j = 0; j < n; ++j) out[j] += w * row[j];
  }
  return ProbVector(std::move(out));
}

ProbVector Posterior(const ProbVector& prior, std::span<const double> likelihood) {
  if (likelihood.size() != static_cast<size_t>(prior.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "likelihood size differs from prior");
  }
  std::vector<double> joint(prior.size());
  double evidence = 0.0;
  for (int i = 0; i < prior.size(); ++i) {
    joint[i] = prior.at(i) * likelihood[i];
    evidence += joint[i];
  }
  if (!(evidence > 0.0)) {
    throw Error(ErrorCode::kZeroEvidence,
                "released cell has zero likelihood under the prior");
  }
  return ProbVector::FromWeights(std::move(joint));
}

bool DeltaLocationSet::Contains(CellId c) const {
  return std::binary_search(cells.begin(), cells.end(), c,
                            [](CellId a, CellId b) { return Index(a) < Index(b); });
}

DeltaLocationSet ComputeDeltaLocationSet(const ProbVector& prior, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  }
  std::vector<int> order(prior.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return prior.at(a) > prior.at(b); });
  DeltaLocationSet out;
  out.delta = delta;
  const double target = 1.0 - delta - kMassSlack;
  for (int i : order) {
    if (out.covered_mass >= target || prior.at(i) <= 0.0) break;
    out.cells.push_back(Cell(i));
    out.covered_mass += prior.at(i);
  }
  std::sort(out.cells.begin(), out.cells.end(),
            [](CellId a, CellId b) { return Index(a) < Index(b); });
  return out;
}

CellId SurrogateLocation(CellId true_cell, const DeltaLocationSet& dset,
                         const GridMap& map) {
  if (dset.cells.empty()) {
    throw Error(ErrorCode::kEmptyInput, "delta-location set is empty");
  }
  if (dset.Contains(true_cell)) return true_cell;
  CellId best = dset.cells.front();
  double best_d = map.Distance(true_cell, best);
  for (CellId c : dset.cells) {
    const double d = map.Distance(true_cell, c);
    if (d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

}  // namespace trajshield
