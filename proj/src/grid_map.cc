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

#include "trajshield/grid_map.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Slack, in cell units, for points that sit on a cell edge up to rounding.
constexpr double kEdgeSlack = 1e-9;

// Cell index along one axis for an offset in cell units; edges belong to the
// lower cell.
int AxisIndex(double q, int extent) {
  if (q < -kEdgeSlack || q > extent + kEdgeSlack) return -1;
  int i = static_cast<int>(std::ceil(q - kEdgeSlack)) - 1;
  return std::clamp(i, 0, extent - 1);
}

}  // namespace

GridMap::GridMap(int rows, int cols, double cell_size_m, LatLon origin,
                 double time_step_s)
    : rows_(rows),
      cols_(cols),
      cell_size_m_(cell_size_m),
      origin_(origin),
      time_step_s_(time_step_s),
      cos_lat0_(std::cos(origin.lat * kDegToRad)) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs rows >= 1 and cols >= 1");
  }
  if (!(cell_size_m > 0.0) || !(time_step_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cell_size_m and time_step_s must be positive");
  }
  if (std::abs(origin.lat) >= 90.0) {
    throw Error(ErrorCode::kInvalidArgument, "origin latitude out of range");
  }
  offset_distance_.resize(static_cast<size_t>(rows) * cols);
  for (int dr = 0; dr < rows; ++dr) {
    for (int dc = 0; dc < cols; ++dc) {
      offset_distance_[static_cast<size_t>(dr) * cols + dc] =
          cell_size_m * std::hypot(static_cast<double>(dr), static_cast<double>(dc));
    }
  }
}

void GridMap::CheckCell(CellId c) const {
  if (!Contains(c)) {
    throw Error(ErrorCode::kOutOfBounds, "cell " + std::to_string(Index(c)) +
                                             " not in map of " +
                                             std::to_string(num_cells()) + " cells");
  }
}

void GridMap::Project(LatLon p, double& east_m, double& north_m) const {
  north_m = (p.lat - origin_.lat) * kDegToRad * kEarthRadiusM;
  east_m = (p.lon - origin_.lon) * kDegToRad * kEarthRadiusM * cos_lat0_;
}

LatLon GridMap::Unproject(double east_m, double north_m) const {
  return {origin_.lat + north_m / (kDegToRad * kEarthRadiusM),
          origin_.lon + east_m / (kDegToRad * kEarthRadiusM * cos_lat0_)};
}

CellId GridMap::CellOfCoords(double lat, double lon) const {
  double east = 0.0;
  double north = 0.0;
  Project({lat, lon}, east, north);
  const int row = AxisIndex(north / cell_size_m_, rows_);
  const int col = AxisIndex(east / cell_size_m_, cols_);
  if (row < 0 || col < 0) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "point (" << lat << ", " << lon << ") outside map";
    throw Error(ErrorCode::kOutOfBounds, msg.str());
  }
  return CellAt(row, col);
}

LatLon GridMap::CenterOf(CellId c) const {
  CheckCell(c);
  const GridCoord g = CoordOf(c);
  return Unproject((g.col + 0.5) * cell_size_m_, (g.row + 0.5) * cell_size_m_);
}

double GridMap::Diameter() const {
  return cell_size_m_ *
         std::hypot(static_cast<double>(rows_ - 1), static_cast<double>(cols_ - 1));
}

std::string GridMap::ToJson() const {
  nlohmann::json j = {{"rows", rows_},
                      {"cols", cols_},
                      {"cell_size_m", cell_size_m_},
                      {"origin", {{"lat", origin_.lat}, {"lon", origin_.lon}}},
                      {"time_step_s", time_step_s_}};
  return j.dump(2);
}

GridMap GridMap::FromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LatLon origin;
    if (j.contains("origin")) {
      origin.lat = j.at("origin").at("lat").get<double>();
      origin.lon = j.at("origin").at("lon").get<double>();
    }
    return GridMap(j.at("rows").get<int>(), j.at("cols").get<int>(),
                   j.value("cell_size_m", kDefaultCellSizeM), origin,
                   j.value("time_step_s", kDefaultTimeStepS));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("map config: ") + e.what());
  }
}

GridMap GridMap::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open map config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJson(buf.str());
}

HilbertCurve::HilbertCurve(int order, Rotation rotation)
    : order_(order), side_(1 << order), rotation_(rotation) {
  if (order < 0 || order > 30) {
    throw Error(ErrorCode::kInvalidArgument, "hilbert order out of range");
  }
}

HilbertCurve HilbertCurve::ForMap(const GridMap& map, Rotation rotation) {
  int order = 0;
  while ((1 << order) < std::max(map.rows(), map.cols())) ++order;
  return HilbertCurve(order, rotation);
}

uint64_t HilbertCurve::Rank(int row, int col) const {
  const int last = side_ - 1;
  // Undo the clockwise rotation to land on the base curve.
  int r = row;
  int c = col;
  switch (rotation_) {
    case Rotation::k0:
      break;
    case Rotation::k90:
      r = col;
      c = last - row;
      break;
    case Rotation::k180:
      r = last - row;
      c = last - col;
      break;
    case Rotation::k270:
      r = last - col;
      c = row;
      break;
  }
  // Classic xy -> d walk with x = col, y = row.
  uint64_t x = static_cast<uint64_t>(c);
  uint64_t y = static_cast<uint64_t>(r);
  const uint64_t n = static_cast<uint64_t>(side_);
  uint64_t d = 0;
  for (uint64_t s = n / 2; s > 0; s /= 2) {
    const uint64_t rx = (x & s) > 0 ? 1 : 0;
    const uint64_t ry = (y & s) > 0 ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

uint64_t HilbertCurve::Rank(CellId cell, const GridMap& map) const {
  const GridCoord g = map.CoordOf(cell);
  return Rank(g.row, g.col);
}

std::vector<CellId> HilbertCurve::Traversal(const GridMap& map) const {
  std::vector<std::pair<uint64_t, CellId>> keyed;
  keyed.reserve(map.num_cells());
  for (int i = 0; i < map.num_cells(); ++i) {
    keyed.emplace_back(Rank(Cell(i), map), Cell(i));
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<CellId> out;
  out.reserve(keyed.size());
  for (const auto& [rank, cell] : keyed) out.push_back(cell);
  return out;
}

}  // namespace trajshield
