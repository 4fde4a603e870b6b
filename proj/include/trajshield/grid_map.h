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

// Discretized map: a rows x cols grid of square cells laid over a
// geographic bounding box, plus the Hilbert-curve linearization used to
// search for protection sets.
//
// Conventions:
//   * Cells are numbered row-major: index = row * cols + col.
//   * Row 0 is the southernmost row and col 0 the westernmost column; the
//     origin (lat, lon) is the south-west corner of cell 0.
//   * Geographic coordinates are projected onto the plane with an
//     equirectangular projection centred on the origin.
//   * A point on the shared edge of two cells belongs to the cell with the
//     lower row/col, i.e. cells are (lo, hi] except along the origin edges.

#ifndef TRAJSHIELD_GRID_MAP_H_
#define TRAJSHIELD_GRID_MAP_H_

#include <cstdint>
#include <string>
#include <vector>

namespace trajshield {

// Dense, stable identifier of a map cell.
enum class CellId : int32_t {};

constexpr int Index(CellId c) { return static_cast<int>(c); }
constexpr CellId Cell(int index) { return static_cast<CellId>(index); }

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct GridCoord {
  int row = 0;
  int col = 0;
};

inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr double kDefaultCellSizeM = 620.0;
inline constexpr double kDefaultTimeStepS = 177.0;

class GridMap {
 public:
  GridMap(int rows, int cols, double cell_size_m, LatLon origin = {},
          double time_step_s = kDefaultTimeStepS);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size_m() const { return cell_size_m_; }
  LatLon origin() const { return origin_; }
  double time_step_s() const { return time_step_s_; }
  int num_cells() const { return rows_ * cols_; }

  bool Contains(CellId c) const { return Index(c) >= 0 && Index(c) < num_cells(); }
  // Throws OutOfBounds for an invalid id.
  void CheckCell(CellId c) const;

  GridCoord CoordOf(CellId c) const { return {Index(c) / cols_, Index(c) % cols_}; }
  CellId CellAt(int row, int col) const { return Cell(row * cols_ + col); }

  // Planar offset (east, north) in meters of a geographic point relative to
  // the origin.
  void Project(LatLon p, double& east_m, double& north_m) const;
  LatLon Unproject(double east_m, double north_m) const;

  // Throws OutOfBounds if the point lies outside the map.
  CellId CellOfCoords(double lat, double lon) const;
  LatLon CenterOf(CellId c) const;

  // Euclidean distance between cell centers in meters.
  double Distance(CellId a, CellId b) const {
    const int ia = Index(a);
    const int ib = Index(b);
    return OffsetDistance(ia / cols_ - ib / cols_, ia % cols_ - ib % cols_);
  }
  // Center distance of two cells `drow` rows and `dcol` columns apart.
  double OffsetDistance(int drow, int dcol) const {
    return offset_distance_[static_cast<size_t>(drow < 0 ? -drow : drow) * cols_ +
                            (dcol < 0 ? -dcol : dcol)];
  }
  // Largest center-to-center distance on the map.
  double Diameter() const;

  std::string ToJson() const;
  static GridMap FromJson(const std::string& text);
  static GridMap Load(const std::string& path);

 private:
  int rows_;
  int cols_;
  double cell_size_m_;
  LatLon origin_;
  double time_step_s_;
  double cos_lat0_;
  // Center distance indexed by |drow| * cols + |dcol|.
  std::vector<double> offset_distance_;
};

enum class Rotation { k0 = 0, k90 = 90, k180 = 180, k270 = 270 };

inline constexpr Rotation kAllRotations[] = {Rotation::k0, Rotation::k90, Rotation::k180,
                                             Rotation::k270};

// Hilbert curve on a 2^order x 2^order square embedding the map.
//
// Base motif (rotation 0) in (row, col): (0,0)->0, (1,0)->1, (1,1)->2,
// (0,1)->3, refined recursively. A rotated curve is the base curve turned
// clockwise (as seen on a north-up map) about the square's center; the rank
// of a cell under rotation r is the base rank of the cell rotated back.
class HilbertCurve {
 public:
  HilbertCurve(int order, Rotation rotation);
  // Smallest order whose square covers the map.
  static HilbertCurve ForMap(const GridMap& map, Rotation rotation);

  int order() const { return order_; }
  int side() const { return side_; }
  Rotation rotation() const { return rotation_; }

  uint64_t Rank(int row, int col) const;
  uint64_t Rank(CellId c, const GridMap& map) const;

  // Map cells sorted by rank; embedding cells outside the map are skipped.
  std::vector<CellId> Traversal(const GridMap& map) const;

 private:
  int order_;
  int side_;
  Rotation rotation_;
};

}  // namespace trajshield

#endif  // TRAJSHIELD_GRID_MAP_H_
