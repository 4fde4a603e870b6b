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

// GPS log ingestion and grid discretization.
//
// T-Drive lines:  id,YYYY-MM-DD HH:MM:SS,lon,lat
// Geolife .plt:   6 header lines, then lat,lon,0,alt,days,YYYY-MM-DD,HH:MM:SS
//
// Timestamps are read as UTC. Discretization uses bins of the map's time
// step aligned to the earliest fix; each bin takes the cell of its last
// in-bounds fix, empty bins repeat the previous cell, and bins before the
// first in-bounds fix are dropped.

#ifndef TRAJSHIELD_INGEST_H_
#define TRAJSHIELD_INGEST_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajshield/grid_map.h"
#include "trajshield/mechanisms.h"
#include "trajshield/mobility.h"

namespace trajshield {

enum class GpsFormat { kTDrive, kGeolife };

GpsFormat ParseGpsFormat(std::string_view name);

struct GpsRecord {
  std::string id;
  int64_t timestamp_s = 0;  // seconds since 1970-01-01 UTC
  double lat = 0.0;
  double lon = 0.0;
};

struct ParseIssue {
  int line = 0;  // 1-based
  std::string reason;
};

struct ParseReport {
  std::vector<GpsRecord> records;
  std::vector<ParseIssue> errors;
  int lines_read = 0;
  int header_lines = 0;

  std::string ToJson() const;
};

// "YYYY-MM-DD HH:MM:SS" (or with 'T') to epoch seconds. Throws ParseError.
int64_t ParseTimestamp(std::string_view text);
std::string FormatTimestamp(int64_t epoch_s);

// Malformed lines are reported, not fatal. Throws EmptyInput when no line
// parses.
ParseReport ParseTDrive(std::istream& in);
ParseReport ParseGeolife(std::istream& in, const std::string& id = "geolife");
ParseReport ParseGps(std::istream& in, GpsFormat format,
                     const std::string& geolife_id = "geolife");
// Same as ParseGps but returns a report with no records instead of throwing.
ParseReport ParseTDriveLines(std::istream& in);
ParseReport ParseGeolifeLines(std::istream& in, const std::string& id = "geolife");
ParseReport ParseGpsLines(std::istream& in, GpsFormat format,
                          const std::string& geolife_id = "geolife");

struct DiscretizeStats {
  int fixes = 0;
  int out_of_bounds = 0;
  int bins = 0;
  int carried_bins = 0;
};

// Throws NoInBoundsFixes.
Trajectory Discretize(std::span<const GpsRecord> records, const GridMap& map,
                      const std::string& user_id = "", DiscretizeStats* stats = nullptr);

// One trajectory per record id, ordered by id. Ids with no in-bounds fix are
// skipped; throws NoInBoundsFixes when every id is.
std::vector<Trajectory> DiscretizeById(std::span<const GpsRecord> records,
                                       const GridMap& map,
                                       DiscretizeStats* stats = nullptr);

// `t,cell_index` rows.
void WriteNormalizedCsv(std::ostream& out, const Trajectory& trajectory);

// Fixes reproducing a cell trajectory: `per_bin` fixes inside each bin at
// random interior points of the step's cell.
std::vector<GpsRecord> SynthesizeFixes(const Trajectory& trajectory, const GridMap& map,
                                       int64_t start_s, int per_bin, Rng& rng,
                                       const std::string& id = "0");

void WriteTDrive(std::ostream& out, std::span<const GpsRecord> records);
void WriteGeolife(std::ostream& out, std::span<const GpsRecord> records);

}  // namespace trajshield

#endif  // TRAJSHIELD_INGEST_H_
