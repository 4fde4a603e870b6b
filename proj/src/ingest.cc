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

#include "trajshield/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "trajshield/error.h"

namespace trajshield {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    out.push_back(
        Trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool ParseDouble(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool ParseInt(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Days since 1970-01-01 of a proleptic Gregorian date.
int64_t DaysFromCivil(int64_t y, int m, int d) {
  y -= m <= 2 ? 1 : 0;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int64_t yoe = y - era * 400;
  const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

int DaysInMonth(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : kDays[m - 1];
}

bool CheckCoords(double lat, double lon, std::string& reason) {
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    reason = "coordinates out of range";
    return false;
  }
  return true;
}

void FinishReport(const ParseReport& report) {
  if (report.records.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "no valid GPS records in " + std::to_string(report.lines_read) +
                    " lines (" + std::to_string(report.errors.size()) + " malformed)");
  }
}

double Uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

GpsFormat ParseGpsFormat(std::string_view name) {
  if (name == "tdrive") return GpsFormat::kTDrive;
  if (name == "geolife") return GpsFormat::kGeolife;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown GPS format '" + std::string(name) + "'");
}

std::string ParseReport::ToJson() const {
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : errors) errs.push_back({{"line", e.line}, {"reason", e.reason}});
  nlohmann::json j = {{"lines_read", lines_read},
                      {"header_lines", header_lines},
                      {"records", records.size()},
                      {"dropped", errors.size()},
                      {"errors", errs}};
  return j.dump(2);
}

int64_t ParseTimestamp(std::string_view text) {
  text = Trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const bool shape = text.size() == 19 && text[4] == '-' && text[7] == '-' &&
                     (text[10] == ' ' || text[10] == 'T') && text[13] == ':' &&
                     text[16] == ':';
  if (!shape || !ParseInt(text.substr(0, 4), y) || !ParseInt(text.substr(5, 2), mo) ||
      !ParseInt(text.substr(8, 2), d) || !ParseInt(text.substr(11, 2), h) ||
      !ParseInt(text.substr(14, 2), mi) || !ParseInt(text.substr(17, 2), s)) {
    throw Error(ErrorCode::kParseError, "bad timestamp '" + std::string(text) + "'");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > DaysInMonth(y, mo) || h > 23 || mi > 59 ||
      s > 59) {
    throw Error(ErrorCode::kParseError,
                "timestamp out of range '" + std::string(text) + "'");
  }
  return DaysFromCivil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string FormatTimestamp(int64_t epoch_s) {
  int64_t days = epoch_s / 86400;
  int64_t rem = epoch_s % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  // Inverse of DaysFromCivil.
  const int64_t z = days + 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int64_t doe = z - era * 146097;
  const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int64_t mp = (5 * doy + 2) / 153;
  const int d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  const int m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  const int64_t y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02d %02d:%02d:%02d",
                static_cast<long long>(y), m, d, static_cast<int>(rem / 3600),
                static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
  return buf;
}

ParseReport ParseTDriveLines(std::istream& in) {
  ParseReport report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines_read;
    const std::string_view body = Trim(line);
    if (body.empty()) continue;
    const auto f = SplitCommas(body);
    GpsRecord r;
    std::string reason;
    if (f.size() != 4) {
      reason = "expected 4 fields, got " + std::to_string(f.size());
    } else if (f[0].empty()) {
      reason = "empty id";
    } else if (!ParseDouble(f[2], r.lon) || !ParseDouble(f[3], r.lat)) {
      reason = "bad coordinate";
    } else if (CheckCoords(r.lat, r.lon, reason)) {
      try {
        r.timestamp_s = ParseTimestamp(f[1]);
        r.id = std::string(f[0]);
        report.records.push_back(std::move(r));
        continue;
      } catch (const Error& e) {
        reason = e.message();
      }
    }
    report.errors.push_back({report.lines_read, reason});
  }
  return report;
}

ParseReport ParseGeolifeLines(std::istream& in, const std::string& id) {
  constexpr int kHeaderLines = 6;
  ParseReport report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines_read;
    if (report.lines_read <= kHeaderLines) {
      ++report.header_lines;
      continue;
    }
    const std::string_view body = Trim(line);
    if (body.empty()) continue;
    const auto f = SplitCommas(body);
    GpsRecord r;
    std::string reason;
    if (f.size() != 7) {
      reason = "expected 7 fields, got " + std::to_string(f.size());
    } else if (!ParseDouble(f[0], r.lat) || !ParseDouble(f[1], r.lon)) {
      reason = "bad coordinate";
    } else if (CheckCoords(r.lat, r.lon, reason)) {
      try {
        r.timestamp_s = ParseTimestamp(std::string(f[5]) + " " + std::string(f[6]));
        r.id = id;
        report.records.push_back(std::move(r));
        continue;
      } catch (const Error& e) {
        reason = e.message();
      }
    }
    report.errors.push_back({report.lines_read, reason});
  }
  return report;
}

ParseReport ParseTDrive(std::istream& in) {
  ParseReport report = ParseTDriveLines(in);
  FinishReport(report);
  return report;
}

ParseReport ParseGeolife(std::istream& in, const std::string& id) {
  ParseReport report = ParseGeolifeLines(in, id);
  FinishReport(report);
  return report;
}

ParseReport ParseGpsLines(std::istream& in, GpsFormat format,
                          const std::string& geolife_id) {
  return format == GpsFormat::kTDrive ? ParseTDriveLines(in)
                                      : ParseGeolifeLines(in, geolife_id);
}

ParseReport ParseGps(std::istream& in, GpsFormat format, const std::string& geolife_id) {
  ParseReport report = ParseGpsLines(in, format, geolife_id);
  FinishReport(report);
  return report;
}

Trajectory Discretize(std::span<const GpsRecord> records, const GridMap& map,
                      const std::string& user_id, DiscretizeStats* stats) {
  DiscretizeStats local;
  DiscretizeStats& st = stats ? *stats : local;
  std::vector<const GpsRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->timestamp_s < b->timestamp_s;
  });
  st.fixes += static_cast<int>(sorted.size());

  std::map<int64_t, CellId> last_in_bin;
  if (!sorted.empty()) {
    const int64_t t0 = sorted.front()->timestamp_s;
    for (const GpsRecord* r : sorted) {
      const int64_t bin = static_cast<int64_t>(
          std::floor(static_cast<double>(r->timestamp_s - t0) / map.time_step_s()));
      try {
        last_in_bin[bin] = map.CellOfCoords(r->lat, r->lon);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kOutOfBounds) throw;
        ++st.out_of_bounds;
      }
    }
  }
  if (last_in_bin.empty()) {
    throw Error(ErrorCode::kNoInBoundsFixes,
                "no fix of '" + user_id + "' lies inside the map");
  }
  Trajectory out;
  out.user_id = user_id;
  const int64_t first = last_in_bin.begin()->first;
  const int64_t last = last_in_bin.rbegin()->first;
  CellId cur = last_in_bin.begin()->second;
  for (int64_t b = first; b <= last; ++b) {
    const auto it = last_in_bin.find(b);
    if (it != last_in_bin.end()) {
      cur = it->second;
    } else {
      ++st.carried_bins;
    }
    out.steps.push_back({static_cast<int>(b - first), cur});
  }
  st.bins += static_cast<int>(out.steps.size());
  return out;
}

std::vector<Trajectory> DiscretizeById(std::span<const GpsRecord> records,
                                       const GridMap& map, DiscretizeStats* stats) {
  std::map<std::string, std::vector<GpsRecord>> by_id;
  for (const auto& r : records) by_id[r.id].push_back(r);
  std::vector<Trajectory> out;
  for (const auto& [id, recs] : by_id) {
    try {
      out.push_back(Discretize(recs, map, id, stats));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoInBoundsFixes) throw;
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kNoInBoundsFixes, "no fix lies inside the map");
  }
  return out;
}

void WriteNormalizedCsv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,cell_index\n";
  for (const auto& s : trajectory.steps) out << s.t << ',' << Index(s.cell) << '\n';
}

std::vector<GpsRecord> SynthesizeFixes(const Trajectory& trajectory, const GridMap& map,
                                       int64_t start_s, int per_bin, Rng& rng,
                                       const std::string& id) {
  if (per_bin < 1) throw Error(ErrorCode::kInvalidArgument, "per_bin must be >= 1");
  std::vector<GpsRecord> out;
  const double step = map.time_step_s();
  for (size_t k = 0; k < trajectory.steps.size(); ++k) {
    const CellId cell = trajectory.steps[k].cell;
    map.CheckCell(cell);
    const GridCoord at = map.CoordOf(cell);
    const auto lo = static_cast<int64_t>(std::ceil(static_cast<double>(k) * step));
    const auto hi =
        static_cast<int64_t>(std::ceil(static_cast<double>(k + 1) * step)) - 1;
    std::vector<int64_t> offsets;
    for (int j = 0; j < per_bin; ++j) {
      offsets.push_back(k == 0 && j == 0
                            ? 0
                            : lo + static_cast<int64_t>(Uniform01(rng) * (hi - lo + 1)));
    }
    std::sort(offsets.begin(), offsets.end());
    for (int64_t off : offsets) {
      const double east = (at.col + 0.1 + 0.8 * Uniform01(rng)) * map.cell_size_m();
      const double north = (at.row + 0.1 + 0.8 * Uniform01(rng)) * map.cell_size_m();
      const LatLon p = map.Unproject(east, north);
      out.push_back({id, start_s + off, p.lat, p.lon});
    }
  }
  return out;
}

void WriteTDrive(std::ostream& out, std::span<const GpsRecord> records) {
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9f,%.9f\n", r.id.c_str(),
                  FormatTimestamp(r.timestamp_s).c_str(), r.lon, r.lat);
    out << buf;
  }
}

void WriteGeolife(std::ostream& out, std::span<const GpsRecord> records) {
  out << "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n"
         "0,2,255,My Track,0,0,2,8421376\n0\n";
  char buf[160];
  for (const auto& r : records) {
    const std::string ts = FormatTimestamp(r.timestamp_s);
    const double days = static_cast<double>(r.timestamp_s) / 86400.0 + 25569.0;
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f,0,0,%.10f,%s,%s\n", r.lat, r.lon, days,
                  ts.substr(0, 10).c_str(), ts.substr(11).c_str());
    out << buf;
  }
}

}  // namespace trajshield
