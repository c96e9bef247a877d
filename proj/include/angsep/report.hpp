// Copyright 2026 The Angsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "angsep/errors.hpp"
#include "angsep/metrics.hpp"

namespace angsep {

namespace internal {

// Fixed-precision formatting with negative zero folded to zero so that
// identical reports compare byte-equal.
inline std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v + 0.0);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace internal

// One row per (condition, angle).
inline std::string ReportCsv(const EvalReport& report) {
  std::ostringstream out;
  out << "condition,angle_deg,mean_db,std_db,count,saturated\n";
  for (const auto& cond : report.conditions) {
    const auto& col = report.table.at(cond);
    for (std::size_t i = 0; i < report.angles_deg.size(); ++i) {
      const Stat& s = col[i];
      out << cond << ',' << internal::Fixed(report.angles_deg[i], 1) << ',' << internal::Fixed(s.mean) << ','
          << internal::Fixed(s.stddev) << ',' << s.count << ',' << (s.saturated ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

inline nlohmann::json SweepToJson(const DirectivitySweep& sweep) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : sweep.points) points.push_back({{"angle_deg", p.angle_deg}, {"gain_db", p.gain_db + 0.0}});
  return {{"offset_samples", sweep.offset}, {"separator", sweep.separator}, {"points", points}};
}

inline nlohmann::json ReportJson(const EvalReport& report) {
  nlohmann::json j;
  j["kind"] = report.kind;
  j["metric"] = report.metric;
  j["metadata"] = report.metadata;
  j["angles_deg"] = report.angles_deg;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& cond : report.conditions) {
    const auto& col = report.table.at(cond);
    nlohmann::json rows = nlohmann::json::array();
    double sum = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      rows.push_back({{"angle_deg", report.angles_deg[i]},
                      {"mean_db", col[i].mean + 0.0},
                      {"std_db", col[i].stddev},
                      {"count", col[i].count},
                      {"saturated", col[i].saturated}});
      sum += col[i].mean;
    }
    conds.push_back({{"name", cond},
                     {"average_db", col.empty() ? 0.0 : sum / static_cast<double>(col.size()) + 0.0},
                     {"rows", rows}});
  }
  j["conditions"] = conds;
  if (!report.sweeps.empty()) {
    nlohmann::json sweeps = nlohmann::json::array();
    for (const auto& s : report.sweeps) sweeps.push_back(SweepToJson(s));
    j["sweeps"] = sweeps;
  }
  return j;
}

// Polar directivity plot. 0 deg (broadside front) points up and azimuth
// increases clockwise, toward mic b. The radial axis is linear in dB from
// `floor_db` at the centre to the rounded-up maximum at the rim.
inline std::string PolarSvg(const DirectivitySweep& sweep, double floor_db = -40.0,
                            const std::string& title = "") {
  constexpr double kSize = 420.0, kC = kSize / 2.0, kR = 170.0;
  double top = 0.0;
  for (const auto& p : sweep.points) top = std::max(top, p.gain_db);
  top = std::ceil(top / 10.0) * 10.0;
  const double span = top - floor_db;
  auto radius = [&](double db) { return kR * (std::clamp(db, floor_db, top) - floor_db) / span; };
  auto xy = [&](double deg, double r) {
    const double a = DegToRad(deg);
    return std::pair<double, double>{kC + r * std::sin(a), kC - r * std::cos(a)};
  };
  using internal::Fixed;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize + 30
    << "\" viewBox=\"0 0 " << kSize << ' ' << kSize + 30 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (double db = top; db >= floor_db - 1e-9; db -= 10.0) {
    s << "<circle cx=\"" << kC << "\" cy=\"" << kC << "\" r=\"" << Fixed(radius(db), 2)
      << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    s << "<text x=\"" << kC + 3 << "\" y=\"" << Fixed(kC - radius(db) - 2, 2) << "\" fill=\"#888\">"
      << Fixed(db, 0) << " dB</text>\n";
  }
  for (int deg = 0; deg < 360; deg += 30) {
    const auto [x, y] = xy(deg, kR);
    const auto [lx, ly] = xy(deg, kR + 14);
    s << "<line x1=\"" << kC << "\" y1=\"" << kC << "\" x2=\"" << Fixed(x, 2) << "\" y2=\"" << Fixed(y, 2)
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << Fixed(lx, 2) << "\" y=\"" << Fixed(ly + 4, 2) << "\" text-anchor=\"middle\">" << deg
      << "</text>\n";
  }
  s << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.15\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto [x, y] = xy(sweep.points[i].angle_deg, radius(sweep.points[i].gain_db));
    s << (i ? " " : "") << Fixed(x, 2) << ',' << Fixed(y, 2);
  }
  s << "\"/>\n";
  char offset[32];
  std::snprintf(offset, sizeof(offset), "%+g", sweep.offset + 0.0);
  s << "<text x=\"" << kC << "\" y=\"" << kSize + 20 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << (title.empty() ? sweep.separator : title) << ", offset = " << offset << " samples</text>\n";
  s << "</svg>\n";
  return s.str();
}

// Writes <stem>.csv, <stem>.json and one <stem>_offset_<k>.svg per sweep.
// Returns the paths written.
inline std::vector<std::filesystem::path> WriteReport(const EvalReport& report, const std::filesystem::path& dir,
                                                      const std::string& stem, double floor_db = -40.0) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(dir / (stem + ".csv"));
  internal::WriteText(written.back(), ReportCsv(report));
  written.push_back(dir / (stem + ".json"));
  internal::WriteText(written.back(), ReportJson(report).dump(2) + "\n");
  for (const auto& sweep : report.sweeps) {
    char name[64];
    std::snprintf(name, sizeof(name), "_offset_%+g.svg", sweep.offset + 0.0);
    written.push_back(dir / (stem + name));
    internal::WriteText(written.back(), PolarSvg(sweep, floor_db));
  }
  return written;
}

// Wraps a single sweep as a report (one condition, gain per angle).
inline EvalReport SweepReport(const DirectivitySweep& sweep, const SweepConfig& config) {
  EvalReport r;
  r.kind = "directivity";
  r.metric = "gain_db";
  r.angles_deg = config.angles_deg;
  r.conditions = {"gain"};
  for (const auto& p : sweep.points) {
    r.table["gain"].push_back(Stat{p.gain_db, 0.0, 1, std::abs(p.gain_db) >= kMetricCapDb});
  }
  r.sweeps = {sweep};
  r.metadata = {{"separator", sweep.separator},
                {"offset_samples", sweep.offset},
                {"source_range_m", config.source_range_m},
                {"free_field", config.free_field},
                {"probe_duration_s", config.duration_s}};
  return r;
}

// Human-readable per-condition summary for the terminal.
inline std::string ReportSummary(const EvalReport& report) {
  std::ostringstream out;
  out << report.kind << " (" << report.metric << ")\n";
  for (const auto& cond : report.conditions) {
    const auto& col = report.table.at(cond);
    out << "  " << cond << ":";
    double sum = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      out << ' ' << internal::Fixed(report.angles_deg[i], 0) << "=" << internal::Fixed(col[i].mean, 2);
      sum += col[i].mean;
    }
    out << "  avg=" << internal::Fixed(col.empty() ? 0.0 : sum / static_cast<double>(col.size()), 2) << '\n';
  }
  return out.str();
}

}  // namespace angsep
