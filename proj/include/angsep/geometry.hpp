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

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "angsep/errors.hpp"
#include "angsep/random.hpp"
#include "angsep/types.hpp"

namespace angsep {

inline double DegToRad(double deg) { return deg * kPi / 180.0; }
inline double RadToDeg(double rad) { return rad * 180.0 / kPi; }

// Two omnidirectional microphones. Mic a feeds channel 0, mic b channel 1.
// The origin of all angular quantities is their midpoint.
struct MicPair {
  Vec3 position_a = Vec3::Zero();
  Vec3 position_b = Vec3::Zero();

  static MicPair FromMidpoint(const Vec3& midpoint, const Vec3& axis, double spacing) {
    const Vec3 u = axis.normalized();
    return {midpoint - 0.5 * spacing * u, midpoint + 0.5 * spacing * u};
  }

  double spacing() const { return (position_b - position_a).norm(); }
  Vec3 midpoint() const { return 0.5 * (position_a + position_b); }
  // Unit vector from mic a to mic b.
  Vec3 axis() const { return (position_b - position_a).normalized(); }
  // Unit vector orthogonal to the axis and to +z: the broadside "front".
  // Falls back to +y for a vertical axis.
  Vec3 front() const {
    const Vec3 u = axis();
    Vec3 f(-u.y(), u.x(), 0.0);
    if (f.norm() < 1e-12) return Vec3(0.0, 1.0, 0.0);
    return f.normalized();
  }
};

struct AngularRegionSpec {
  double theta_deg = 30.0;  // target half-width around the 0 deg plane
  double phi_deg = 60.0;    // minimum interference offset from the 0 deg plane

  void Validate() const {
    if (!(theta_deg > 0.0 && theta_deg < phi_deg && phi_deg < 90.0)) {
      throw ConfigError("angular regions require 0 < theta < phi < 90");
    }
  }
};

enum class SourceRole { kTarget1 = 0, kTarget2 = 1, kInterference = 2, kNoise = 3 };

inline constexpr std::array<SourceRole, 4> kAllRoles = {
    SourceRole::kTarget1, SourceRole::kTarget2, SourceRole::kInterference,
    SourceRole::kNoise};

inline std::string_view RoleName(SourceRole role) {
  switch (role) {
    case SourceRole::kTarget1: return "target1";
    case SourceRole::kTarget2: return "target2";
    case SourceRole::kInterference: return "interference";
    case SourceRole::kNoise: return "noise";
  }
  return "?";
}

inline SourceRole RoleFromName(std::string_view name) {
  for (SourceRole r : kAllRoles) {
    if (RoleName(r) == name) return r;
  }
  throw ConfigError("unknown source role: " + std::string(name));
}

struct SourcePlacement {
  Vec3 position = Vec3::Zero();
  SourceRole role = SourceRole::kTarget1;
  double angle_to_zero_plane_deg = 0.0;
  double distance_to_origin_m = 0.0;
  bool front = true;  // on the +front() side of the array
};

struct RoomSpec {
  Vec3 dimensions = Vec3(6.0, 5.0, 3.0);
  double rt60 = 0.0;             // seconds; 0 for free field
  double wall_reflection = 0.0;  // uniform pressure reflection coefficient
  MicPair mic_pair;
  std::vector<SourcePlacement> sources;
};

// Signed angle in degrees between the position vector (relative to the mic
// midpoint) and the 0 deg plane. Positive on mic b's side.
inline double AngleToZeroPlane(const Vec3& position, const MicPair& mics) {
  const Vec3 v = position - mics.midpoint();
  const double r = v.norm();
  if (!(r > 0.0)) throw DegenerateInputError("position coincides with the mic midpoint");
  const double s = std::clamp(v.dot(mics.axis()) / r, -1.0, 1.0);
  return RadToDeg(std::asin(s));
}

// Time difference of arrival, t_a - t_b, in seconds. Positive when the
// source is closer to mic b. Approaches d*sin(angle)/c in the far field.
inline double Tdoa(const Vec3& position, const MicPair& mics,
                   double speed_of_sound = kDefaultSpeedOfSound) {
  const double ra = (position - mics.position_a).norm();
  const double rb = (position - mics.position_b).norm();
  if (ra < 1e-12 || rb < 1e-12) throw DegenerateInputError("position coincides with a microphone");
  return (ra - rb) / speed_of_sound;
}

inline double FarFieldTdoa(double spacing, double angle_deg,
                           double speed_of_sound = kDefaultSpeedOfSound) {
  return spacing * std::sin(DegToRad(angle_deg)) / speed_of_sound;
}

// Point at `range` meters from the midpoint, in the horizontal plane of the
// array, at azimuth measured from broadside front (0 deg) toward mic b
// (90 deg). 180 deg is broadside back.
inline Vec3 PositionAtAzimuth(const MicPair& mics, double azimuth_deg, double range) {
  const double a = DegToRad(azimuth_deg);
  return mics.midpoint() + range * (std::sin(a) * mics.axis() + std::cos(a) * mics.front());
}

inline SourcePlacement MakePlacement(const Vec3& position, SourceRole role, const MicPair& mics) {
  SourcePlacement p;
  p.position = position;
  p.role = role;
  p.angle_to_zero_plane_deg = AngleToZeroPlane(position, mics);
  p.distance_to_origin_m = (position - mics.midpoint()).norm();
  p.front = (position - mics.midpoint()).dot(mics.front()) >= 0.0;
  return p;
}

// Sabine: rt60 = 0.161 V / (S * alpha), alpha = 1 - beta^2.
inline double SabineReflection(const Vec3& dims, double rt60) {
  if (rt60 <= 0.0) return 0.0;
  const double volume = dims.x() * dims.y() * dims.z();
  const double surface =
      2.0 * (dims.x() * dims.y() + dims.x() * dims.z() + dims.y() * dims.z());
  const double alpha = 0.161 * volume / (surface * rt60);
  if (alpha > 1.0) {
    throw ConfigError("rt60 too short for this room under Sabine's formula");
  }
  return std::sqrt(1.0 - alpha);
}

inline double SabineRt60(const Vec3& dims, double reflection) {
  if (reflection <= 0.0) return 0.0;
  const double volume = dims.x() * dims.y() * dims.z();
  const double surface =
      2.0 * (dims.x() * dims.y() + dims.x() * dims.z() + dims.y() * dims.z());
  return 0.161 * volume / (surface * (1.0 - reflection * reflection));
}

struct GeometryConfig {
  AngularRegionSpec region;
  double spacing_min_m = 0.09;
  double spacing_max_m = 0.11;
  Vec3 room_min_m = Vec3(3.0, 3.0, 2.4);
  Vec3 room_max_m = Vec3(8.0, 8.0, 3.5);
  double source_range_min_m = 0.4;
  double source_range_max_m = 2.5;
  double rt60_min_s = 0.2;
  double rt60_max_s = 0.6;
  double wall_margin_m = 0.3;
  double speed_of_sound = kDefaultSpeedOfSound;
  int max_attempts = 10000;
  bool free_field = false;  // rt60 = 0, no reflections

  void Validate() const {
    region.Validate();
    if (!(spacing_min_m > 0.0 && spacing_min_m <= spacing_max_m)) {
      throw ConfigError("invalid microphone spacing range");
    }
    for (int i = 0; i < 3; ++i) {
      if (!(room_min_m[i] > 0.0 && room_min_m[i] <= room_max_m[i])) {
        throw ConfigError("invalid room dimension range");
      }
    }
    if (!(source_range_min_m > 0.0 && source_range_min_m <= source_range_max_m)) {
      throw ConfigError("invalid source range");
    }
    if (!free_field && !(rt60_min_s > 0.0 && rt60_min_s <= rt60_max_s)) {
      throw ConfigError("invalid rt60 range");
    }
    if (wall_margin_m < 0.0 || speed_of_sound <= 0.0 || max_attempts < 1) {
      throw ConfigError("invalid geometry config");
    }
  }
};

namespace internal {

inline bool InsideWithMargin(const Vec3& p, const Vec3& dims, double margin) {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < margin || p[i] > dims[i] - margin) return false;
  }
  return true;
}

inline bool RoleAccepts(SourceRole role, double angle_deg, const AngularRegionSpec& region) {
  switch (role) {
    case SourceRole::kTarget1:
    case SourceRole::kTarget2:
      return std::abs(angle_deg) <= region.theta_deg;
    case SourceRole::kInterference:
      return std::abs(angle_deg) >= region.phi_deg;
    case SourceRole::kNoise:
      return true;
  }
  return false;
}

inline Vec3 UniformDirection(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 v(n(rng), n(rng), n(rng));
    const double r = v.norm();
    if (r > 1e-9) return v / r;
  }
}

}  // namespace internal

// Samples a room, a mic pair and four role-constrained source placements.
// Deterministic in (config, seed).
inline RoomSpec SampleScene(const GeometryConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng = MakeRng(seed, Stream::kGeometry);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  int attempts = 0;
  auto spend = [&] {
    if (++attempts > config.max_attempts) {
      throw SamplingExhaustedError("scene sampling exhausted " +
                                   std::to_string(config.max_attempts) + " attempts");
    }
  };

  RoomSpec room;
  for (;;) {
    spend();
    for (int i = 0; i < 3; ++i) room.dimensions[i] = uniform(config.room_min_m[i], config.room_max_m[i]);
    if (config.free_field) {
      room.rt60 = 0.0;
      room.wall_reflection = 0.0;
      break;
    }
    room.rt60 = uniform(config.rt60_min_s, config.rt60_max_s);
    try {
      room.wall_reflection = SabineReflection(room.dimensions, room.rt60);
      break;
    } catch (const ConfigError&) {
    }
  }

  // A mic pair close to a corner can leave a role's region with no room
  // inside the wall margin; such layouts are redrawn.
  constexpr int kLayoutAttempts = 500;
  for (;;) {
    const double spacing = uniform(config.spacing_min_m, config.spacing_max_m);
    const double edge = config.wall_margin_m + 0.5 * spacing;
    for (int i = 0; i < 3; ++i) {
      if (room.dimensions[i] <= 2.0 * edge) throw ConfigError("room too small for the wall margin");
    }
    Vec3 mid;
    for (int i = 0; i < 3; ++i) mid[i] = uniform(edge, room.dimensions[i] - edge);
    const double azimuth = uniform(0.0, 2.0 * kPi);
    room.mic_pair = MicPair::FromMidpoint(mid, Vec3(std::cos(azimuth), std::sin(azimuth), 0.0), spacing);

    room.sources.clear();
    for (SourceRole role : kAllRoles) {
      for (int tries = 0; tries < kLayoutAttempts; ++tries) {
        spend();
        const Vec3 dir = internal::UniformDirection(rng);
        const double range = uniform(config.source_range_min_m, config.source_range_max_m);
        const Vec3 p = mid + range * dir;
        if (!internal::InsideWithMargin(p, room.dimensions, config.wall_margin_m)) continue;
        const double angle = AngleToZeroPlane(p, room.mic_pair);
        if (!internal::RoleAccepts(role, angle, config.region)) continue;
        room.sources.push_back(MakePlacement(p, role, room.mic_pair));
        break;
      }
      if (room.sources.size() != static_cast<std::size_t>(role) + 1) break;
    }
    if (room.sources.size() == kAllRoles.size()) break;
  }
  return room;
}

// ---- RoomSpec text serialization (JSON, full double precision) ----

inline nlohmann::json Vec3ToJson(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

inline Vec3 Vec3FromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline nlohmann::json RoomSpecToJson(const RoomSpec& room) {
  nlohmann::json j;
  j["dimensions_m"] = Vec3ToJson(room.dimensions);
  j["rt60_s"] = room.rt60;
  j["wall_reflection"] = room.wall_reflection;
  j["mic_pair"] = {{"position_a_m", Vec3ToJson(room.mic_pair.position_a)},
                   {"position_b_m", Vec3ToJson(room.mic_pair.position_b)},
                   {"spacing_m", room.mic_pair.spacing()}};
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : room.sources) {
    sources.push_back({{"role", std::string(RoleName(s.role))},
                       {"position_m", Vec3ToJson(s.position)},
                       {"angle_to_zero_plane_deg", s.angle_to_zero_plane_deg},
                       {"distance_to_origin_m", s.distance_to_origin_m},
                       {"front", s.front}});
  }
  j["sources"] = std::move(sources);
  return j;
}

inline RoomSpec RoomSpecFromJson(const nlohmann::json& j) {
  try {
    RoomSpec room;
    room.dimensions = Vec3FromJson(j.at("dimensions_m"));
    room.rt60 = j.at("rt60_s").get<double>();
    room.wall_reflection = j.at("wall_reflection").get<double>();
    room.mic_pair.position_a = Vec3FromJson(j.at("mic_pair").at("position_a_m"));
    room.mic_pair.position_b = Vec3FromJson(j.at("mic_pair").at("position_b_m"));
    for (const auto& s : j.at("sources")) {
      room.sources.push_back(MakePlacement(Vec3FromJson(s.at("position_m")),
                                           RoleFromName(s.at("role").get<std::string>()),
                                           room.mic_pair));
    }
    return room;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed room spec: ") + e.what());
  }
}

inline void SaveRoomSpec(const RoomSpec& room, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << RoomSpecToJson(room).dump(2) << "\n";
}

inline RoomSpec LoadRoomSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed room spec: ") + e.what());
  }
  return RoomSpecFromJson(j);
}

}  // namespace angsep
