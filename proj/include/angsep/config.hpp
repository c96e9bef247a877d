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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <tomlplusplus/toml.hpp>

#include "angsep/bench.hpp"
#include "angsep/errors.hpp"
#include "angsep/geometry.hpp"
#include "angsep/metrics.hpp"
#include "angsep/rir.hpp"
#include "angsep/scene.hpp"
#include "angsep/separator.hpp"

namespace angsep {

// Directory corpora for dataset generation. Empty paths select the built-in
// synthetic signals.
struct CorpusConfig {
  std::filesystem::path target_dir;
  std::filesystem::path interference_dir;
  std::filesystem::path noise_dir;

  bool empty() const { return target_dir.empty() && interference_dir.empty() && noise_dir.empty(); }
};

struct SweepPlotConfig {
  double floor_db = -40.0;  // radial axis floor of the polar plots
};

struct GlobalConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int workers = 1;
  GeometryConfig geometry;
  RirParams rir;
  SceneConfig scene;
  CorpusConfig corpus;
  bool write_stems = false;
  bool write_rirs = true;
  SeparatorConfig separator;
  BenchConfig bench;
  std::vector<double> steering_offsets = {-4, -2, 0, 2, 4};
  SweepConfig sweep;
  SweepPlotConfig plot;

  // Propagates shared quantities (sample rate, speed of sound, workers,
  // seed) into the sections and validates every section.
  void Finalize() {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    rir.speed_of_sound = geometry.speed_of_sound;
    scene.sample_rate = rir.sample_rate;
    separator.sample_rate = rir.sample_rate;
    separator.speed_of_sound = geometry.speed_of_sound;
    bench.sample_rate = rir.sample_rate;
    bench.speed_of_sound = geometry.speed_of_sound;
    bench.spacing_m = separator.spacing_m;
    bench.workers = workers;
    sweep.sample_rate = rir.sample_rate;
    sweep.speed_of_sound = geometry.speed_of_sound;
    sweep.spacing_m = separator.spacing_m;
    sweep.workers = workers;
    sweep.seed = seed;
    geometry.Validate();
    rir.Validate();
    scene.Validate();
    separator.Validate();
    bench.Validate();
    if (plot.floor_db >= 0.0) throw ConfigError("plot floor must be negative dB");
  }
};

namespace internal {

// Reads typed keys out of one TOML table and rejects keys nobody asked for.
class TableReader {
 public:
  TableReader(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  void Read(const char* key, double& out) {
    if (const toml::node* n = Find(key)) {
      if (const auto v = n->value<double>(); v && n->is_number()) {
        out = *v;
      } else {
        Fail(key, "a number");
      }
    }
  }
  void Read(const char* key, int& out) {
    if (const toml::node* n = Find(key)) {
      if (!n->is_integer()) Fail(key, "an integer");
      out = static_cast<int>(*n->value<std::int64_t>());
    }
  }
  void Read(const char* key, std::uint64_t& out) {
    if (const toml::node* n = Find(key)) {
      if (!n->is_integer() || *n->value<std::int64_t>() < 0) Fail(key, "a non-negative integer");
      out = static_cast<std::uint64_t>(*n->value<std::int64_t>());
    }
  }
  void Read(const char* key, bool& out) {
    if (const toml::node* n = Find(key)) {
      if (!n->is_boolean()) Fail(key, "a boolean");
      out = *n->value<bool>();
    }
  }
  void Read(const char* key, std::string& out) {
    if (const toml::node* n = Find(key)) {
      if (!n->is_string()) Fail(key, "a string");
      out = *n->value<std::string>();
    }
  }
  void Read(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    Read(key, s);
    out = s;
  }
  void Read(const char* key, std::vector<double>& out) {
    if (const toml::node* n = Find(key)) {
      const toml::array* a = n->as_array();
      if (a == nullptr) Fail(key, "an array of numbers");
      std::vector<double> v;
      for (const toml::node& e : *a) {
        if (!e.is_number()) Fail(key, "an array of numbers");
        v.push_back(*e.value<double>());
      }
      out = std::move(v);
    }
  }
  void Read(const char* key, std::vector<std::uint64_t>& out) {
    if (const toml::node* n = Find(key)) {
      const toml::array* a = n->as_array();
      if (a == nullptr) Fail(key, "an array of integers");
      std::vector<std::uint64_t> v;
      for (const toml::node& e : *a) {
        if (!e.is_integer() || *e.value<std::int64_t>() < 0) Fail(key, "an array of non-negative integers");
        v.push_back(static_cast<std::uint64_t>(*e.value<std::int64_t>()));
      }
      out = std::move(v);
    }
  }
  void Read(const char* key, Vec3& out) {
    std::vector<double> v = {out.x(), out.y(), out.z()};
    Read(key, v);
    if (v.size() != 3) Fail(key, "a 3-element array");
    out = Vec3(v[0], v[1], v[2]);
  }
  // [mean, stddev] pair.
  void Read(const char* key, NormalDb& out) {
    std::vector<double> v = {out.mean, out.stddev};
    Read(key, v);
    if (v.size() != 2) Fail(key, "a [mean, stddev] pair");
    out = NormalDb{v[0], v[1]};
  }

  const toml::table* Subtable(const char* key) {
    if (const toml::node* n = Find(key)) {
      if (!n->is_table()) Fail(key, "a table");
      return n->as_table();
    }
    return nullptr;
  }

  // Throws on any key that was not read.
  void Finish() const {
    if (table_ == nullptr) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) {
        throw ConfigError("unknown config key '" + Qualified(std::string(k.str())) + "'");
      }
    }
  }

 private:
  const toml::node* Find(const char* key) {
    seen_.insert(key);
    if (table_ == nullptr) return nullptr;
    return table_->get(key);
  }
  std::string Qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }
  [[noreturn]] void Fail(const char* key, const char* what) const {
    throw ConfigError("config key '" + Qualified(key) + "' must be " + what);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> seen_;
};

inline InterferenceType ParseInterferenceType(const std::string& s) {
  if (s == "speech-like") return InterferenceType::kSpeechLike;
  if (s == "noise-like") return InterferenceType::kNoiseLike;
  throw ConfigError("interference_type must be speech-like or noise-like");
}

inline RoomMode ParseRoomMode(const std::string& s) {
  if (s == "free-field") return RoomMode::kFreeField;
  if (s == "reverberant") return RoomMode::kReverberant;
  throw ConfigError("room_mode must be free-field or reverberant");
}

}  // namespace internal

// Parses TOML text. Every key is optional; defaults are the GlobalConfig
// member initializers. Unknown keys and tables are rejected.
inline GlobalConfig ParseConfig(std::string_view text, const std::string& source = "config") {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  GlobalConfig c;
  internal::TableReader top(&root, "");
  top.Read("seed", c.seed);
  top.Read("output_dir", c.output_dir);
  top.Read("workers", c.workers);

  {
    internal::TableReader r(top.Subtable("geometry"), "geometry");
    auto& g = c.geometry;
    r.Read("theta_deg", g.region.theta_deg);
    r.Read("phi_deg", g.region.phi_deg);
    r.Read("spacing_min_m", g.spacing_min_m);
    r.Read("spacing_max_m", g.spacing_max_m);
    r.Read("room_min_m", g.room_min_m);
    r.Read("room_max_m", g.room_max_m);
    r.Read("source_range_min_m", g.source_range_min_m);
    r.Read("source_range_max_m", g.source_range_max_m);
    r.Read("rt60_min_s", g.rt60_min_s);
    r.Read("rt60_max_s", g.rt60_max_s);
    r.Read("wall_margin_m", g.wall_margin_m);
    r.Read("speed_of_sound", g.speed_of_sound);
    r.Read("max_attempts", g.max_attempts);
    r.Read("free_field", g.free_field);
    r.Finish();
  }
  {
    internal::TableReader r(top.Subtable("rir"), "rir");
    r.Read("sample_rate", c.rir.sample_rate);
    r.Read("max_order_per_axis", c.rir.max_order_per_axis);
    r.Read("max_length_s", c.rir.max_length_s);
    r.Read("tail_db", c.rir.tail_db);
    r.Read("decay_headroom", c.rir.decay_headroom);
    r.Finish();
  }
  {
    internal::TableReader r(top.Subtable("scene"), "scene");
    auto& s = c.scene;
    r.Read("p1", s.p1);
    r.Read("p2", s.p2);
    r.Read("duration_s", s.duration_s);
    r.Read("g0_db", s.gains.component[0]);
    r.Read("g1_db", s.gains.component[1]);
    r.Read("g2_db", s.gains.component[2]);
    r.Read("g3_db", s.gains.component[3]);
    r.Read("g_global_db", s.gains.global);
    r.Read("write_stems", c.write_stems);
    r.Read("write_rirs", c.write_rirs);
    r.Read("target_dir", c.corpus.target_dir);
    r.Read("interference_dir", c.corpus.interference_dir);
    r.Read("noise_dir", c.corpus.noise_dir);
    r.Finish();
  }
  {
    internal::TableReader r(top.Subtable("separator"), "separator");
    auto& s = c.separator;
    double tau_us = s.tau_max_s * 1e6;
    r.Read("tau_max_us", tau_us);
    s.tau_max_s = tau_us * 1e-6;
    r.Read("mask_floor", s.mask_floor);
    r.Read("mask_softness", s.mask_softness);
    r.Read("steering_offset_samples", s.steering_offset);
    r.Read("max_offset_samples", s.max_offset);
    r.Read("spacing_m", s.spacing_m);
    r.Finish();
  }
  {
    internal::TableReader r(top.Subtable("bench"), "bench");
    auto& b = c.bench;
    r.Read("loudspeaker_angles_deg", b.loudspeaker_angles_deg);
    r.Read("loudspeaker_range_m", b.loudspeaker_range_m);
    r.Read("snr_db", b.snr_db);
    std::string type = InterferenceTypeName(b.interference_type);
    r.Read("interference_type", type);
    b.interference_type = internal::ParseInterferenceType(type);
    std::string mode = RoomModeName(b.room_mode);
    r.Read("room_mode", mode);
    b.room_mode = internal::ParseRoomMode(mode);
    r.Read("rt60_s", b.rt60_s);
    r.Read("room_m", b.room_m);
    r.Read("duration_s", b.duration_s);
    r.Read("seeds", b.seeds);
    r.Read("sdr_taps", b.sdr_taps);
    r.Read("trim_samples", b.trim_samples);
    r.Read("steering_offsets", c.steering_offsets);
    r.Finish();
  }
  {
    internal::TableReader r(top.Subtable("sweep"), "sweep");
    auto& s = c.sweep;
    double step = 5.0;
    r.Read("angle_step_deg", step);
    if (!(step > 0.0 && step <= 180.0)) throw ConfigError("sweep.angle_step_deg must lie in (0, 180]");
    s.angles_deg = AngleGrid(step);
    r.Read("source_range_m", s.source_range_m);
    r.Read("free_field", s.free_field);
    r.Read("rt60_s", s.rt60_s);
    r.Read("room_m", s.room_m);
    r.Read("duration_s", s.duration_s);
    r.Read("probe_lo_hz", s.probe_lo_hz);
    r.Read("probe_hi_hz", s.probe_hi_hz);
    r.Read("trim_samples", s.trim_samples);
    r.Read("plot_floor_db", c.plot.floor_db);
    r.Finish();
  }
  top.Finish();
  return c;
}

inline GlobalConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path.string());
}

}  // namespace angsep
