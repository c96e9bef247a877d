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
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/geometry.hpp"
#include "angsep/metrics.hpp"
#include "angsep/parallel.hpp"
#include "angsep/random.hpp"
#include "angsep/rir.hpp"
#include "angsep/scene.hpp"
#include "angsep/separator.hpp"
#include "angsep/signals.hpp"

namespace angsep {

enum class InterferenceType { kSpeechLike, kNoiseLike };
enum class RoomMode { kFreeField, kReverberant };

inline std::string InterferenceTypeName(InterferenceType t) {
  return t == InterferenceType::kSpeechLike ? "speech-like" : "noise-like";
}
inline std::string RoomModeName(RoomMode m) { return m == RoomMode::kFreeField ? "free-field" : "reverberant"; }

// Simulated listening-room protocol: target at 0 deg, loudspeakers on a
// ring around a two-mic device.
struct BenchConfig {
  std::vector<double> loudspeaker_angles_deg = {0, 45, 90, 135, 180, 225, 270, 315};
  double loudspeaker_range_m = 1.0;
  std::vector<double> snr_db = {0.0, 6.0};
  InterferenceType interference_type = InterferenceType::kSpeechLike;
  RoomMode room_mode = RoomMode::kFreeField;
  double rt60_s = 0.3;
  Vec3 room_m = Vec3(6.0, 5.0, 3.0);
  double spacing_m = 0.10;
  double duration_s = 3.0;
  std::vector<std::uint64_t> seeds = {1};
  std::size_t sdr_taps = 512;
  std::size_t trim_samples = 320;
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  int workers = 1;

  void Validate() const {
    if (loudspeaker_angles_deg.empty()) throw ConfigError("bench needs at least one loudspeaker angle");
    std::set<long> seen;
    for (double a : loudspeaker_angles_deg) {
      if (!seen.insert(std::lround(std::fmod(a + 3600.0, 360.0) * 1e6)).second) {
        throw ConfigError("loudspeaker angles must be distinct");
      }
    }
    if (snr_db.empty()) throw ConfigError("bench needs at least one SNR condition");
    if (seeds.empty()) throw ConfigError("bench needs at least one seed");
    if (loudspeaker_range_m <= 0.0 || duration_s <= 0.0) throw ConfigError("invalid bench geometry");
  }

  std::size_t length() const { return static_cast<std::size_t>(std::llround(duration_s * sample_rate)); }
};

inline std::string SnrCondition(double snr) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "snr_%gdb", snr);
  return buf;
}

// The bench's device: mic pair at the room centre (1.2 m high), axis along x.
inline RoomSpec BenchRoom(const BenchConfig& config) {
  SweepConfig s;
  s.free_field = config.room_mode == RoomMode::kFreeField;
  s.source_range_m = config.loudspeaker_range_m;
  s.room_m = config.room_m;
  s.rt60_s = config.rt60_s;
  s.spacing_m = config.spacing_m;
  return SweepRoom(s);
}

inline RirParams BenchRirParams(const BenchConfig& config) {
  RirParams p;
  p.sample_rate = config.sample_rate;
  p.speed_of_sound = config.speed_of_sound;
  return p;
}

// Loudspeaker programme material for one seed and role.
inline Waveform BenchSignal(const BenchConfig& config, std::uint64_t seed, std::uint64_t role, bool interference) {
  Rng rng = MakeRng(DeriveSeed(seed, role), Stream::kSignals);
  if (interference && config.interference_type == InterferenceType::kNoiseLike) {
    return PinkNoise(config.length(), config.sample_rate, rng);
  }
  return SpeechLikeNoise(config.length(), config.sample_rate, rng);
}

struct BenchCapture {
  std::array<Waveform, 2> target;        // reverberant target at each mic
  std::array<Waveform, 2> interference;  // unscaled
  Waveform reference;                    // anechoic target at mic 0
};

inline BenchCapture CaptureCell(const BenchConfig& config, const RoomSpec& room, double angle_deg,
                                std::uint64_t seed) {
  const RirParams params = BenchRirParams(config);
  const Waveform target = BenchSignal(config, seed, 0, false);
  const Waveform interf = BenchSignal(config, seed, 1, true);
  const Vec3 tpos = PositionAtAzimuth(room.mic_pair, 0.0, config.loudspeaker_range_m);
  const Vec3 ipos = PositionAtAzimuth(room.mic_pair, angle_deg, config.loudspeaker_range_m);
  BenchCapture cap;
  const std::array<Vec3, 2> mics = {room.mic_pair.position_a, room.mic_pair.position_b};
  for (std::size_t j = 0; j < 2; ++j) {
    const Rir rt = SimulateRir(room, tpos, mics[j], params);
    cap.target[j] = Convolve(target, rt.samples);
    if (j == 0) cap.reference = Convolve(target, Anechoic(rt).samples);
    cap.interference[j] = Convolve(interf, SimulateRir(room, ipos, mics[j], params).samples);
  }
  return cap;
}

// Interference gain that puts the mic-0 target/interference power ratio at
// `snr_db`.
inline double InterferenceScale(const BenchCapture& cap, double snr_db) {
  const double pt = MeanPower(cap.target[0]);
  const double pi = MeanPower(cap.interference[0]);
  if (!(pi > 0.0)) throw DegenerateInputError("silent interference capture");
  return std::sqrt(pt / (pi * std::pow(10.0, snr_db / 10.0)));
}

inline std::array<Waveform, 2> MixCell(const BenchCapture& cap, double snr_db) {
  const double g = InterferenceScale(cap, snr_db);
  std::array<Waveform, 2> y;
  for (std::size_t j = 0; j < 2; ++j) {
    y[j].resize(cap.target[j].size());
    for (std::size_t n = 0; n < y[j].size(); ++n) y[j][n] = cap.target[j][n] + g * cap.interference[j][n];
  }
  return y;
}

inline nlohmann::json BenchMetadata(const BenchConfig& config, const Separator& separator) {
  return {{"separator", separator.name()},
          {"interference_type", InterferenceTypeName(config.interference_type)},
          {"room_mode", RoomModeName(config.room_mode)},
          {"rt60_s", config.room_mode == RoomMode::kReverberant ? config.rt60_s : 0.0},
          {"loudspeaker_range_m", config.loudspeaker_range_m},
          {"spacing_m", config.spacing_m},
          {"snr_db", config.snr_db},
          {"seeds", config.seeds},
          {"sdr_taps", config.sdr_taps}};
}

// Target at 0 deg plus interference at each loudspeaker angle, per SNR.
// Conditions: "<snr>" is the separator's BSS-SDR, "<snr>_input" the raw
// mic-0 mixture's, and "<snr>_improvement" their difference.
inline EvalReport RunEnhancementBench(const Separator& separator, const BenchConfig& config) {
  config.Validate();
  const RoomSpec room = BenchRoom(config);
  const std::size_t n_angles = config.loudspeaker_angles_deg.size();
  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_snr = config.snr_db.size();
  // values[cell][snr] = {separated, input}
  std::vector<std::vector<std::array<double, 2>>> values(n_angles * n_seeds);
  ParallelFor(n_angles * n_seeds, config.workers, [&](std::size_t cell) {
    const std::size_t a = cell / n_seeds, s = cell % n_seeds;
    const BenchCapture cap = CaptureCell(config, room, config.loudspeaker_angles_deg[a], config.seeds[s]);
    values[cell].resize(n_snr);
    for (std::size_t q = 0; q < n_snr; ++q) {
      const auto y = MixCell(cap, config.snr_db[q]);
      const Waveform out = separator.Separate(y[0], y[1]);
      values[cell][q] = {BssSdr(out, cap.reference, config.sdr_taps),
                         BssSdr(y[0], cap.reference, config.sdr_taps)};
    }
  });

  EvalReport report;
  report.kind = "enhancement";
  report.metric = "bss_sdr_db";
  report.angles_deg = config.loudspeaker_angles_deg;
  report.metadata = BenchMetadata(config, separator);
  for (std::size_t q = 0; q < n_snr; ++q) {
    const std::string c = SnrCondition(config.snr_db[q]);
    for (const std::string& name : {c, c + "_input", c + "_improvement"}) report.conditions.push_back(name);
    for (std::size_t a = 0; a < n_angles; ++a) {
      std::vector<double> sep, in, imp;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& v = values[a * n_seeds + s][q];
        sep.push_back(v[0]);
        in.push_back(v[1]);
        imp.push_back(v[0] - v[1]);
      }
      report.table[c].push_back(Summarize(sep));
      report.table[c + "_input"].push_back(Summarize(in));
      report.table[c + "_improvement"].push_back(Summarize(imp));
    }
  }
  return report;
}

// One loudspeaker at a time, no target: energy suppression per angle.
inline EvalReport RunSuppressionBench(const Separator& separator, const BenchConfig& config) {
  config.Validate();
  const RoomSpec room = BenchRoom(config);
  const RirParams params = BenchRirParams(config);
  const std::size_t n_angles = config.loudspeaker_angles_deg.size();
  const std::size_t n_seeds = config.seeds.size();
  std::vector<double> values(n_angles * n_seeds);
  ParallelFor(n_angles * n_seeds, config.workers, [&](std::size_t cell) {
    const std::size_t a = cell / n_seeds, s = cell % n_seeds;
    const Waveform src = BenchSignal(config, config.seeds[s], 1, true);
    const auto y = RenderAtAzimuth(room, src, config.loudspeaker_angles_deg[a], config.loudspeaker_range_m, params);
    const Waveform out = separator.Separate(y[0], y[1]);
    values[cell] = SuppressionDb(Trimmed(y[0], config.trim_samples, config.trim_samples),
                                 Trimmed(out, config.trim_samples, config.trim_samples));
  });
  EvalReport report;
  report.kind = "suppression";
  report.metric = "suppression_db";
  report.angles_deg = config.loudspeaker_angles_deg;
  report.metadata = BenchMetadata(config, separator);
  report.conditions = {"single_source"};
  for (std::size_t a = 0; a < n_angles; ++a) {
    report.table["single_source"].push_back(
        Summarize(std::span<const double>(values).subspan(a * n_seeds, n_seeds)));
  }
  return report;
}

using SeparatorFactory = std::function<std::unique_ptr<Separator>(double offset)>;

inline SeparatorFactory IpdFactory(const SeparatorConfig& base) {
  return [base](double offset) { return std::make_unique<IpdSeparator>(Steer(base, offset)); };
}

// One directivity sweep per steering offset.
inline EvalReport RunSteeringBench(const SeparatorFactory& factory, const std::vector<double>& offsets,
                                   const SweepConfig& sweep) {
  if (offsets.empty()) throw ConfigError("steering bench needs at least one offset");
  EvalReport report;
  report.kind = "steering";
  report.metric = "gain_db";
  report.angles_deg = sweep.angles_deg;
  for (double k : offsets) {
    const auto separator = factory(k);
    DirectivitySweep s = RunDirectivitySweep(*separator, sweep, k);
    char name[48];
    std::snprintf(name, sizeof(name), "offset_%+g", k);
    report.conditions.push_back(name);
    auto& col = report.table[name];
    for (const auto& p : s.points) col.push_back(Stat{p.gain_db, 0.0, 1, std::abs(p.gain_db) >= kMetricCapDb});
    if (report.metadata.empty()) report.metadata["separator"] = separator->name();
    report.sweeps.push_back(std::move(s));
  }
  report.metadata["offsets"] = offsets;
  report.metadata["source_range_m"] = sweep.source_range_m;
  report.metadata["free_field"] = sweep.free_field;
  return report;
}

// Wiener baseline calibrated the way the lab protocol does: signal
// covariance from the 0 deg target alone, noise covariance from the
// loudspeakers other than 0 and 180 deg.
inline McwfSeparator CalibrateMcwf(const BenchConfig& config, std::uint64_t seed = 0xCA1B) {
  const RoomSpec room = BenchRoom(config);
  const RirParams params = BenchRirParams(config);
  const Waveform sig = BenchSignal(config, seed, 10, false);
  const auto target = RenderAtAzimuth(room, sig, 0.0, config.loudspeaker_range_m, params);
  std::array<Waveform, 2> noise = {Waveform(config.length(), 0.0), Waveform(config.length(), 0.0)};
  std::uint64_t role = 11;
  for (double a : config.loudspeaker_angles_deg) {
    const double s = std::fmod(std::fmod(a, 360.0) + 360.0, 360.0);
    if (std::abs(s) < 1e-9 || std::abs(s - 180.0) < 1e-9) continue;
    const Waveform src = BenchSignal(config, seed, role++, true);
    const auto y = RenderAtAzimuth(room, src, a, config.loudspeaker_range_m, params);
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t n = 0; n < noise[j].size(); ++n) noise[j][n] += y[j][n];
    }
  }
  const std::span<const double> ts[2] = {target[0], target[1]};
  const std::span<const double> ns[2] = {noise[0], noise[1]};
  return McwfSeparator(EstimateCovariance(ChannelSpans(ts)), EstimateCovariance(ChannelSpans(ns)));
}

}  // namespace angsep
