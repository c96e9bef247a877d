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
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "angsep/errors.hpp"
#include "angsep/fft.hpp"
#include "angsep/geometry.hpp"
#include "angsep/parallel.hpp"
#include "angsep/random.hpp"
#include "angsep/rir.hpp"
#include "angsep/scene.hpp"
#include "angsep/separator.hpp"
#include "angsep/signals.hpp"
#include "angsep/types.hpp"

namespace angsep {

inline constexpr double kMetricCapDb = 100.0;

struct SdrResult {
  double sdr_db = 0.0;
  bool capped = false;
  bool regularized = false;  // Toeplitz system needed diagonal loading
};

// bss_eval signal-to-distortion ratio with a single reference. The
// estimate is projected onto the span of the reference delayed by
// 0..filter_taps-1 samples (the allowed distortion filter); everything
// outside that span counts as distortion.
inline SdrResult BssSdrDetailed(std::span<const double> estimate, std::span<const double> reference,
                                std::size_t filter_taps = 512) {
  if (estimate.size() != reference.size()) throw ContractError("bss_sdr length mismatch");
  if (filter_taps == 0) throw ContractError("bss_sdr needs at least one filter tap");
  if (Energy(reference) == 0.0) throw ContractError("bss_sdr reference is all zero");
  const std::size_t n = reference.size();
  const std::size_t taps = filter_taps;

  // xcorr[lag + n - 1] = sum_m a[m + lag] * b[m]
  const Waveform auto_corr = FftCrossCorrelate(reference, reference);
  const Waveform cross = FftCrossCorrelate(estimate, reference);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(taps), static_cast<Eigen::Index>(taps));
  Eigen::VectorXd b(static_cast<Eigen::Index>(taps));
  auto lag_value = [&](const Waveform& c, long lag) {
    const long idx = lag + static_cast<long>(n) - 1;
    return (idx >= 0 && idx < static_cast<long>(c.size())) ? c[static_cast<std::size_t>(idx)] : 0.0;
  };
  for (std::size_t i = 0; i < taps; ++i) {
    for (std::size_t j = 0; j < taps; ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          lag_value(auto_corr, static_cast<long>(i) - static_cast<long>(j));
    }
    b[static_cast<Eigen::Index>(i)] = lag_value(cross, static_cast<long>(i));
  }

  SdrResult result;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const double diag_max = g.diagonal().maxCoeff();
  const double diag_min = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || diag_min <= 1e-12 * diag_max) {
    g.diagonal().array() += 1e-10 * diag_max;
    ldlt.compute(g);
    result.regularized = true;
  }
  const Eigen::VectorXd coeffs = ldlt.solve(b);
  if (!coeffs.allFinite()) throw NumericalError("bss_sdr distortion filter is not finite");

  const Waveform filt(coeffs.data(), coeffs.data() + coeffs.size());
  const Waveform target = FftConvolve(reference, filt);  // length n + taps - 1
  double target_energy = 0.0, residual_energy = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double est = i < n ? estimate[i] : 0.0;
    const double e = est - target[i];
    target_energy += target[i] * target[i];
    residual_energy += e * e;
  }
  if (target_energy <= 0.0) {
    result.sdr_db = -kMetricCapDb;
    result.capped = true;
  } else if (residual_energy <= 0.0 || target_energy >= residual_energy * 1e10) {
    result.sdr_db = kMetricCapDb;
    result.capped = true;
  } else {
    result.sdr_db = 10.0 * std::log10(target_energy / residual_energy);
  }
  return result;
}

inline double BssSdr(std::span<const double> estimate, std::span<const double> reference,
                     std::size_t filter_taps = 512) {
  return BssSdrDetailed(estimate, reference, filter_taps).sdr_db;
}

// 10*log10(E_in / E_out); a silent output saturates at +100 dB.
inline double SuppressionDb(std::span<const double> input, std::span<const double> output) {
  if (input.size() != output.size()) throw ContractError("suppression_db length mismatch");
  const double ein = Energy(input);
  if (ein == 0.0) throw ContractError("suppression_db input is all zero");
  const double eout = Energy(output);
  if (eout <= 0.0 || ein >= eout * 1e10) return kMetricCapDb;
  return 10.0 * std::log10(ein / eout);
}

// Drops `head` samples from the front and `tail` from the back.
inline std::span<const double> Trimmed(std::span<const double> x, std::size_t head, std::size_t tail) {
  if (x.size() <= head + tail) throw ContractError("signal shorter than the trimmed margins");
  return x.subspan(head, x.size() - head - tail);
}

// ---------------------------------------------------------------------------
// Directivity
// ---------------------------------------------------------------------------

struct DirectivityPoint {
  double angle_deg = 0.0;
  double gain_db = 0.0;
};

struct DirectivitySweep {
  double offset = 0.0;
  std::string separator;
  std::vector<DirectivityPoint> points;
};

inline std::vector<double> AngleGrid(double step_deg, double start = 0.0, double stop = 360.0) {
  std::vector<double> out;
  for (double a = start; a < stop - 1e-9; a += step_deg) out.push_back(a);
  return out;
}

struct SweepConfig {
  std::vector<double> angles_deg = AngleGrid(5.0);
  double source_range_m = 5.0;
  bool free_field = true;
  double rt60_s = 0.3;  // reverberant mode only
  Vec3 room_m = Vec3(7.0, 6.0, 3.0);
  double spacing_m = 0.10;
  double duration_s = 2.0;
  double probe_lo_hz = 20.0;
  double probe_hi_hz = -1.0;  // <0: Nyquist
  std::uint64_t seed = 1;
  std::size_t trim_samples = 320;
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  int workers = 1;
};

// Shared layout for free-field and reverberant sweeps: mic pair centred in
// the room at 1.2 m height, axis along x. Free-field rooms are enlarged to
// hold the source ring; walls do not reflect.
inline RoomSpec SweepRoom(const SweepConfig& config) {
  RoomSpec room;
  if (config.free_field) {
    const double side = 2.0 * config.source_range_m + 4.0;
    room.dimensions = Vec3(side, side, side);
    room.rt60 = 0.0;
    room.wall_reflection = 0.0;
  } else {
    room.dimensions = config.room_m;
    room.rt60 = config.rt60_s;
    room.wall_reflection = SabineReflection(room.dimensions, config.rt60_s);
  }
  const Vec3 mid(room.dimensions.x() / 2.0, room.dimensions.y() / 2.0,
                 config.free_field ? room.dimensions.z() / 2.0 : std::min(1.2, room.dimensions.z() / 2.0));
  room.mic_pair = MicPair::FromMidpoint(mid, Vec3::UnitX(), config.spacing_m);
  return room;
}

inline Waveform SweepProbe(const SweepConfig& config) {
  Rng rng = MakeRng(config.seed, Stream::kProbe);
  const auto len = static_cast<std::size_t>(std::llround(config.duration_s * config.sample_rate));
  return PinkNoise(len, config.sample_rate, rng, config.probe_lo_hz, config.probe_hi_hz);
}

// Two-channel capture of `probe` from a point source at `azimuth_deg`.
inline std::array<Waveform, 2> RenderAtAzimuth(const RoomSpec& room, std::span<const double> probe,
                                               double azimuth_deg, double range, const RirParams& params) {
  const Vec3 src = PositionAtAzimuth(room.mic_pair, azimuth_deg, range);
  std::array<Waveform, 2> y;
  y[0] = Convolve(probe, SimulateRir(room, src, room.mic_pair.position_a, params).samples);
  y[1] = Convolve(probe, SimulateRir(room, src, room.mic_pair.position_b, params).samples);
  return y;
}

// Output/input energy ratio (dB, mic 0 as input) of a lone pink-noise
// source swept around the array.
inline DirectivitySweep RunDirectivitySweep(const Separator& separator, const SweepConfig& config,
                                            double offset = 0.0) {
  const RoomSpec room = SweepRoom(config);
  const Waveform probe = SweepProbe(config);
  RirParams params;
  params.sample_rate = config.sample_rate;
  params.speed_of_sound = config.speed_of_sound;
  DirectivitySweep sweep;
  sweep.offset = offset;
  sweep.separator = separator.name();
  sweep.points.resize(config.angles_deg.size());
  ParallelFor(config.angles_deg.size(), config.workers, [&](std::size_t i) {
    const double angle = config.angles_deg[i];
    const auto y = RenderAtAzimuth(room, probe, angle, config.source_range_m, params);
    const Waveform out = separator.Separate(y[0], y[1]);
    const double s = SuppressionDb(Trimmed(y[0], config.trim_samples, config.trim_samples),
                                   Trimmed(out, config.trim_samples, config.trim_samples));
    sweep.points[i] = {angle, -s};
  });
  return sweep;
}

// Maps an azimuth to (-180, 180].
inline double SignedAzimuth(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

inline double GainAt(const DirectivitySweep& sweep, double azimuth_deg) {
  const double want = SignedAzimuth(azimuth_deg);
  for (const auto& p : sweep.points) {
    if (std::abs(SignedAzimuth(p.angle_deg) - want) < 1e-6) return p.gain_db;
  }
  throw ContractError("azimuth not on the sweep grid");
}

// Centre of the front-half passband: mean azimuth (in [-90, 90]) of the
// points within `within_db` of the front-half maximum.
inline double PassbandCenterDeg(const DirectivitySweep& sweep, double within_db = 1.0) {
  double best = -1e300;
  for (const auto& p : sweep.points) {
    const double a = SignedAzimuth(p.angle_deg);
    if (a >= -90.0 && a <= 90.0) best = std::max(best, p.gain_db);
  }
  double sum = 0.0;
  int count = 0;
  for (const auto& p : sweep.points) {
    const double a = SignedAzimuth(p.angle_deg);
    if (a >= -90.0 && a <= 90.0 && p.gain_db >= best - within_db) {
      sum += a;
      ++count;
    }
  }
  if (count == 0) throw ContractError("sweep has no front-half points");
  return sum / count;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
  bool saturated = false;
};

inline Stat Summarize(std::span<const double> values, double cap = kMetricCapDb) {
  Stat s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) {
    s.mean += v;
    if (std::abs(v) >= cap) s.saturated = true;
  }
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

// Per-angle metric tables (one per condition) plus optional directivity
// sweeps.
struct EvalReport {
  std::string kind;
  std::string metric;
  std::vector<double> angles_deg;
  std::vector<std::string> conditions;
  std::map<std::string, std::vector<Stat>> table;
  std::vector<DirectivitySweep> sweeps;
  nlohmann::json metadata = nlohmann::json::object();

  const Stat& at(const std::string& condition, double angle_deg) const {
    const auto it = table.find(condition);
    if (it == table.end()) throw ContractError("no such condition: " + condition);
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
      if (std::abs(angles_deg[i] - angle_deg) < 1e-9) return it->second[i];
    }
    throw ContractError("angle not in report");
  }
};

}  // namespace angsep
