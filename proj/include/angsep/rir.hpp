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
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/fractional_delay.hpp"
#include "angsep/geometry.hpp"
#include "angsep/parallel.hpp"
#include "angsep/types.hpp"

namespace angsep {

struct RirParams {
  double sample_rate = kDefaultSampleRate;
  double speed_of_sound = kDefaultSpeedOfSound;
  int max_order_per_axis = 40;  // reflections per axis
  double max_length_s = 1.0;
  double tail_db = -60.0;  // tail energy bound relative to peak energy
  // Image sources are enumerated up to this multiple of the Sabine decay
  // time before tail truncation.
  double decay_headroom = 1.5;

  void Validate() const {
    if (sample_rate <= 0.0 || speed_of_sound <= 0.0) throw ConfigError("invalid rir rates");
    if (max_length_s * sample_rate < 1.0) throw ConfigError("rir length is zero samples");
    if (max_order_per_axis < 0) throw ConfigError("negative reflection order");
    if (tail_db >= 0.0) throw ConfigError("tail threshold must be negative dB");
  }
};

// One image-source contribution: a fractionally delayed, scaled impulse.
struct PathComponent {
  double delay_samples = 0.0;
  double amplitude = 0.0;
};

struct Rir {
  Waveform samples;
  double sample_rate = kDefaultSampleRate;
  int source_index = -1;
  int receiver_index = -1;
  // Contributions in enumeration order. Empty for responses that did not
  // come from the simulator (e.g. loaded from disk).
  std::vector<PathComponent> paths;
  bool length_capped = false;  // tail criterion not reached within the cap

  // `tabulated` renders through FractionalDelayTable instead of exact
  // kernels.
  static Rir FromPaths(std::vector<PathComponent> paths, std::size_t length,
                       double sample_rate = kDefaultSampleRate, bool tabulated = false) {
    Rir r;
    r.sample_rate = sample_rate;
    r.samples.assign(length, 0.0);
    if (tabulated) {
      const auto& table = FractionalDelayTable::Instance();
      for (const auto& p : paths) table.Add(r.samples, p.delay_samples, p.amplitude);
    } else {
      for (const auto& p : paths) AddFractionalImpulse(r.samples, p.delay_samples, p.amplitude);
    }
    r.paths = std::move(paths);
    return r;
  }
};

namespace internal {

struct AxisImage {
  double offset;  // image coordinate minus receiver coordinate, meters
  int reflections;
};

inline std::vector<AxisImage> AxisImages(double source, double receiver, double length,
                                         double max_dist, int max_order) {
  std::vector<AxisImage> out;
  const int n_max = static_cast<int>(std::ceil(max_dist / (2.0 * length))) + 1;
  for (int n = -n_max; n <= n_max; ++n) {
    for (int q = 0; q <= 1; ++q) {
      const int refl = std::abs(n - q) + std::abs(n);
      if (refl > max_order) continue;
      const double coord = (1 - 2 * q) * source + 2.0 * n * length;
      const double off = coord - receiver;
      if (std::abs(off) > max_dist) continue;
      out.push_back({off, refl});
    }
  }
  return out;
}

// First index after which the remaining energy is at most `fraction` of
// the peak energy.
inline std::size_t TailCut(std::span<const double> h, double fraction) {
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  const double bound = fraction * peak * peak;
  double tail = 0.0;
  std::size_t cut = h.size();
  while (cut > 0) {
    const double next = tail + h[cut - 1] * h[cut - 1];
    if (next > bound) break;
    tail = next;
    --cut;
  }
  return cut;
}

inline void CheckInside(const Vec3& p, const Vec3& dims, const char* what) {
  for (int i = 0; i < 3; ++i) {
    if (!(p[i] > 0.0 && p[i] < dims[i])) {
      throw ContractError(std::string(what) + " lies outside the room");
    }
  }
}

}  // namespace internal

// Image-source room impulse response (Allen & Berkley) with uniform,
// frequency-independent walls. Each image adds
// reflection^(reflections) / distance at a fractional delay of distance / c.
inline Rir SimulateRir(const RoomSpec& room, const Vec3& source, const Vec3& receiver,
                       const RirParams& params = {}) {
  params.Validate();
  internal::CheckInside(source, room.dimensions, "source");
  internal::CheckInside(receiver, room.dimensions, "receiver");
  const double beta = room.wall_reflection;
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("wall reflection must be in [0, 1)");

  const double fs = params.sample_rate;
  const double c = params.speed_of_sound;
  const double direct = (source - receiver).norm();
  if (direct < 1e-9) throw DegenerateInputError("source coincides with receiver");
  const double direct_delay = direct / c * fs;

  const std::size_t cap = static_cast<std::size_t>(std::floor(params.max_length_s * fs));
  std::size_t length;
  if (beta == 0.0) {
    length = static_cast<std::size_t>(std::ceil(direct_delay)) + kFractionalDelayHalfWidth + 1;
  } else {
    const double decay = SabineRt60(room.dimensions, beta);
    length = static_cast<std::size_t>(
        std::ceil(direct_delay + params.decay_headroom * decay * fs)) + kFractionalDelayHalfWidth + 1;
  }
  bool capped = length > cap;
  length = std::min(length, cap);

  std::vector<PathComponent> paths;
  if (beta == 0.0) {
    paths.push_back({direct_delay, 1.0 / direct});
  } else {
    const double max_dist = static_cast<double>(length) / fs * c;
    std::array<std::vector<internal::AxisImage>, 3> axes;
    for (int i = 0; i < 3; ++i) {
      axes[i] = internal::AxisImages(source[i], receiver[i], room.dimensions[i], max_dist,
                                     params.max_order_per_axis);
    }
    std::vector<double> beta_pow(3 * params.max_order_per_axis + 1);
    beta_pow[0] = 1.0;
    for (std::size_t k = 1; k < beta_pow.size(); ++k) beta_pow[k] = beta_pow[k - 1] * beta;
    const double max_d2 = max_dist * max_dist;
    for (const auto& ix : axes[0]) {
      const double dx2 = ix.offset * ix.offset;
      if (dx2 > max_d2) continue;
      for (const auto& iy : axes[1]) {
        const double dxy2 = dx2 + iy.offset * iy.offset;
        if (dxy2 > max_d2) continue;
        for (const auto& iz : axes[2]) {
          const double d2 = dxy2 + iz.offset * iz.offset;
          if (d2 > max_d2) continue;
          const double dist = std::sqrt(d2);
          const int refl = ix.reflections + iy.reflections + iz.reflections;
          paths.push_back({dist / c * fs, beta_pow[static_cast<std::size_t>(refl)] / dist});
        }
      }
    }
  }

  Rir rir = Rir::FromPaths(std::move(paths), length, fs, /*tabulated=*/beta > 0.0);
  if (beta > 0.0) {
    const double fraction = std::pow(10.0, params.tail_db / 10.0);
    const std::size_t cut = internal::TailCut(rir.samples, fraction);
    if (cut < rir.samples.size()) {
      rir.samples.resize(std::max<std::size_t>(cut, 1));
      capped = false;
    }
  }
  rir.length_capped = capped;
  return rir;
}

// Index of the contribution with the largest |amplitude|; ties go to the
// earliest enumerated path.
inline std::size_t StrongestPathIndex(const Rir& rir) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rir.paths.size(); ++i) {
    if (std::abs(rir.paths[i].amplitude) > std::abs(rir.paths[best].amplitude)) best = i;
  }
  return best;
}

// Keeps only the strongest path: its whole fractional-delay kernel is
// retained, everything else is zeroed. Responses without path metadata fall
// back to the +/-40-sample neighbourhood of the absolute peak.
inline Rir Anechoic(const Rir& rir) {
  double peak = 0.0;
  std::size_t peak_index = 0;
  for (std::size_t n = 0; n < rir.samples.size(); ++n) {
    if (std::abs(rir.samples[n]) > peak) {
      peak = std::abs(rir.samples[n]);
      peak_index = n;
    }
  }
  if (peak == 0.0) throw DegenerateInputError("anechoic() of an all-zero impulse response");

  Rir out;
  out.sample_rate = rir.sample_rate;
  out.source_index = rir.source_index;
  out.receiver_index = rir.receiver_index;
  out.samples.assign(rir.samples.size(), 0.0);
  if (!rir.paths.empty()) {
    const PathComponent strongest = rir.paths[StrongestPathIndex(rir)];
    AddFractionalImpulse(out.samples, strongest.delay_samples, strongest.amplitude);
    out.paths = {strongest};
    return out;
  }
  const std::size_t lo = peak_index >= kFractionalDelayHalfWidth ? peak_index - kFractionalDelayHalfWidth : 0;
  const std::size_t hi = std::min(rir.samples.size(), peak_index + kFractionalDelayHalfWidth + 1);
  std::copy(rir.samples.begin() + static_cast<long>(lo), rir.samples.begin() + static_cast<long>(hi),
            out.samples.begin() + static_cast<long>(lo));
  return out;
}

inline constexpr int kSourceCount = 4;
inline constexpr int kReceiverCount = 2;

// 4x2 grid indexed [source k][receiver j]; sources follow SourceRole order,
// receiver 0 is mic a and receiver 1 is mic b.
struct RirMatrix {
  std::array<std::array<Rir, kReceiverCount>, kSourceCount> entries;
  std::array<std::array<Rir, kReceiverCount>, kSourceCount> anechoic_entries;
  // Factor applied to source k's raw responses (1 / joint peak).
  std::array<double, kSourceCount> normalization{};
  // Direct-path delay in samples for each (k, j).
  std::array<std::array<double, kReceiverCount>, kSourceCount> direct_delay_samples{};
};

// Simulates all eight responses and normalizes each source so that its
// largest absolute peak over both receivers is exactly 1. Anechoic
// reductions are taken before normalization and divided by the same peak.
inline RirMatrix MakeRirMatrix(const RoomSpec& room, const RirParams& params = {}, int workers = 1) {
  if (room.sources.size() != kSourceCount) throw ContractError("RirMatrix needs exactly 4 sources");
  RirMatrix m;
  const std::array<Vec3, kReceiverCount> receivers = {room.mic_pair.position_a, room.mic_pair.position_b};
  ParallelFor(kSourceCount * kReceiverCount, workers, [&](std::size_t idx) {
    const int k = static_cast<int>(idx) / kReceiverCount;
    const int j = static_cast<int>(idx) % kReceiverCount;
    Rir r = SimulateRir(room, room.sources[static_cast<std::size_t>(k)].position, receivers[static_cast<std::size_t>(j)], params);
    r.source_index = k;
    r.receiver_index = j;
    Rir a = Anechoic(r);
    m.direct_delay_samples[k][j] =
        (room.sources[static_cast<std::size_t>(k)].position - receivers[static_cast<std::size_t>(j)]).norm() /
        params.speed_of_sound * params.sample_rate;
    m.entries[k][j] = std::move(r);
    m.anechoic_entries[k][j] = std::move(a);
  });
  for (int k = 0; k < kSourceCount; ++k) {
    double peak = 0.0;
    for (int j = 0; j < kReceiverCount; ++j) {
      for (double v : m.entries[k][j].samples) peak = std::max(peak, std::abs(v));
    }
    if (peak == 0.0) throw DegenerateInputError("simulated impulse response is all zero");
    for (int j = 0; j < kReceiverCount; ++j) {
      for (Rir* r : {&m.entries[k][j], &m.anechoic_entries[k][j]}) {
        for (double& v : r->samples) v /= peak;
        for (auto& p : r->paths) p.amplitude /= peak;
      }
    }
    m.normalization[k] = 1.0 / peak;
  }
  return m;
}

// Reverberation time from Schroeder backward integration: a line is fitted
// to the energy decay curve between -5 dB and (-5 + fit_range_db) and
// extrapolated to -60 dB.
inline double EstimateRt60(std::span<const double> h, double sample_rate, double fit_range_db = 20.0) {
  std::vector<double> edc(h.size());
  double acc = 0.0;
  for (std::size_t n = h.size(); n-- > 0;) {
    acc += h[n] * h[n];
    edc[n] = acc;
  }
  if (acc <= 0.0) throw DegenerateInputError("EstimateRt60 of an all-zero response");
  const double hi = -5.0;
  const double lo = -5.0 - fit_range_db;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < edc.size(); ++n) {
    const double db = 10.0 * std::log10(edc[n] / acc);
    if (db > hi || db < lo) continue;
    const double t = static_cast<double>(n) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (count < 2) throw NumericalError("energy decay curve too short for an rt60 fit");
  const double slope = (static_cast<double>(count) * sxy - sx * sy) /
                       (static_cast<double>(count) * sxx - sx * sx);
  if (slope >= 0.0) throw NumericalError("energy decay curve does not decay");
  return -60.0 / slope;
}

}  // namespace angsep
