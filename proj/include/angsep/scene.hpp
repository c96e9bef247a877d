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
#include <random>
#include <span>

#include "angsep/errors.hpp"
#include "angsep/fft.hpp"
#include "angsep/geometry.hpp"
#include "angsep/random.hpp"
#include "angsep/rir.hpp"
#include "angsep/signals.hpp"
#include "angsep/types.hpp"

namespace angsep {

// Normal distribution in dB; stddev is a spread parameter, so stddev = 0
// yields the mean exactly.
struct NormalDb {
  double mean = 0.0;
  double stddev = 0.0;

  double Sample(Rng& rng) const {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(rng);
  }
};

struct GainConfig {
  // Per-component level: target1, target2, interference, noise.
  std::array<NormalDb, 4> component = {NormalDb{0.0, 0.0}, NormalDb{-3.0, 3.0},
                                       NormalDb{-3.0, 3.0}, NormalDb{-5.0, 10.0}};
  NormalDb global{-10.0, 5.0};
};

struct GainSpec {
  std::array<double, 4> component_db{};
  double global_db = 0.0;
};

inline GainSpec SampleGains(const GainConfig& config, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kGains);
  GainSpec g;
  for (std::size_t k = 0; k < 4; ++k) g.component_db[k] = config.component[k].Sample(rng);
  g.global_db = config.global.Sample(rng);
  return g;
}

struct SceneConfig {
  double p1 = 0.8;  // probability that target2 is empty
  double p2 = 0.6;  // probability that the interference is empty
  double duration_s = 3.0;
  double sample_rate = kDefaultSampleRate;
  GainConfig gains;

  std::size_t length() const {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  }

  void Validate() const {
    if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0) throw ConfigError("p1/p2 must be probabilities");
    if (duration_s <= 0.0 || sample_rate <= 0.0) throw ConfigError("invalid scene duration");
    for (const auto& c : gains.component) {
      if (c.stddev < 0.0) throw ConfigError("negative gain stddev");
    }
    if (gains.global.stddev < 0.0) throw ConfigError("negative gain stddev");
  }
};

// Source waveforms, indexed like SourceRole. An empty waveform means the
// component is absent. target1 is always present.
struct SceneSignals {
  Waveform s1, s2, i, n;

  const Waveform& operator[](std::size_t k) const {
    switch (k) {
      case 0: return s1;
      case 1: return s2;
      case 2: return i;
      default: return n;
    }
  }
};

struct Dropout {
  bool target2_empty = false;
  bool interference_empty = false;
};

inline Dropout SampleDropout(const SceneConfig& config, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kDropout);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dropout d;
  d.target2_empty = u(rng) < config.p1;
  d.interference_empty = u(rng) < config.p2;
  return d;
}

// Synthetic surrogates: speech-like modulated pink noise for the talkers,
// pink-noise bursts for the noise source.
inline SceneSignals SampleSyntheticSignals(const SceneConfig& config, std::uint64_t seed) {
  config.Validate();
  const Dropout d = SampleDropout(config, seed);
  Rng rng = MakeRng(seed, Stream::kSignals);
  const std::size_t len = config.length();
  const double fs = config.sample_rate;
  SceneSignals s;
  s.s1 = SpeechLikeNoise(len, fs, rng);
  Waveform s2 = SpeechLikeNoise(len, fs, rng);
  Waveform in = SpeechLikeNoise(len, fs, rng);
  s.n = ColoredNoiseBursts(len, fs, rng);
  if (!d.target2_empty) s.s2 = std::move(s2);
  if (!d.interference_empty) s.i = std::move(in);
  return s;
}

// Linear convolution cropped to the signal's length.
inline Waveform Convolve(std::span<const double> signal, std::span<const double> rir) {
  if (signal.empty() || rir.empty()) throw ContractError("convolve() needs non-empty inputs");
  Waveform y = FftConvolve(signal, rir);
  y.resize(signal.size());
  return y;
}

struct MixtureScene {
  Waveform y0, y1;
  Waveform t;  // anechoic target1 + target2 at mic 0
  // stems[k][j]: component k as observed at mic j, after all scaling.
  std::array<std::array<Waveform, 2>, 4> stems;
  std::array<bool, 4> present{};
  std::array<double, 4> component_scale{};  // linear, before global scaling
  double global_scale = 1.0;
  GainSpec gains;
  RoomSpec room;
};

inline double RmsDb(std::span<const double> x) {
  return 10.0 * std::log10(MeanPower(x));
}

// Convolves each present source with its responses, scales each component
// so that its reverberant power at mic 0 equals its sampled gain, then
// scales everything so the mic-0 mixture power equals the global gain. The
// ground truth reuses both scale factors on the anechoic target paths.
inline MixtureScene Synthesize(const RoomSpec& room, const RirMatrix& rirs, const SceneSignals& signals,
                               const GainSpec& gains) {
  if (signals.s1.empty()) throw ContractError("target1 must always be present");
  const std::size_t len = signals.s1.size();
  for (std::size_t k = 1; k < 4; ++k) {
    if (!signals[k].empty() && signals[k].size() != len) {
      throw ConfigError("scene signals must share one length");
    }
  }

  MixtureScene scene;
  scene.gains = gains;
  scene.room = room;
  std::array<std::array<Waveform, 2>, 4> raw;
  Waveform pre_mix(len, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    scene.present[k] = !signals[k].empty();
    if (!scene.present[k]) continue;
    for (std::size_t j = 0; j < 2; ++j) raw[k][j] = Convolve(signals[k], rirs.entries[k][j].samples);
    const double rms = std::sqrt(MeanPower(raw[k][0]));
    if (!(rms > 0.0)) throw DegenerateInputError("component is silent at the reference mic");
    scene.component_scale[k] = std::pow(10.0, gains.component_db[k] / 20.0) / rms;
    for (std::size_t n = 0; n < len; ++n) pre_mix[n] += scene.component_scale[k] * raw[k][0][n];
  }
  const double mix_rms = std::sqrt(MeanPower(pre_mix));
  if (!(mix_rms > 0.0)) throw DegenerateInputError("silent mixture");
  scene.global_scale = std::pow(10.0, gains.global_db / 20.0) / mix_rms;

  scene.y0.assign(len, 0.0);
  scene.y1.assign(len, 0.0);
  scene.t.assign(len, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    const double g = scene.global_scale * scene.component_scale[k];
    for (std::size_t j = 0; j < 2; ++j) {
      Waveform& stem = scene.stems[k][j];
      stem.assign(len, 0.0);
      if (!scene.present[k]) continue;
      for (std::size_t n = 0; n < len; ++n) stem[n] = g * raw[k][j][n];
    }
    for (std::size_t n = 0; n < len; ++n) {
      scene.y0[n] += scene.stems[k][0][n];
      scene.y1[n] += scene.stems[k][1][n];
    }
    if (k < 2 && scene.present[k]) {
      const Waveform direct = Convolve(signals[k], rirs.anechoic_entries[k][0].samples);
      for (std::size_t n = 0; n < len; ++n) scene.t[n] += g * direct[n];
    }
  }
  return scene;
}

}  // namespace angsep
