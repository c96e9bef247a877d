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

#include <cmath>
#include <cstddef>
#include <random>
#include <span>

#include "angsep/fft.hpp"
#include "angsep/random.hpp"
#include "angsep/types.hpp"

namespace angsep {

inline void NormalizeRms(Waveform& x, double target_rms = 1.0) {
  const double rms = std::sqrt(MeanPower(x));
  if (rms > 0.0) {
    const double g = target_rms / rms;
    for (double& v : x) v *= g;
  }
}

// Zeroes every bin outside [lo_hz, hi_hz] (brick-wall, zero phase).
inline Waveform BandLimit(std::span<const double> x, double sample_rate, double lo_hz, double hi_hz) {
  if (x.empty()) return {};
  const std::size_t n = NextPowerOfTwo(x.size());
  RealFft fft(n);
  Waveform buf(n, 0.0);
  std::copy(x.begin(), x.end(), buf.begin());
  std::vector<Complex> spec(fft.bins());
  fft.Forward(buf, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    if (f < lo_hz || f > hi_hz) spec[k] = 0.0;
  }
  fft.Inverse(spec, buf);
  buf.resize(x.size());
  return buf;
}

// 1/f-power noise band-limited to [lo_hz, hi_hz], unit RMS.
inline Waveform PinkNoise(std::size_t length, double sample_rate, Rng& rng,
                          double lo_hz = 20.0, double hi_hz = -1.0) {
  if (length == 0) return {};
  if (hi_hz < 0.0) hi_hz = sample_rate / 2.0;
  const std::size_t n = NextPowerOfTwo(length);
  std::normal_distribution<double> normal(0.0, 1.0);
  Waveform white(n);
  for (double& v : white) v = normal(rng);
  RealFft fft(n);
  std::vector<Complex> spec(fft.bins());
  fft.Forward(white, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    spec[k] = (f < lo_hz || f > hi_hz || f <= 0.0) ? Complex(0.0) : spec[k] / std::sqrt(f);
  }
  fft.Inverse(spec, white);
  white.resize(length);
  NormalizeRms(white);
  return white;
}

// Pink noise under a syllabic-rate (4 Hz) amplitude envelope with random
// phase; a stand-in for speech when no corpus is supplied.
inline Waveform SpeechLikeNoise(std::size_t length, double sample_rate, Rng& rng,
                                double modulation_hz = 4.0) {
  Waveform x = PinkNoise(length, sample_rate, rng, 80.0, 7000.0);
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    const double lobe = 0.5 * (1.0 - std::cos(2.0 * kPi * modulation_hz * t + phase));
    x[n] *= 0.1 + 0.9 * lobe * lobe;
  }
  NormalizeRms(x);
  return x;
}

// Harmonic complex with a 1/k amplitude tilt and random phases.
inline Waveform MultiToneComplex(std::size_t length, double sample_rate, double f0, Rng& rng) {
  Waveform x(length, 0.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int k = 1; k * f0 < 0.45 * sample_rate; ++k) {
    const double ph = phase(rng);
    const double amp = 1.0 / k;
    const double w = 2.0 * kPi * k * f0 / sample_rate;
    for (std::size_t n = 0; n < length; ++n) x[n] += amp * std::sin(w * static_cast<double>(n) + ph);
  }
  NormalizeRms(x);
  return x;
}

// Pink noise gated into bursts of 150-600 ms separated by short gaps.
inline Waveform ColoredNoiseBursts(std::size_t length, double sample_rate, Rng& rng) {
  Waveform x = PinkNoise(length, sample_rate, rng);
  std::uniform_real_distribution<double> on(0.15, 0.6), off(0.05, 0.3);
  std::size_t n = 0;
  while (n < length) {
    const auto burst = static_cast<std::size_t>(on(rng) * sample_rate);
    const auto gap = static_cast<std::size_t>(off(rng) * sample_rate);
    n += burst;
    for (std::size_t g = 0; g < gap && n < length; ++g, ++n) x[n] = 0.0;
  }
  NormalizeRms(x);
  return x;
}

}  // namespace angsep
