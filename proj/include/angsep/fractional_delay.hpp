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
#include <span>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/types.hpp"

namespace angsep {

// Hann-windowed sinc interpolation kernel, +/-40 taps around the rounded
// delay. Shared by the image-source simulator and the steering offset so
// that both realize sub-sample delays identically.
inline constexpr int kFractionalDelayHalfWidth = 40;
inline constexpr int kFractionalDelayTaps = 2 * kFractionalDelayHalfWidth + 1;

using FractionalDelayKernel = std::array<double, kFractionalDelayTaps>;

struct FractionalDelaySplit {
  long integer;     // round(delay)
  double fraction;  // delay - integer, in [-0.5, 0.5]
};

inline FractionalDelaySplit SplitDelay(double delay) {
  const double r = std::round(delay);
  return {static_cast<long>(r), delay - r};
}

// Tap k of the kernel (index k + W) for fractional part f:
//   h[k] = sinc(k - f) * 0.5 * (1 + cos(pi * (k - f) / (W + 1))).
// sin(pi*(k - f)) is evaluated as -(-1)^k * sin(pi*f), so an integer delay
// (f == 0) is an exact unit impulse. The window cosine uses a rotation
// recurrence; the simulator evaluates this kernel for every image source.
inline FractionalDelayKernel MakeFractionalDelayKernel(double fraction) {
  FractionalDelayKernel h{};
  const double s = std::sin(kPi * fraction);
  const double step = kPi / (kFractionalDelayHalfWidth + 1);
  const double start = step * (-kFractionalDelayHalfWidth - fraction);
  Complex rot(std::cos(start), std::sin(start));
  const Complex inc(std::cos(step), std::sin(step));
  for (int k = -kFractionalDelayHalfWidth; k <= kFractionalDelayHalfWidth; ++k) {
    const double x = static_cast<double>(k) - fraction;
    const double window = 0.5 * (1.0 + rot.real());
    double value;
    if (x == 0.0) {
      value = 1.0;
    } else if (fraction == 0.0) {
      value = 0.0;
    } else {
      const double sign = (k % 2 == 0) ? -1.0 : 1.0;
      value = window * sign * s / (kPi * x);
    }
    h[static_cast<std::size_t>(k + kFractionalDelayHalfWidth)] = value;
    rot *= inc;
  }
  return h;
}

// Adds amplitude * kernel(delay) into out; taps outside the buffer are
// dropped.
inline void AddFractionalImpulse(std::span<double> out, double delay, double amplitude) {
  const auto [n0, frac] = SplitDelay(delay);
  if (frac == 0.0) {
    if (n0 >= 0 && n0 < static_cast<long>(out.size())) out[static_cast<std::size_t>(n0)] += amplitude;
    return;
  }
  const FractionalDelayKernel h = MakeFractionalDelayKernel(frac);
  for (int k = -kFractionalDelayHalfWidth; k <= kFractionalDelayHalfWidth; ++k) {
    const long n = n0 + k;
    if (n < 0 || n >= static_cast<long>(out.size())) continue;
    out[static_cast<std::size_t>(n)] += amplitude * h[static_cast<std::size_t>(k + kFractionalDelayHalfWidth)];
  }
}

// The kernel tabulated at 1/4096-sample steps of the fractional part and
// linearly interpolated between neighbours (tap error below 1e-7). Used by
// the image-source simulator, which renders hundreds of thousands of paths.
class FractionalDelayTable {
 public:
  static const FractionalDelayTable& Instance() {
    static const FractionalDelayTable table;
    return table;
  }

  void Add(std::span<double> out, double delay, double amplitude) const {
    const auto [n0, frac] = SplitDelay(delay);
    if (frac == 0.0) {
      if (n0 >= 0 && n0 < static_cast<long>(out.size())) out[static_cast<std::size_t>(n0)] += amplitude;
      return;
    }
    const double pos = (frac + 0.5) * kSteps;
    const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(kSteps - 1));
    const double t = pos - static_cast<double>(i);
    const FractionalDelayKernel& a = kernels_[i];
    const FractionalDelayKernel& b = kernels_[i + 1];
    const long first = std::max(-static_cast<long>(kFractionalDelayHalfWidth), -n0);
    const long last = std::min(static_cast<long>(kFractionalDelayHalfWidth), static_cast<long>(out.size()) - 1 - n0);
    const double wa = amplitude * (1.0 - t), wb = amplitude * t;
    for (long k = first; k <= last; ++k) {
      const auto idx = static_cast<std::size_t>(k + kFractionalDelayHalfWidth);
      out[static_cast<std::size_t>(n0 + k)] += wa * a[idx] + wb * b[idx];
    }
  }

 private:
  static constexpr int kSteps = 4096;

  FractionalDelayTable() : kernels_(kSteps + 1) {
    for (int i = 0; i <= kSteps; ++i) {
      kernels_[static_cast<std::size_t>(i)] = MakeFractionalDelayKernel(static_cast<double>(i) / kSteps - 0.5);
    }
  }

  std::vector<FractionalDelayKernel> kernels_;
};

// One output sample of x delayed by (n0 + frac) samples, reading x through
// `at`, which returns 0 outside the signal. Summation order is fixed so the
// streaming and offline paths agree bit for bit.
template <typename Reader>
double FractionalDelaySample(const FractionalDelayKernel& h, long n0, long n, Reader&& at) {
  double acc = 0.0;
  for (int k = -kFractionalDelayHalfWidth; k <= kFractionalDelayHalfWidth; ++k) {
    acc += h[static_cast<std::size_t>(k + kFractionalDelayHalfWidth)] * at(n - n0 - k);
  }
  return acc;
}

// Delays x by `offset` samples (negative advances), keeping the length.
// Integer offsets are exact shifts with zero fill; fractional offsets are
// filtered with the windowed-sinc kernel.
inline Waveform ShiftSignal(std::span<const double> x, double offset) {
  const long len = static_cast<long>(x.size());
  Waveform y(x.size(), 0.0);
  const auto [n0, frac] = SplitDelay(offset);
  if (frac == 0.0) {
    for (long n = 0; n < len; ++n) {
      const long src = n - n0;
      if (src >= 0 && src < len) y[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(src)];
    }
    return y;
  }
  const FractionalDelayKernel h = MakeFractionalDelayKernel(frac);
  auto at = [&](long i) { return (i >= 0 && i < len) ? x[static_cast<std::size_t>(i)] : 0.0; };
  for (long n = 0; n < len; ++n) y[static_cast<std::size_t>(n)] = FractionalDelaySample(h, n0, n, at);
  return y;
}

inline constexpr double kDefaultMaxOffset = 8.0;

// ShiftSignal with the steering range check.
inline Waveform ApplySampleOffset(std::span<const double> x, double offset, double max_offset = kDefaultMaxOffset) {
  if (!(std::abs(offset) <= max_offset)) throw ContractError("sample offset exceeds the configured maximum");
  return ShiftSignal(x, offset);
}

}  // namespace angsep
