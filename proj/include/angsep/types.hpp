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

#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace angsep {

using Complex = std::complex<double>;
using Waveform = std::vector<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultSampleRate = 16000.0;
inline constexpr double kDefaultSpeedOfSound = 343.0;

inline double Energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double MeanPower(std::span<const double> x) {
  return x.empty() ? 0.0 : Energy(x) / static_cast<double>(x.size());
}

}  // namespace angsep
