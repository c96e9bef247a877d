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

#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "angsep/errors.hpp"
#include "angsep/types.hpp"

namespace angsep {

// Real FFT of fixed size with a half spectrum (size/2 + 1 bins). Not
// thread-safe: the underlying plan cache is mutable, so give each thread
// its own instance.
class RealFft {
 public:
  explicit RealFft(std::size_t size) : size_(size), scratch_(size) {
    if (size < 2 || size % 2 != 0) {
      throw ConfigError("FFT size must be even and >= 2");
    }
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  }

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform.
  void Forward(std::span<const double> in, std::span<Complex> out) {
    fft_.fwd(scratch_.data(), in.data(), static_cast<Eigen::Index>(size_));
    std::copy(scratch_.begin(), scratch_.begin() + bins(), out.begin());
  }

  // Inverse with 1/N scaling, so Inverse(Forward(x)) == x.
  void Inverse(std::span<const Complex> in, std::span<double> out) {
    std::copy(in.begin(), in.begin() + bins(), scratch_.begin());
    fft_.inv(out.data(), scratch_.data(), static_cast<Eigen::Index>(size_));
  }

 private:
  std::size_t size_;
  Eigen::FFT<double> fft_;
  std::vector<Complex> scratch_;
};

inline std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

// Full linear convolution via zero-padded FFT; length |a| + |b| - 1.
inline Waveform FftConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = NextPowerOfTwo(out_len);
  RealFft fft(n);
  Waveform pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<Complex> fa(fft.bins()), fb(fft.bins());
  fft.Forward(pa, fa);
  fft.Forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.Inverse(fa, pa);
  pa.resize(out_len);
  return pa;
}

// c[lag] = sum_n x[n + lag] * y[n] for lag in [-(|y|-1), |x|-1]; the result
// is indexed so that element 0 corresponds to lag -(|y| - 1).
inline Waveform FftCrossCorrelate(std::span<const double> x, std::span<const double> y) {
  Waveform y_rev(y.rbegin(), y.rend());
  return FftConvolve(x, y_rev);
}

}  // namespace angsep
