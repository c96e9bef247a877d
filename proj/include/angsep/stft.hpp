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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/fft.hpp"
#include "angsep/types.hpp"

namespace angsep {

enum class WindowKind : std::uint32_t { kSqrtHann = 0, kHann = 1, kRectangular = 2 };

inline std::string WindowName(WindowKind w) {
  switch (w) {
    case WindowKind::kSqrtHann: return "sqrt_hann";
    case WindowKind::kHann: return "hann";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "?";
}

// Periodic window of length n.
inline std::vector<double> MakeWindow(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::kRectangular) return w;
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    w[i] = kind == WindowKind::kHann ? hann : std::sqrt(hann);
  }
  return w;
}

// Framing parameters. Construct through Create() (or the two presets) so
// that the constant-overlap-add condition is checked once, up front.
class StftConfig {
 public:
  static StftConfig Create(std::size_t window_size, std::size_t hop_size, std::size_t fft_size,
                           WindowKind window) {
    StftConfig c(window_size, hop_size, fft_size, window);
    c.Validate();
    return c;
  }

  // 320-sample window and FFT, 160-sample hop, sqrt-Hann analysis and
  // synthesis (Hann overall at 50% overlap).
  static StftConfig Analysis() { return Create(320, 160, 320, WindowKind::kSqrtHann); }
  // 1024/256 framing used by the reconstruction loss; Hann analysis with a
  // matching Hann synthesis at 75% overlap.
  static StftConfig Loss() { return Create(1024, 256, 1024, WindowKind::kHann); }

  std::size_t window_size() const { return window_size_; }
  std::size_t hop_size() const { return hop_size_; }
  std::size_t fft_size() const { return fft_size_; }
  std::size_t bins() const { return fft_size_ / 2 + 1; }
  WindowKind window() const { return window_; }

  const std::vector<double>& analysis_window() const { return analysis_; }
  // Synthesis window already divided by the overlap-add gain.
  const std::vector<double>& synthesis_window() const { return synthesis_; }
  double ola_gain() const { return ola_gain_; }

  bool operator==(const StftConfig& o) const {
    return window_size_ == o.window_size_ && hop_size_ == o.hop_size_ && fft_size_ == o.fft_size_ &&
           window_ == o.window_;
  }

 private:
  StftConfig(std::size_t w, std::size_t h, std::size_t f, WindowKind k)
      : window_size_(w), hop_size_(h), fft_size_(f), window_(k) {}

  void Validate() {
    if (window_size_ < 2 || hop_size_ == 0 || hop_size_ > window_size_) {
      throw ConfigError("STFT needs 0 < hop <= window");
    }
    if (fft_size_ < window_size_ || fft_size_ % 2 != 0) {
      throw ConfigError("STFT fft size must be even and >= window");
    }
    analysis_ = MakeWindow(window_, window_size_);
    synthesis_ = analysis_;
    // Sum of analysis * synthesis over all frames covering a sample must not
    // depend on the sample's phase within the hop.
    std::vector<double> sums(hop_size_, 0.0);
    for (std::size_t i = 0; i < window_size_; ++i) sums[i % hop_size_] += analysis_[i] * synthesis_[i];
    ola_gain_ = sums[0];
    for (double s : sums) {
      if (!(std::abs(s - ola_gain_) <= 1e-9 * std::abs(ola_gain_)) || ola_gain_ <= 0.0) {
        throw ConfigError("window/hop pair violates constant overlap-add");
      }
    }
    for (double& v : synthesis_) v /= ola_gain_;
  }

  std::size_t window_size_;
  std::size_t hop_size_;
  std::size_t fft_size_;
  WindowKind window_;
  std::vector<double> analysis_;
  std::vector<double> synthesis_;
  double ola_gain_ = 1.0;
};

// Time-major complex frames. Frame t covers input samples
// [start_sample + t*hop, start_sample + t*hop + window).
struct Spectrogram {
  std::vector<std::vector<Complex>> frames;
  StftConfig config = StftConfig::Analysis();
  long start_sample = 0;

  std::size_t num_frames() const { return frames.size(); }
  std::size_t num_bins() const { return config.bins(); }
};

// Per-frame analysis and synthesis. Both the offline transforms and the
// streaming engine go through these two calls, which is what makes their
// outputs bit-identical.
class FrameTransform {
 public:
  explicit FrameTransform(const StftConfig& config)
      : config_(config), fft_(config.fft_size()), time_(config.fft_size(), 0.0) {}

  const StftConfig& config() const { return config_; }

  void Analyze(std::span<const double> samples, std::span<Complex> bins) {
    const auto& w = config_.analysis_window();
    std::fill(time_.begin(), time_.end(), 0.0);
    for (std::size_t i = 0; i < config_.window_size(); ++i) time_[i] = samples[i] * w[i];
    fft_.Forward(time_, bins);
  }

  // Windowed, OLA-normalized time frame of window_size samples.
  void Synthesize(std::span<const Complex> bins, std::span<double> frame) {
    fft_.Inverse(bins, time_);
    const auto& w = config_.synthesis_window();
    for (std::size_t i = 0; i < config_.window_size(); ++i) frame[i] = time_[i] * w[i];
  }

 private:
  StftConfig config_;
  RealFft fft_;
  Waveform time_;
};

inline Spectrogram Stft(std::span<const double> x, const StftConfig& config, long start_sample = 0) {
  if (x.size() < config.window_size()) throw ContractError("stft input shorter than one window");
  Spectrogram spec;
  spec.config = config;
  spec.start_sample = start_sample;
  const std::size_t frames = (x.size() - config.window_size()) / config.hop_size() + 1;
  FrameTransform tf(config);
  spec.frames.assign(frames, std::vector<Complex>(config.bins()));
  for (std::size_t t = 0; t < frames; ++t) {
    tf.Analyze(x.subspan(t * config.hop_size(), config.window_size()), spec.frames[t]);
  }
  return spec;
}

// Overlap-add resynthesis. Element 0 of the result is sample start_sample.
// The first and last (window - hop) samples lack full overlap.
inline Waveform Istft(const Spectrogram& spec) {
  const auto& config = spec.config;
  if (spec.frames.empty()) return {};
  const std::size_t hop = config.hop_size();
  const std::size_t win = config.window_size();
  Waveform out((spec.frames.size() - 1) * hop + win, 0.0);
  FrameTransform tf(config);
  Waveform frame(win);
  for (std::size_t t = 0; t < spec.frames.size(); ++t) {
    if (spec.frames[t].size() != config.bins()) throw ContractError("spectrogram frame has wrong bin count");
    tf.Synthesize(spec.frames[t], frame);
    for (std::size_t i = 0; i < win; ++i) out[t * hop + i] += frame[i];
  }
  return out;
}

inline constexpr double kStftLossEpsilon = 1e-7;

// Single-scale spectral reconstruction loss: mean absolute magnitude error
// plus mean absolute log-magnitude error, over all frames and bins.
inline double StftLoss(std::span<const double> estimate, std::span<const double> reference,
                       const StftConfig& config = StftConfig::Loss()) {
  if (estimate.size() != reference.size()) throw ContractError("stft_loss length mismatch");
  const Spectrogram a = Stft(estimate, config);
  const Spectrogram b = Stft(reference, config);
  double lin = 0.0, log_term = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    for (std::size_t k = 0; k < a.frames[t].size(); ++k) {
      const double ma = std::abs(a.frames[t][k]);
      const double mb = std::abs(b.frames[t][k]);
      lin += std::abs(mb - ma);
      log_term += std::abs(std::log(mb + kStftLossEpsilon) - std::log(ma + kStftLossEpsilon));
      ++count;
    }
  }
  return (lin + log_term) / static_cast<double>(count);
}

// Spectrogram dump format (little-endian):
//   char[4]  magic "ASPG"
//   u32      version (1)
//   u32      frames, u32 bins
//   u32      window_size, hop_size, fft_size, window kind
//   i64      start_sample
//   f64[2 * frames * bins]  row-major (frame, bin), real then imaginary.
inline void WriteSpectrogram(const Spectrogram& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  out.write("ASPG", 4);
  put32(1);
  put32(static_cast<std::uint32_t>(spec.frames.size()));
  put32(static_cast<std::uint32_t>(spec.num_bins()));
  put32(static_cast<std::uint32_t>(spec.config.window_size()));
  put32(static_cast<std::uint32_t>(spec.config.hop_size()));
  put32(static_cast<std::uint32_t>(spec.config.fft_size()));
  put32(static_cast<std::uint32_t>(spec.config.window()));
  const std::int64_t start = spec.start_sample;
  out.write(reinterpret_cast<const char*>(&start), 8);
  for (const auto& frame : spec.frames) {
    for (const Complex& c : frame) {
      const double re = c.real(), im = c.imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline Spectrogram ReadSpectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ASPG", 4) != 0) throw IoError("not a spectrogram dump");
  auto get32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw IoError("truncated spectrogram header");
    return v;
  };
  if (get32() != 1) throw IoError("unsupported spectrogram version");
  const std::uint32_t frames = get32(), bins = get32();
  const std::uint32_t win = get32(), hop = get32(), nfft = get32(), kind = get32();
  if (kind > 2) throw IoError("unknown window kind");
  Spectrogram spec;
  try {
    spec.config = StftConfig::Create(win, hop, nfft, static_cast<WindowKind>(kind));
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid framing in spectrogram dump: ") + e.what());
  }
  if (bins != spec.config.bins()) throw IoError("bin count does not match framing");
  std::int64_t start = 0;
  in.read(reinterpret_cast<char*>(&start), 8);
  spec.start_sample = static_cast<long>(start);
  spec.frames.assign(frames, std::vector<Complex>(bins));
  for (auto& frame : spec.frames) {
    for (Complex& c : frame) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), 8);
      in.read(reinterpret_cast<char*>(&im), 8);
      c = Complex(re, im);
    }
  }
  if (!in) throw IoError("truncated spectrogram body");
  return spec;
}

}  // namespace angsep
