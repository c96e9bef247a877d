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
#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "angsep/errors.hpp"
#include "angsep/fractional_delay.hpp"
#include "angsep/geometry.hpp"
#include "angsep/stft.hpp"
#include "angsep/stream.hpp"
#include "angsep/types.hpp"

namespace angsep {

// ---------------------------------------------------------------------------
// Common interface
// ---------------------------------------------------------------------------

using ChannelSpans = std::span<const std::span<const double>>;

class SeparatorStream {
 public:
  virtual ~SeparatorStream() = default;
  virtual std::size_t channels() const = 0;
  // Output sample m corresponds to input sample m - latency().
  virtual std::size_t latency() const = 0;
  virtual void Push(ChannelSpans chunk, Waveform& out) = 0;

  void Flush(Waveform& out) {
    const Waveform zeros(latency(), 0.0);
    std::vector<std::span<const double>> chunk(channels(), std::span<const double>(zeros));
    Push(chunk, out);
  }
};

// Multichannel waveform in, one waveform out. Separate() is the offline,
// latency-compensated path (output aligned with input channel 0);
// OpenStream() gives the causal streaming path. For every separator the
// streamed output, shifted back by latency(), equals Separate().
class Separator {
 public:
  virtual ~Separator() = default;
  virtual std::string name() const = 0;
  virtual std::size_t channels() const = 0;
  virtual Waveform Separate(ChannelSpans input) const = 0;
  virtual std::unique_ptr<SeparatorStream> OpenStream() const = 0;

  Waveform Separate(std::span<const double> y0, std::span<const double> y1) const {
    const std::span<const double> chans[2] = {y0, y1};
    return Separate(ChannelSpans(chans));
  }
};

namespace internal {

inline void CheckEqualLengths(ChannelSpans input, std::size_t channels) {
  if (input.size() != channels) throw ContractError("separator channel count mismatch");
  for (const auto& ch : input) {
    if (ch.size() != input[0].size()) throw ContractError("separator channel length mismatch");
  }
}

class FrameStreamAdapter : public SeparatorStream {
 public:
  FrameStreamAdapter(std::unique_ptr<FrameProcessor> p, const StftConfig& config)
      : stream_(std::move(p), config) {}
  std::size_t channels() const override { return stream_.channels(); }
  std::size_t latency() const override { return stream_.latency(); }
  void Push(ChannelSpans chunk, Waveform& out) override { stream_.Push(chunk, out); }

 private:
  StftStream stream_;
};

}  // namespace internal

// ---------------------------------------------------------------------------
// Identity: passes channel 0 through. Its stream is a pure delay line with
// the same 320-sample latency as the spectral separators.
// ---------------------------------------------------------------------------

class IdentitySeparator : public Separator {
 public:
  using Separator::Separate;
  explicit IdentitySeparator(std::size_t channels = 2, std::size_t latency = 320)
      : channels_(channels), latency_(latency) {}

  std::string name() const override { return "identity"; }
  std::size_t channels() const override { return channels_; }

  Waveform Separate(ChannelSpans input) const override {
    internal::CheckEqualLengths(input, channels_);
    return Waveform(input[0].begin(), input[0].end());
  }

  std::unique_ptr<SeparatorStream> OpenStream() const override {
    return std::make_unique<DelayStream>(channels_, latency_);
  }

 private:
  class DelayStream : public SeparatorStream {
   public:
    DelayStream(std::size_t channels, std::size_t latency)
        : channels_(channels), latency_(latency), line_(latency, 0.0) {}
    std::size_t channels() const override { return channels_; }
    std::size_t latency() const override { return latency_; }
    void Push(ChannelSpans chunk, Waveform& out) override {
      internal::CheckEqualLengths(chunk, channels_);
      for (double v : chunk[0]) {
        line_.push_back(v);
        out.push_back(line_.front());
        line_.pop_front();
      }
    }

   private:
    std::size_t channels_;
    std::size_t latency_;
    std::deque<double> line_;
  };

  std::size_t channels_;
  std::size_t latency_;
};

// ---------------------------------------------------------------------------
// IPD mask separator
// ---------------------------------------------------------------------------

struct SeparatorConfig {
  // Target TDOA half-band; default d*sin(30 deg)/c at d = 0.10 m.
  double tau_max_s = FarFieldTdoa(0.10, 30.0);
  double mask_softness = 0.5;  // radians of wrapped phase distance
  double mask_floor = 0.1;
  double steering_offset = 0.0;  // samples applied to channel 1
  double max_offset = kDefaultMaxOffset;
  double sample_rate = kDefaultSampleRate;
  double spacing_m = 0.10;  // nominal spacing; bounds tau_max
  double speed_of_sound = kDefaultSpeedOfSound;
  StftConfig stft = StftConfig::Analysis();

  void Validate() const {
    if (!(tau_max_s > 0.0 && tau_max_s < spacing_m / speed_of_sound)) {
      throw ConfigError("tau_max must lie in (0, d/c)");
    }
    if (!(mask_floor >= 0.0 && mask_floor < 1.0)) throw ConfigError("mask_floor must lie in [0, 1)");
    if (!(mask_softness > 0.0)) throw ConfigError("mask_softness must be positive");
    if (sample_rate <= 0.0) throw ConfigError("invalid sample rate");
    if (std::abs(steering_offset) > max_offset) {
      throw ContractError("steering offset exceeds the configured maximum");
    }
  }
};

// Returns a copy steered by `offset` samples: channel 1 is shifted by the
// offset before masking, moving the passband toward sources whose TDOA is
// `offset` samples.
inline SeparatorConfig Steer(SeparatorConfig config, double offset) {
  if (std::abs(offset) > config.max_offset) {
    throw ContractError("steering offset exceeds the configured maximum");
  }
  config.steering_offset = offset;
  return config;
}

struct FrequencyBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// Band in which the mask fully rejects an endfire source: above lo_hz the
// endfire phase clears the half-band by mask_softness, below hi_hz it has
// not yet wrapped past pi.
inline FrequencyBand ResolvableBand(const SeparatorConfig& config) {
  const double endfire = config.spacing_m / config.speed_of_sound;
  return {config.mask_softness / (2.0 * kPi * (endfire - config.tau_max_s)), 1.0 / (2.0 * endfire)};
}

inline double WrapPhase(double phi) {
  phi = std::remainder(phi, 2.0 * kPi);
  return phi;
}

// Per-bin gains aligned to one spectrogram frame.
struct MaskFrame {
  std::vector<double> gains;
};

class IpdMaskProcessor : public FrameProcessor {
 public:
  explicit IpdMaskProcessor(const SeparatorConfig& config) : config_(config) {
    const std::size_t bins = config.stft.bins();
    half_band_.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate / static_cast<double>(config.stft.fft_size());
      half_band_[k] = 2.0 * kPi * f * config.tau_max_s;
    }
  }

  std::size_t channels() const override { return 2; }

  // Raised-cosine falloff over the wrapped distance from the observed IPD
  // to the admissible set {2*pi*f*tau : |tau| <= tau_max}.
  double Gain(std::size_t bin, Complex y0, Complex y1) const {
    const double hb = half_band_[bin];
    double dist = 0.0;
    if (hb < kPi) {
      const double phi = std::abs(WrapPhase(std::arg(y0 * std::conj(y1))));
      dist = std::max(0.0, phi - hb);
    }
    const double floor = config_.mask_floor;
    if (dist >= config_.mask_softness) return floor;
    return floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(kPi * dist / config_.mask_softness));
  }

  MaskFrame Mask(std::span<const Complex> y0, std::span<const Complex> y1) const {
    MaskFrame m;
    m.gains.resize(y0.size());
    for (std::size_t k = 0; k < y0.size(); ++k) m.gains[k] = Gain(k, y0[k], y1[k]);
    return m;
  }

  void Process(const FrameContext& ctx, std::span<Complex> out) override {
    const auto y0 = ctx.Bins(0);
    const auto y1 = ctx.Bins(1);
    for (std::size_t k = 0; k < y0.size(); ++k) out[k] = Gain(k, y0[k], y1[k]) * y0[k];
  }

 private:
  SeparatorConfig config_;
  std::vector<double> half_band_;
};

namespace internal {

// Applies the steering shift to channel 1 causally. The stream lags its
// input by the shift's lookahead (0 for non-negative integer offsets), then
// feeds the frame engine; total latency is window + lookahead.
class SteeredStream : public SeparatorStream {
 public:
  SteeredStream(std::unique_ptr<FrameProcessor> p, const StftConfig& config, double offset)
      : engine_(std::move(p), config) {
    const auto split = SplitDelay(offset);
    n0_ = split.integer;
    fractional_ = split.fraction != 0.0;
    if (fractional_) kernel_ = MakeFractionalDelayKernel(split.fraction);
    const long reach = fractional_ ? kFractionalDelayHalfWidth : 0;
    lookahead_ = static_cast<std::size_t>(std::max(0L, reach - n0_));
    keep_ = static_cast<std::size_t>(std::abs(n0_) + 2 * reach + 2) + lookahead_;
  }

  std::size_t channels() const override { return 2; }
  std::size_t latency() const override { return engine_.latency() + lookahead_; }

  void Push(ChannelSpans chunk, Waveform& out) override {
    CheckEqualLengths(chunk, 2);
    for (std::size_t i = 0; i < chunk[0].size(); ++i) {
      y0_.push_back(chunk[0][i]);
      y1_.push_back(chunk[1][i]);
      ++received_;
      if (received_ <= lookahead_) {
        out.push_back(0.0);
      } else {
        const long e = static_cast<long>(received_ - 1 - lookahead_);
        const double a = y0_[static_cast<std::size_t>(e - base0_)];
        const double b = ShiftedSample(e);
        const double s0[1] = {a}, s1[1] = {b};
        const std::span<const double> pair[2] = {s0, s1};
        engine_.Push(ChannelSpans(pair), out);
      }
      Trim();
    }
  }

 private:
  double At(long idx) const {
    if (idx < base1_ || idx >= base1_ + static_cast<long>(y1_.size())) return 0.0;
    return y1_[static_cast<std::size_t>(idx - base1_)];
  }

  double ShiftedSample(long e) const {
    if (!fractional_) return At(e - n0_);
    return FractionalDelaySample(kernel_, n0_, e, [this](long i) { return At(i); });
  }

  void Trim() {
    const long next = static_cast<long>(received_) - static_cast<long>(lookahead_);
    while (base0_ < next && !y0_.empty()) {
      y0_.pop_front();
      ++base0_;
    }
    while (y1_.size() > keep_) {
      y1_.pop_front();
      ++base1_;
    }
  }

  StftStream engine_;
  long n0_ = 0;
  bool fractional_ = false;
  FractionalDelayKernel kernel_{};
  std::size_t lookahead_ = 0;
  std::size_t keep_ = 0;
  std::size_t received_ = 0;
  std::deque<double> y0_, y1_;
  long base0_ = 0, base1_ = 0;
};

}  // namespace internal

// Delay-contrast separator: passes time-frequency bins whose inter-channel
// phase is consistent with a TDOA inside the target band, attenuates the
// rest down to mask_floor. Output is the masked channel 0.
class IpdSeparator : public Separator {
 public:
  using Separator::Separate;
  explicit IpdSeparator(SeparatorConfig config = {}) : config_(std::move(config)) { config_.Validate(); }

  std::string name() const override { return "ipd"; }
  std::size_t channels() const override { return 2; }
  const SeparatorConfig& config() const { return config_; }

  Waveform Separate(ChannelSpans input) const override {
    internal::CheckEqualLengths(input, 2);
    const std::size_t len = input[0].size();
    IpdMaskProcessor processor(config_);
    if (config_.steering_offset == 0.0) return ProcessOffline(input, processor, config_.stft);
    // A delayed channel 1 carries signal past the input's end; keep it, as
    // the stream does, so the last frames see the same data.
    const std::size_t pad = config_.stft.window_size() + static_cast<std::size_t>(std::ceil(std::abs(config_.steering_offset))) +
                            kFractionalDelayHalfWidth + 1;
    Waveform y0(input[0].begin(), input[0].end()), y1(input[1].begin(), input[1].end());
    y0.resize(len + pad, 0.0);
    y1.resize(len + pad, 0.0);
    const Waveform shifted = ShiftSignal(y1, config_.steering_offset);
    const std::span<const double> chans[2] = {y0, shifted};
    Waveform out = ProcessOffline(ChannelSpans(chans), processor, config_.stft);
    out.resize(len);
    return out;
  }

  std::unique_ptr<SeparatorStream> OpenStream() const override {
    auto p = std::make_unique<IpdMaskProcessor>(config_);
    if (config_.steering_offset == 0.0) {
      return std::make_unique<internal::FrameStreamAdapter>(std::move(p), config_.stft);
    }
    return std::make_unique<internal::SteeredStream>(std::move(p), config_.stft, config_.steering_offset);
  }

 private:
  SeparatorConfig config_;
};

inline Waveform IpdSeparate(std::span<const double> y0, std::span<const double> y1,
                            const SeparatorConfig& config = {}) {
  if (y0.size() != y1.size()) throw ContractError("ipd_separate channel length mismatch");
  return IpdSeparator(config).Separate(y0, y1);
}

// ---------------------------------------------------------------------------
// Multichannel Wiener filter baseline
// ---------------------------------------------------------------------------

// Per-bin spatial covariance matrices.
struct SpatialCovariance {
  std::vector<Eigen::MatrixXcd> bins;
  std::size_t channels() const { return bins.empty() ? 0 : static_cast<std::size_t>(bins[0].rows()); }
};

// Frame-averaged outer products of the channel spectra.
inline SpatialCovariance EstimateCovariance(ChannelSpans clip, const StftConfig& config = StftConfig::Analysis()) {
  internal::CheckEqualLengths(clip, clip.size());
  const Eigen::Index m = static_cast<Eigen::Index>(clip.size());
  std::vector<Spectrogram> specs;
  for (const auto& ch : clip) specs.push_back(Stft(ch, config));
  SpatialCovariance cov;
  cov.bins.assign(config.bins(), Eigen::MatrixXcd::Zero(m, m));
  const std::size_t frames = specs[0].num_frames();
  Eigen::VectorXcd y(m);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < config.bins(); ++k) {
      for (Eigen::Index c = 0; c < m; ++c) y[c] = specs[static_cast<std::size_t>(c)].frames[t][k];
      cov.bins[k].noalias() += y * y.adjoint();
    }
  }
  for (auto& r : cov.bins) r /= static_cast<double>(frames);
  return cov;
}

// Rank-1 multichannel Wiener filter per bin, referenced to channel 0:
//   w = Rn^-1 Rs e0 / (mu + tr(Rn^-1 Rs)),  Rs ~ sigma v v^H,
// with diagonal loading 1e-3 * tr(Rn) / M on Rn. The output bin is w^H y.
inline std::vector<Eigen::VectorXcd> McwfWeights(const SpatialCovariance& signal_cov,
                                                 const SpatialCovariance& noise_cov, double mu = 1.0) {
  if (signal_cov.bins.size() != noise_cov.bins.size() || signal_cov.channels() != noise_cov.channels()) {
    throw ContractError("signal and noise covariances disagree in shape");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(signal_cov.channels());
  std::vector<Eigen::VectorXcd> weights(signal_cov.bins.size());
  for (std::size_t k = 0; k < signal_cov.bins.size(); ++k) {
    const Eigen::MatrixXcd rs_full = 0.5 * (signal_cov.bins[k] + signal_cov.bins[k].adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rs_full);
    const double sigma = std::max(0.0, eig.eigenvalues()[m - 1]);
    const Eigen::VectorXcd v = eig.eigenvectors().col(m - 1);
    const Eigen::MatrixXcd rs = sigma * v * v.adjoint();

    Eigen::MatrixXcd rn = 0.5 * (noise_cov.bins[k] + noise_cov.bins[k].adjoint());
    double load = 1e-3 * rn.trace().real() / static_cast<double>(m);
    if (!(load > 0.0)) load = 1e-12;
    rn.diagonal().array() += load;
    Eigen::LLT<Eigen::MatrixXcd> llt(rn);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("noise covariance not positive definite at bin " + std::to_string(k) +
                           " (trace " + std::to_string(rn.trace().real()) + ")");
    }
    const Eigen::MatrixXcd rn_inv_rs = llt.solve(rs);
    const Complex denom = mu + rn_inv_rs.trace();
    Eigen::VectorXcd w = rn_inv_rs.col(0) / denom;
    if (!w.allFinite()) {
      throw NumericalError("non-finite Wiener weights at bin " + std::to_string(k));
    }
    weights[k] = std::move(w);
  }
  return weights;
}

class McwfFrameProcessor : public FrameProcessor {
 public:
  explicit McwfFrameProcessor(std::vector<Eigen::VectorXcd> weights) : weights_(std::move(weights)) {}
  std::size_t channels() const override {
    return weights_.empty() ? 0 : static_cast<std::size_t>(weights_[0].size());
  }
  void Process(const FrameContext& ctx, std::span<Complex> out) override {
    for (std::size_t k = 0; k < out.size(); ++k) {
      Complex acc = 0.0;
      for (std::size_t c = 0; c < ctx.channels(); ++c) {
        acc += std::conj(weights_[k][static_cast<Eigen::Index>(c)]) * ctx.Bins(c)[k];
      }
      out[k] = acc;
    }
  }

 private:
  std::vector<Eigen::VectorXcd> weights_;
};

// Time-invariant Wiener beamformer built from calibration covariances.
class McwfSeparator : public Separator {
 public:
  using Separator::Separate;
  McwfSeparator(const SpatialCovariance& signal_cov, const SpatialCovariance& noise_cov,
                StftConfig stft = StftConfig::Analysis())
      : weights_(McwfWeights(signal_cov, noise_cov)), stft_(std::move(stft)) {
    if (weights_.size() != stft_.bins()) throw ContractError("covariance bins do not match the framing");
  }

  std::string name() const override { return "mcwf"; }
  std::size_t channels() const override { return static_cast<std::size_t>(weights_[0].size()); }
  const std::vector<Eigen::VectorXcd>& weights() const { return weights_; }

  Waveform Separate(ChannelSpans input) const override {
    internal::CheckEqualLengths(input, channels());
    McwfFrameProcessor p(weights_);
    return ProcessOffline(input, p, stft_);
  }

  std::unique_ptr<SeparatorStream> OpenStream() const override {
    return std::make_unique<internal::FrameStreamAdapter>(std::make_unique<McwfFrameProcessor>(weights_), stft_);
  }

 private:
  std::vector<Eigen::VectorXcd> weights_;
  StftConfig stft_;
};

inline Waveform McwfSeparate(ChannelSpans y, const SpatialCovariance& signal_cov,
                             const SpatialCovariance& noise_cov) {
  return McwfSeparator(signal_cov, noise_cov).Separate(y);
}

// Streams `input` through the separator in fixed-size chunks, flushes, and
// removes the latency so the result aligns with Separate().
inline Waveform SeparateStreaming(const Separator& separator, ChannelSpans input, std::size_t chunk_size = 160) {
  if (chunk_size == 0) throw ContractError("chunk size must be positive");
  auto stream = separator.OpenStream();
  const std::size_t len = input.empty() ? 0 : input[0].size();
  Waveform out;
  out.reserve(len + stream->latency());
  for (std::size_t pos = 0; pos < len; pos += chunk_size) {
    const std::size_t n = std::min(chunk_size, len - pos);
    std::vector<std::span<const double>> chunk;
    for (const auto& ch : input) chunk.push_back(ch.subspan(pos, n));
    stream->Push(chunk, out);
  }
  stream->Flush(out);
  return Waveform(out.begin() + static_cast<long>(stream->latency()),
                  out.begin() + static_cast<long>(stream->latency() + len));
}

}  // namespace angsep
