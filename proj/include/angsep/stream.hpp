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
#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/stft.hpp"
#include "angsep/types.hpp"

namespace angsep {

// Read access to the current analysis frame and a bounded number of past
// frames. Frames before the start of the stream read as zeros.
class FrameContext {
 public:
  FrameContext(std::size_t channels, std::size_t history, std::size_t bins)
      : history_(history), bins_(bins), frames_(channels) {}

  std::size_t channels() const { return frames_.size(); }
  std::size_t bins() const { return bins_; }
  long frame_index() const { return frame_index_; }

  // Spectrum of `channel` at `lag` frames in the past (0 = current frame).
  std::span<const Complex> Bins(std::size_t channel, long lag = 0) const {
    if (lag < 0) throw ContractError("causal processor requested a future frame");
    if (static_cast<std::size_t>(lag) > history_) {
      throw ContractError("processor requested more history than it declared");
    }
    if (channel >= frames_.size()) throw ContractError("channel index out of range");
    const auto& ring = frames_[channel];
    if (static_cast<std::size_t>(lag) >= ring.size()) return zeros();
    return ring[ring.size() - 1 - static_cast<std::size_t>(lag)];
  }

  void Push(std::size_t channel, std::vector<Complex> bins) {
    auto& ring = frames_[channel];
    ring.push_back(std::move(bins));
    while (ring.size() > history_ + 1) ring.pop_front();
  }

  void Advance() { ++frame_index_; }

 private:
  std::span<const Complex> zeros() const {
    if (zeros_.size() != bins_) zeros_.assign(bins_, Complex(0.0));
    return zeros_;
  }

  std::size_t history_;
  std::size_t bins_;
  long frame_index_ = 0;
  std::vector<std::deque<std::vector<Complex>>> frames_;
  mutable std::vector<Complex> zeros_;
};

// A per-frame spectral processor: multichannel frame in, one output frame.
// Implementations may keep internal state but only see the current and
// declared past frames.
class FrameProcessor {
 public:
  virtual ~FrameProcessor() = default;
  virtual std::size_t channels() const = 0;
  virtual std::size_t history() const { return 0; }
  virtual void Reset() {}
  virtual void Process(const FrameContext& ctx, std::span<Complex> out) = 0;
};

// Passes channel 0 through unchanged.
class IdentityFrameProcessor : public FrameProcessor {
 public:
  explicit IdentityFrameProcessor(std::size_t channels = 1) : channels_(channels) {}
  std::size_t channels() const override { return channels_; }
  void Process(const FrameContext& ctx, std::span<Complex> out) override {
    const auto in = ctx.Bins(0);
    std::copy(in.begin(), in.end(), out.begin());
  }

 private:
  std::size_t channels_;
};

// Offline frame processing. The signal is framed as if preceded by
// (window - hop) zeros and followed by enough zeros for every sample to be
// fully overlapped, so the output has the input's length and alignment.
inline Waveform ProcessOffline(std::span<const std::span<const double>> channels, FrameProcessor& processor,
                               const StftConfig& config) {
  if (channels.size() != processor.channels()) throw ContractError("channel count mismatch");
  const std::size_t len = channels[0].size();
  for (const auto& ch : channels) {
    if (ch.size() != len) throw ContractError("channel length mismatch");
  }
  const std::size_t win = config.window_size(), hop = config.hop_size();
  const std::size_t prefix = win - hop;
  const std::size_t frames = (len + prefix + hop - 1) / hop + (win + hop - 1) / hop;
  const std::size_t padded_len = (frames - 1) * hop + win;

  std::vector<Spectrogram> specs;
  for (const auto& ch : channels) {
    Waveform padded(padded_len, 0.0);
    std::copy(ch.begin(), ch.end(), padded.begin() + static_cast<long>(prefix));
    specs.push_back(Stft(padded, config, -static_cast<long>(prefix)));
  }
  processor.Reset();
  FrameContext ctx(channels.size(), processor.history(), config.bins());
  Spectrogram out_spec;
  out_spec.config = config;
  out_spec.start_sample = -static_cast<long>(prefix);
  out_spec.frames.assign(frames, std::vector<Complex>(config.bins()));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels.size(); ++c) ctx.Push(c, specs[c].frames[t]);
    processor.Process(ctx, out_spec.frames[t]);
    ctx.Advance();
  }
  Waveform full = Istft(out_spec);
  return Waveform(full.begin() + static_cast<long>(prefix), full.begin() + static_cast<long>(prefix + len));
}

// Sample-by-sample streaming counterpart of ProcessOffline. Every pushed
// input sample yields exactly one output sample, and output sample m is the
// offline result at index m - latency(), where latency() == window_size.
class StftStream {
 public:
  StftStream(std::unique_ptr<FrameProcessor> processor, const StftConfig& config)
      : processor_(std::move(processor)),
        config_(config),
        transform_(config),
        ctx_(processor_->channels(), processor_->history(), config.bins()),
        pending_(processor_->channels()),
        acc_(config.window_size(), 0.0),
        frame_(config.window_size()),
        out_bins_(config.bins()) {
    processor_->Reset();
    const std::size_t prefix = config.window_size() - config.hop_size();
    for (auto& p : pending_) p.assign(prefix, 0.0);
    discard_ = prefix;
  }

  std::size_t channels() const { return pending_.size(); }
  std::size_t latency() const { return config_.window_size(); }

  // Pushes equal-length chunks for every channel and appends the same number
  // of output samples to `out`.
  void Push(std::span<const std::span<const double>> chunk, Waveform& out) {
    if (chunk.size() != channels()) throw ContractError("channel count mismatch");
    const std::size_t n = chunk[0].size();
    for (const auto& ch : chunk) {
      if (ch.size() != n) throw ContractError("channel chunk length mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < channels(); ++c) pending_[c].push_back(chunk[c][i]);
      if (pending_[0].size() >= config_.window_size()) RunFrame();
      if (received_ < latency()) {
        out.push_back(0.0);
      } else {
        if (ready_.empty()) throw ContractError("streaming engine underrun");
        out.push_back(ready_.front());
        ready_.pop_front();
      }
      ++received_;
    }
  }

  // Pushes latency() zeros so every real input sample has been emitted.
  void Flush(Waveform& out) {
    const Waveform zeros(latency(), 0.0);
    std::vector<std::span<const double>> chunk(channels(), std::span<const double>(zeros));
    Push(chunk, out);
  }

 private:
  void RunFrame() {
    const std::size_t win = config_.window_size(), hop = config_.hop_size();
    for (std::size_t c = 0; c < channels(); ++c) {
      std::vector<Complex> bins(config_.bins());
      std::vector<double> samples(pending_[c].begin(), pending_[c].begin() + static_cast<long>(win));
      transform_.Analyze(samples, bins);
      ctx_.Push(c, std::move(bins));
      pending_[c].erase(pending_[c].begin(), pending_[c].begin() + static_cast<long>(hop));
    }
    processor_->Process(ctx_, out_bins_);
    ctx_.Advance();
    transform_.Synthesize(out_bins_, frame_);
    for (std::size_t i = 0; i < win; ++i) acc_[i] += frame_[i];
    for (std::size_t i = 0; i < hop; ++i) {
      if (discard_ > 0) {
        --discard_;
      } else {
        ready_.push_back(acc_[i]);
      }
    }
    std::copy(acc_.begin() + static_cast<long>(hop), acc_.end(), acc_.begin());
    std::fill(acc_.end() - static_cast<long>(hop), acc_.end(), 0.0);
  }

  std::unique_ptr<FrameProcessor> processor_;
  StftConfig config_;
  FrameTransform transform_;
  FrameContext ctx_;
  std::vector<std::deque<double>> pending_;
  Waveform acc_;
  Waveform frame_;
  std::vector<Complex> out_bins_;
  std::deque<double> ready_;
  std::size_t discard_ = 0;
  std::size_t received_ = 0;
};

// Streams `channels` through `processor` in chunks of `chunk_size` and
// flushes; the result has length |x| + latency.
inline Waveform StreamProcess(std::span<const std::span<const double>> channels,
                              std::unique_ptr<FrameProcessor> processor, const StftConfig& config,
                              std::size_t chunk_size) {
  if (chunk_size == 0) throw ContractError("chunk size must be positive");
  StftStream stream(std::move(processor), config);
  const std::size_t len = channels.empty() ? 0 : channels[0].size();
  Waveform out;
  out.reserve(len + stream.latency());
  for (std::size_t pos = 0; pos < len; pos += chunk_size) {
    const std::size_t n = std::min(chunk_size, len - pos);
    std::vector<std::span<const double>> chunk;
    for (const auto& ch : channels) chunk.push_back(ch.subspan(pos, n));
    stream.Push(chunk, out);
  }
  stream.Flush(out);
  return out;
}

}  // namespace angsep
