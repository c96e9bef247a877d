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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include <gtest/gtest.h>

#include "angsep/fft.hpp"
#include "angsep/fractional_delay.hpp"
#include "angsep/signals.hpp"
#include "angsep/stft.hpp"
#include "angsep/stream.hpp"
#include "test_util.hpp"

namespace angsep {
namespace {

using testing::CrossCorrelationLag;
using testing::MaxAbs;
using testing::MaxAbsDiff;
using testing::WhiteNoise;

// Naive DFT bin, the oracle for RealFft.
Complex Dft(std::span<const double> x, std::size_t k) {
  Complex acc = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * i) / n);
  }
  return acc;
}

double InteriorRelativeError(std::span<const double> x, std::span<const double> y, std::size_t edge) {
  double err = 0.0, ref = 0.0;
  for (std::size_t n = edge; n + edge < x.size(); ++n) {
    err += (x[n] - y[n]) * (x[n] - y[n]);
    ref += x[n] * x[n];
  }
  return std::sqrt(err / ref);
}

TEST(RealFftTest, MatchesNaiveDft) {
  const Waveform x = WhiteNoise(320, 1);
  RealFft fft(320);
  std::vector<Complex> bins(fft.bins());
  fft.Forward(x, bins);
  for (std::size_t k : {0u, 1u, 17u, 80u, 159u, 160u}) EXPECT_LT(std::abs(bins[k] - Dft(x, k)), 1e-9) << k;
  Waveform back(320);
  fft.Inverse(bins, back);
  EXPECT_LT(MaxAbsDiff(back, x), 1e-12);
}

TEST(RealFftTest, RejectsOddSize) { EXPECT_THROW(RealFft(321), ConfigError); }

TEST(StftConfigTest, Presets) {
  const StftConfig a = StftConfig::Analysis();
  EXPECT_EQ(a.window_size(), 320u);
  EXPECT_EQ(a.hop_size(), 160u);
  EXPECT_EQ(a.fft_size(), 320u);
  EXPECT_EQ(a.bins(), 161u);
  const StftConfig l = StftConfig::Loss();
  EXPECT_EQ(l.window_size(), 1024u);
  EXPECT_EQ(l.hop_size(), 256u);
}

TEST(StftConfigTest, RejectsNonColaPairs) {
  EXPECT_THROW(StftConfig::Create(320, 120, 320, WindowKind::kSqrtHann), ConfigError);
  EXPECT_THROW(StftConfig::Create(320, 0, 320, WindowKind::kHann), ConfigError);
  EXPECT_THROW(StftConfig::Create(320, 160, 256, WindowKind::kHann), ConfigError);
  EXPECT_NO_THROW(StftConfig::Create(256, 256, 256, WindowKind::kRectangular));
}

TEST(StftTest, ZeroInputGivesZeroSpectrogram) {
  const Spectrogram s = Stft(Waveform(2000, 0.0), StftConfig::Analysis());
  for (const auto& f : s.frames) {
    for (const Complex& c : f) ASSERT_EQ(c, Complex(0.0));
  }
}

TEST(StftTest, FrameIndexingIsCausal) {
  Waveform x(1600, 0.0);
  x[500] = 1.0;
  const Spectrogram s = Stft(x, StftConfig::Analysis(), 100);
  EXPECT_EQ(s.start_sample, 100);
  for (std::size_t t = 0; t < s.num_frames(); ++t) {
    // Frame t covers [t*hop, t*hop + window) of the buffer.
    const bool covers = t * 160 <= 500 && 500 < t * 160 + 320;
    double e = 0.0;
    for (const Complex& c : s.frames[t]) e += std::norm(c);
    EXPECT_EQ(e > 0.0, covers) << t;
  }
}

TEST(StftTest, BinCenteredSinusoidIsConcentrated) {
  const StftConfig rect = StftConfig::Create(320, 320, 320, WindowKind::kRectangular);
  Waveform x(3200);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::cos(2.0 * kPi * 25.0 * static_cast<double>(n) / 320.0);
  const Spectrogram s = Stft(x, rect);
  for (const auto& f : s.frames) {
    double total = 0.0;
    for (const Complex& c : f) total += std::norm(c);
    EXPECT_GE(std::norm(f[25]) / total, 0.99);
  }
}

TEST(StftTest, Parseval) {
  const StftConfig config = StftConfig::Analysis();
  const Waveform x = WhiteNoise(3200, 2);
  const Spectrogram s = Stft(x, config);
  const auto& w = config.analysis_window();
  for (std::size_t t = 0; t < s.num_frames(); t += 5) {
    double time_e = 0.0;
    for (std::size_t i = 0; i < 320; ++i) time_e += std::pow(x[t * 160 + i] * w[i], 2);
    // One-sided spectrum: interior bins count twice.
    double freq_e = 0.0;
    for (std::size_t k = 0; k < s.num_bins(); ++k) {
      const double m = k == 0 || k == s.num_bins() - 1 ? 1.0 : 2.0;
      freq_e += m * std::norm(s.frames[t][k]);
    }
    EXPECT_NEAR(freq_e / 320.0, time_e, 1e-6 * time_e);
  }
}

TEST(StftTest, Linear) {
  const StftConfig config = StftConfig::Analysis();
  const Waveform x = WhiteNoise(1600, 3), y = WhiteNoise(1600, 4);
  Waveform z(1600);
  for (std::size_t n = 0; n < z.size(); ++n) z[n] = 2.0 * x[n] - 0.5 * y[n];
  const Spectrogram sx = Stft(x, config), sy = Stft(y, config), sz = Stft(z, config);
  for (std::size_t t = 0; t < sz.num_frames(); ++t) {
    for (std::size_t k = 0; k < sz.num_bins(); ++k) {
      ASSERT_LT(std::abs(sz.frames[t][k] - (2.0 * sx.frames[t][k] - 0.5 * sy.frames[t][k])), 1e-9);
    }
  }
}

TEST(StftTest, RejectsShortInput) { EXPECT_THROW(Stft(Waveform(100), StftConfig::Analysis()), ContractError); }

class RoundTripTest : public ::testing::TestWithParam<int> {};

TEST_P(RoundTripTest, InteriorReconstruction) {
  const StftConfig config = GetParam() == 0 ? StftConfig::Analysis() : StftConfig::Loss();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Waveform x = WhiteNoise(16000, 10 + seed);
    const Waveform y = Istft(Stft(x, config));
    const double err = InteriorRelativeError(x, y, config.window_size());
    EXPECT_LE(err, 1e-6);
    EXPECT_GE(-20.0 * std::log10(err), 120.0);
  }
}

INSTANTIATE_TEST_SUITE_P(BothFramings, RoundTripTest, ::testing::Values(0, 1));

TEST(StftTest, ImpulseRoundTripKeepsPosition) {
  Waveform x(4000, 0.0);
  x[1234] = 1.0;
  const Waveform y = Istft(Stft(x, StftConfig::Analysis()));
  std::size_t peak = 0;
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (std::abs(y[n]) > std::abs(y[peak])) peak = n;
  }
  EXPECT_EQ(peak, 1234u);
  EXPECT_NEAR(y[1234], 1.0, 1e-12);
}

TEST(StftLossTest, IdentityAndSignBlind) {
  const Waveform x = WhiteNoise(8000, 5);
  Waveform neg = x;
  for (double& v : neg) v = -v;
  EXPECT_EQ(StftLoss(x, x), 0.0);
  EXPECT_NEAR(StftLoss(x, neg), 0.0, 1e-12);
}

TEST(StftLossTest, AgainstSilenceMatchesDirectSummation) {
  const Waveform x = WhiteNoise(8000, 6);
  const Waveform zero(8000, 0.0);
  // Oracle: naive DFT of each Hann-windowed frame.
  const StftConfig config = StftConfig::Loss();
  const auto& w = config.analysis_window();
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> frame(1024);
  for (std::size_t start = 0; start + 1024 <= x.size(); start += 256) {
    for (std::size_t i = 0; i < 1024; ++i) frame[i] = x[start + i] * w[i];
    for (std::size_t k = 0; k <= 512; ++k) {
      const double m = std::abs(Dft(frame, k));
      sum += m + std::abs(std::log(m + kStftLossEpsilon) - std::log(kStftLossEpsilon));
      ++count;
    }
  }
  const double expect = sum / static_cast<double>(count);
  const double loss = StftLoss(zero, x);
  EXPECT_GT(loss, 0.0);
  EXPECT_NEAR(loss, expect, 1e-9 * expect);
  EXPECT_NEAR(StftLoss(x, zero), loss, 1e-12 * loss);
}

TEST(StftLossTest, ShrinksAsEstimateApproachesReference) {
  const Waveform x = WhiteNoise(8000, 7);
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {0.1, 0.3, 0.6, 0.9, 0.99}) {
    Waveform e = x;
    for (double& v : e) v *= a;
    const double loss = StftLoss(e, x);
    EXPECT_LT(loss, prev) << a;
    prev = loss;
  }
}

TEST(StftLossTest, LengthMismatchIsContractError) {
  EXPECT_THROW(StftLoss(Waveform(2000), Waveform(2001)), ContractError);
}

TEST(SpectrogramDumpTest, RoundTripIsExact) {
  const Spectrogram s = Stft(WhiteNoise(2000, 8), StftConfig::Analysis(), -160);
  const auto path = std::filesystem::temp_directory_path() / "angsep_dsp_test.aspg";
  WriteSpectrogram(s, path);
  const Spectrogram r = ReadSpectrogram(path);
  EXPECT_EQ(r.config, s.config);
  EXPECT_EQ(r.start_sample, -160);
  EXPECT_EQ(r.frames, s.frames);
  std::filesystem::resize_file(path, 100);
  EXPECT_THROW(ReadSpectrogram(path), IoError);
  std::filesystem::remove(path);
}

TEST(SampleOffsetTest, ZeroIsIdentity) {
  const Waveform x = WhiteNoise(1000, 9);
  EXPECT_EQ(ApplySampleOffset(x, 0.0), x);
}

TEST(SampleOffsetTest, IntegerShiftZeroFills) {
  const Waveform x = WhiteNoise(100, 10);
  const Waveform y = ApplySampleOffset(x, 3.0);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(y[n], 0.0);
  for (std::size_t n = 3; n < 100; ++n) EXPECT_EQ(y[n], x[n - 3]);
  const Waveform z = ApplySampleOffset(x, -2.0);
  for (std::size_t n = 0; n < 98; ++n) EXPECT_EQ(z[n], x[n + 2]);
  EXPECT_EQ(z[98], 0.0);
}

TEST(SampleOffsetTest, RangeIsEnforced) {
  const Waveform x(50, 1.0);
  for (double k : {-4.0, -2.0, 0.0, 2.0, 4.0, 8.0, -8.0}) EXPECT_NO_THROW(ApplySampleOffset(x, k));
  EXPECT_THROW(ApplySampleOffset(x, 8.5), ContractError);
  EXPECT_THROW(ApplySampleOffset(x, -9.0), ContractError);
}

TEST(SampleOffsetTest, ForwardThenBackIsIdentityOnInterior) {
  // Band-limited below Nyquist, where the 81-tap kernel is accurate.
  const Waveform x = BandLimit(WhiteNoise(8000, 11), 16000.0, 0.0, 6000.0);
  for (double k : {0.5, 2.25, 3.7}) {
    const Waveform y = ApplySampleOffset(ApplySampleOffset(x, k), -k);
    double err = 0.0;
    for (std::size_t n = 200; n + 200 < x.size(); ++n) err = std::max(err, std::abs(y[n] - x[n]));
    EXPECT_LT(err, 1e-3 * MaxAbs(x)) << k;
  }
}

TEST(SampleOffsetTest, ShiftsCrossCorrelationPeak) {
  const Waveform x = BandLimit(WhiteNoise(8000, 12), 16000.0, 0.0, 6000.0);
  for (double k : {-4.0, -2.0, 1.5, 2.0, 4.0}) {
    const Waveform y = ApplySampleOffset(x, k);
    EXPECT_NEAR(CrossCorrelationLag(y, x), k, 0.01) << k;
  }
}

std::vector<std::span<const double>> Spans(const std::vector<Waveform>& chans) {
  return {chans.begin(), chans.end()};
}

Waveform Stream(const std::vector<Waveform>& chans, std::unique_ptr<FrameProcessor> p, const StftConfig& config,
                std::size_t chunk) {
  const auto spans = Spans(chans);
  return StreamProcess(spans, std::move(p), config, chunk);
}

TEST(StreamTest, IdentityLatencyIsExactly320) {
  const std::vector<Waveform> x = {WhiteNoise(4000, 13)};
  const Waveform out = Stream(x, std::make_unique<IdentityFrameProcessor>(), StftConfig::Analysis(), 160);
  ASSERT_EQ(out.size(), 4000u + 320u);
  for (std::size_t n = 0; n < 320; ++n) EXPECT_EQ(out[n], 0.0);
  for (std::size_t n = 0; n < 4000; ++n) ASSERT_NEAR(out[n + 320], x[0][n], 1e-12);
}

TEST(StreamTest, ChunkSizeInvariant) {
  const std::vector<Waveform> x = {WhiteNoise(3001, 14)};
  const Waveform ref = Stream(x, std::make_unique<IdentityFrameProcessor>(), StftConfig::Analysis(), 1);
  for (std::size_t chunk : {7u, 160u, 320u, 5000u}) {
    EXPECT_EQ(Stream(x, std::make_unique<IdentityFrameProcessor>(), StftConfig::Analysis(), chunk), ref) << chunk;
  }
}

// Scales each bin by a frame-dependent factor and mixes in the previous
// frame, so that history handling is exercised.
class RecursiveProcessor : public FrameProcessor {
 public:
  std::size_t channels() const override { return 2; }
  std::size_t history() const override { return 1; }
  void Reset() override { frame_ = 0; }
  void Process(const FrameContext& ctx, std::span<Complex> out) override {
    const auto a = ctx.Bins(0), b = ctx.Bins(1), prev = ctx.Bins(0, 1);
    const double g = 1.0 + 0.1 * static_cast<double>(frame_++ % 5);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = g * a[k] - 0.3 * b[k] + 0.2 * prev[k];
  }

 private:
  long frame_ = 0;
};

TEST(StreamTest, BitIdenticalToOffline) {
  const std::vector<Waveform> x = {WhiteNoise(5000, 15), WhiteNoise(5000, 16)};
  for (const StftConfig& config : {StftConfig::Analysis(), StftConfig::Loss()}) {
    RecursiveProcessor offline_proc;
    const auto spans = Spans(x);
    const Waveform offline = ProcessOffline(spans, offline_proc, config);
    for (std::size_t chunk : {1u, 7u, 160u, 320u}) {
      const Waveform streamed = Stream(x, std::make_unique<RecursiveProcessor>(), config, chunk);
      const std::size_t lat = config.window_size();
      ASSERT_EQ(streamed.size(), x[0].size() + lat);
      for (std::size_t n = 0; n < x[0].size(); ++n) ASSERT_EQ(streamed[n + lat], offline[n]) << n;
    }
  }
}

class PeekingProcessor : public FrameProcessor {
 public:
  explicit PeekingProcessor(long lag) : lag_(lag) {}
  std::size_t channels() const override { return 1; }
  void Process(const FrameContext& ctx, std::span<Complex> out) override {
    const auto in = ctx.Bins(0, lag_);
    std::copy(in.begin(), in.end(), out.begin());
  }

 private:
  long lag_;
};

TEST(StreamTest, FutureOrUndeclaredFramesAreContractViolations) {
  const std::vector<Waveform> x = {WhiteNoise(1000, 17)};
  EXPECT_THROW(Stream(x, std::make_unique<PeekingProcessor>(-1), StftConfig::Analysis(), 160), ContractError);
  EXPECT_THROW(Stream(x, std::make_unique<PeekingProcessor>(2), StftConfig::Analysis(), 160), ContractError);
}

TEST(StreamTest, ChannelMismatchIsContractError) {
  const std::vector<Waveform> x = {WhiteNoise(1000, 18), WhiteNoise(1000, 19)};
  EXPECT_THROW(Stream(x, std::make_unique<IdentityFrameProcessor>(1), StftConfig::Analysis(), 160), ContractError);
  EXPECT_THROW(Stream(x, std::make_unique<IdentityFrameProcessor>(2), StftConfig::Analysis(), 0), ContractError);
}

}  // namespace
}  // namespace angsep
