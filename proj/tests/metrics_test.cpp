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

#include "angsep/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "angsep/separator.hpp"
#include "test_util.hpp"

namespace angsep {
namespace {

using testing::DirectConvolve;
using testing::WhiteNoise;

// Noise orthogonal to every delay 0..taps-1 of `reference`, scaled so that
// 10*log10(|reference|^2 / |noise|^2) == snr_db. Built by Householder QR of
// the explicit delay matrix, independently of the Toeplitz solver.
Waveform OrthogonalNoise(const Waveform& reference, std::size_t taps, double snr_db, std::uint64_t seed) {
  const Eigen::Index n = static_cast<Eigen::Index>(reference.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(taps));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(taps); ++j) {
    for (Eigen::Index m = j; m < n; ++m) a(m, j) = reference[static_cast<std::size_t>(m - j)];
  }
  const Waveform w = WhiteNoise(reference.size(), seed);
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, static_cast<Eigen::Index>(taps));
  Eigen::VectorXd e = wv - q * (q.transpose() * wv);
  e *= std::sqrt(Energy(reference) / e.squaredNorm() / std::pow(10.0, snr_db / 10.0));
  return Waveform(e.data(), e.data() + e.size());
}

TEST(BssSdrTest, IdentityHitsCap) {
  const Waveform r = WhiteNoise(4000, 1);
  const SdrResult res = BssSdrDetailed(r, r);
  EXPECT_EQ(res.sdr_db, kMetricCapDb);
  EXPECT_TRUE(res.capped);
}

TEST(BssSdrTest, ScaledEstimateHitsCap) {
  const Waveform r = WhiteNoise(4000, 2);
  Waveform half = r;
  for (double& v : half) v *= 0.5;
  EXPECT_EQ(BssSdr(half, r), kMetricCapDb);
}

TEST(BssSdrTest, ShortFilterOfReferenceHitsCap) {
  // The estimate is compared on the reference's support, so give the
  // reference a silent tail that holds the filter's ringing.
  Waveform r = WhiteNoise(4000, 3);
  std::fill(r.end() - 16, r.end(), 0.0);
  const Waveform h = {0.7, -0.2, 0.05, 0.0, 0.3};
  Waveform f = DirectConvolve(r, h);
  f.resize(r.size());
  EXPECT_GE(BssSdr(f, r, 512), 90.0);
  // Delays beyond the filter support are distortion.
  Waveform late(r.size(), 0.0);
  for (std::size_t n = 600; n < r.size(); ++n) late[n] = r[n - 600];
  EXPECT_LT(BssSdr(late, r, 512), 5.0);
}

TEST(BssSdrTest, OrthogonalNoiseGivesConstructedSnr) {
  const Waveform r = WhiteNoise(4000, 4);
  for (double snr : {0.0, 10.0, 20.0}) {
    const Waveform e = OrthogonalNoise(r, 512, snr, 5 + static_cast<std::uint64_t>(snr));
    Waveform est = r;
    for (std::size_t n = 0; n < est.size(); ++n) est[n] += e[n];
    EXPECT_NEAR(BssSdr(est, r, 512), snr, 0.5) << snr;
  }
}

TEST(BssSdrTest, InvariantToEstimateScaling) {
  const Waveform r = WhiteNoise(4000, 6), noise = WhiteNoise(4000, 7, 0.3);
  Waveform est(r.size()), scaled(r.size());
  for (std::size_t n = 0; n < r.size(); ++n) {
    est[n] = r[n] + noise[n];
    scaled[n] = -4.0 * est[n];
  }
  EXPECT_NEAR(BssSdr(scaled, r), BssSdr(est, r), 1e-9);
}

TEST(BssSdrTest, DecreasesWithIndependentNoise) {
  const Waveform r = WhiteNoise(4000, 8), noise = WhiteNoise(4000, 9);
  double prev = kMetricCapDb + 1.0;
  for (double level : {0.01, 0.05, 0.2, 0.5, 1.0, 3.0}) {
    Waveform est = r;
    for (std::size_t n = 0; n < est.size(); ++n) est[n] += level * noise[n];
    const double sdr = BssSdr(est, r);
    EXPECT_LT(sdr, prev) << level;
    prev = sdr;
  }
}

TEST(BssSdrTest, ContractErrors) {
  EXPECT_THROW(BssSdr(Waveform(100, 1.0), Waveform(100, 0.0)), ContractError);
  EXPECT_THROW(BssSdr(Waveform(100, 1.0), Waveform(99, 1.0)), ContractError);
  EXPECT_THROW(BssSdr(Waveform(100, 1.0), Waveform(100, 1.0), 0), ContractError);
}

TEST(BssSdrTest, SilentEstimateIsFloor) {
  const Waveform r = WhiteNoise(1000, 10);
  EXPECT_EQ(BssSdr(Waveform(1000, 0.0), r, 64), -kMetricCapDb);
}

TEST(SuppressionTest, ClosedForms) {
  const Waveform x = WhiteNoise(1000, 11);
  EXPECT_EQ(SuppressionDb(x, x), 0.0);
  for (double a : {0.1, 0.5, 2.0}) {
    Waveform y = x;
    for (double& v : y) v *= a;
    EXPECT_NEAR(SuppressionDb(x, y), -20.0 * std::log10(a), 1e-9) << a;
  }
  EXPECT_EQ(SuppressionDb(x, Waveform(1000, 0.0)), kMetricCapDb);
  EXPECT_THROW(SuppressionDb(Waveform(10, 0.0), Waveform(10, 1.0)), ContractError);
  EXPECT_THROW(SuppressionDb(x, Waveform(999, 1.0)), ContractError);
}

TEST(TrimmedTest, DropsMargins) {
  const Waveform x = {1, 2, 3, 4, 5, 6};
  const auto t = Trimmed(x, 2, 1);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], 3.0);
  EXPECT_THROW(Trimmed(x, 3, 3), ContractError);
}

TEST(AngleTest, GridAndSignedAzimuth) {
  const auto g = AngleGrid(5.0);
  ASSERT_EQ(g.size(), 72u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 355.0);
  EXPECT_EQ(SignedAzimuth(270.0), -90.0);
  EXPECT_EQ(SignedAzimuth(180.0), 180.0);
  EXPECT_EQ(SignedAzimuth(-190.0), 170.0);
  EXPECT_EQ(SignedAzimuth(45.0), 45.0);
}

TEST(SummarizeTest, MeanStdAndSaturation) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const Stat s = Summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_EQ(s.count, 4u);
  EXPECT_FALSE(s.saturated);
  EXPECT_TRUE(Summarize(std::vector<double>{1.0, kMetricCapDb}).saturated);
  EXPECT_EQ(Summarize(std::vector<double>{7.0}).stddev, 0.0);
}

SweepConfig SmallSweep() {
  SweepConfig s;
  s.angles_deg = AngleGrid(15.0);
  s.duration_s = 0.5;
  return s;
}

TEST(DirectivityTest, IdentityIsFlat) {
  const DirectivitySweep sweep = RunDirectivitySweep(IdentitySeparator(), SmallSweep());
  ASSERT_EQ(sweep.points.size(), 24u);
  for (const auto& p : sweep.points) EXPECT_EQ(p.gain_db, 0.0) << p.angle_deg;
  EXPECT_EQ(sweep.separator, "identity");
}

TEST(DirectivityTest, IpdPatternHasConeSymmetry) {
  const DirectivitySweep sweep = RunDirectivitySweep(IpdSeparator(), SmallSweep());
  for (double a = 0.0; a <= 90.0; a += 15.0) {
    EXPECT_NEAR(GainAt(sweep, a), GainAt(sweep, -a), 0.5) << a;
    EXPECT_NEAR(GainAt(sweep, a), GainAt(sweep, 180.0 - a), 0.5) << a;
  }
  EXPECT_NEAR(PassbandCenterDeg(sweep), 0.0, 1e-9);
  EXPECT_THROW(GainAt(sweep, 7.0), ContractError);
}

TEST(DirectivityTest, IndependentOfProbeAmplitude) {
  SweepConfig cfg = SmallSweep();
  const RoomSpec room = SweepRoom(cfg);
  const Waveform probe = SweepProbe(cfg);
  Waveform loud = probe;
  for (double& v : loud) v *= 7.0;
  const IpdSeparator sep;
  for (double az : {0.0, 60.0, 135.0}) {
    const auto y = RenderAtAzimuth(room, probe, az, cfg.source_range_m, RirParams{});
    const auto z = RenderAtAzimuth(room, loud, az, cfg.source_range_m, RirParams{});
    const double g1 = SuppressionDb(y[0], sep.Separate(y[0], y[1]));
    const double g2 = SuppressionDb(z[0], sep.Separate(z[0], z[1]));
    EXPECT_NEAR(g1, g2, 1e-9) << az;
  }
}

TEST(DirectivityTest, WorkerCountDoesNotChangeResult) {
  SweepConfig a = SmallSweep(), b = SmallSweep();
  b.workers = 3;
  const DirectivitySweep sa = RunDirectivitySweep(IpdSeparator(), a);
  const DirectivitySweep sb = RunDirectivitySweep(IpdSeparator(), b);
  for (std::size_t i = 0; i < sa.points.size(); ++i) EXPECT_EQ(sa.points[i].gain_db, sb.points[i].gain_db);
}

TEST(DirectivityTest, SweepRoomLayout) {
  SweepConfig cfg;
  const RoomSpec ff = SweepRoom(cfg);
  EXPECT_EQ(ff.wall_reflection, 0.0);
  EXPECT_NEAR(ff.mic_pair.spacing(), 0.10, 1e-12);
  cfg.free_field = false;
  const RoomSpec rv = SweepRoom(cfg);
  EXPECT_GT(rv.wall_reflection, 0.0);
  EXPECT_NEAR(rv.mic_pair.midpoint().z(), 1.2, 1e-12);
  // The source ring fits in both rooms.
  for (const RoomSpec* r : {&ff, &rv}) {
    const double range = r == &ff ? cfg.source_range_m : 2.0;
    for (double az : AngleGrid(45.0)) {
      const Vec3 p = PositionAtAzimuth(r->mic_pair, az, range);
      for (int i = 0; i < 3; ++i) {
        EXPECT_GT(p[i], 0.0);
        EXPECT_LT(p[i], r->dimensions[i]);
      }
    }
  }
}

}  // namespace
}  // namespace angsep
