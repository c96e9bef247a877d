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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "angsep/dataset.hpp"
#include "angsep/wav.hpp"
#include "test_util.hpp"

namespace angsep {
namespace {

namespace fs = std::filesystem;
using testing::ReadBytes;
using testing::TempDir;
using testing::WriteBytes;

// Runs the CLI with `args`, discarding its output, and returns the exit code.
int RunCli(const std::string& args, const fs::path& log = "/dev/null") {
  const std::string cmd = std::string(ANGSEP_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path WriteConfig(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.toml";
  WriteBytes(p, text);
  return p;
}

constexpr const char* kSmallConfig = R"(
[scene]
duration_s = 0.5
[bench]
duration_s = 0.3
loudspeaker_angles_deg = [0, 90, 180, 270]
snr_db = [0]
[sweep]
angle_step_deg = 30
duration_s = 0.3
)";

TEST(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(RunCli("--help"), 0);
  EXPECT_EQ(RunCli("synth-dataset --help"), 0);
  EXPECT_NE(RunCli(""), 0);
  EXPECT_EQ(RunCli("no-such-command"), 2);
  EXPECT_EQ(RunCli("separate --input x.wav"), 2);
}

TEST(CliTest, SynthDatasetSingleSceneIsReproducible) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), kSmallConfig);
  const std::string base = "synth-dataset --config " + Q(cfg) + " --seed 11 --count 1 --out ";
  ASSERT_EQ(RunCli(base + Q(dir.path() / "a")), 0);
  ASSERT_EQ(RunCli(base + Q(dir.path() / "b")), 0);
  const std::string manifest = ReadBytes(dir.path() / "a" / "manifest.jsonl");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 1);
  EXPECT_EQ(manifest, ReadBytes(dir.path() / "b" / "manifest.jsonl"));
  const auto rec = nlohmann::json::parse(manifest);
  for (const char* key : {"mixture", "target"}) {
    const fs::path f = dir.path() / "a" / rec["files"][key].get<std::string>();
    ASSERT_TRUE(fs::exists(f)) << f;
    EXPECT_EQ(ReadBytes(f), ReadBytes(dir.path() / "b" / rec["files"][key].get<std::string>()));
  }
  const auto header = nlohmann::json::parse(ReadBytes(dir.path() / "a" / "manifest_header.json"));
  EXPECT_EQ(header["theta_deg"], 30.0);
  EXPECT_EQ(header["phi_deg"], 60.0);
  EXPECT_EQ(header["p1"], 0.8);
  EXPECT_EQ(header["p2"], 0.6);
  EXPECT_EQ(header["seed"], 11);
}

TEST(CliTest, SynthDatasetIndependentOfWorkers) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), kSmallConfig);
  const std::string base = "synth-dataset --config " + Q(cfg) + " --seed 3 --count 4 --out ";
  ASSERT_EQ(RunCli(base + Q(dir.path() / "w1") + " --workers 1"), 0);
  ASSERT_EQ(RunCli(base + Q(dir.path() / "w2") + " --workers 2"), 0);
  EXPECT_EQ(ReadBytes(dir.path() / "w1" / "manifest.jsonl"), ReadBytes(dir.path() / "w2" / "manifest.jsonl"));
  EXPECT_EQ(ReadBytes(dir.path() / "w1" / "scenes" / "scene_000003_mix.wav"),
            ReadBytes(dir.path() / "w2" / "scenes" / "scene_000003_mix.wav"));
}

TEST(CliTest, GenRirWritesEightResponses) {
  TempDir dir("cli");
  ASSERT_EQ(RunCli("gen-rir --seed 5 --out " + Q(dir.path() / "rir")), 0);
  const std::string manifest = ReadBytes(dir.path() / "rir" / "manifest.jsonl");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 8);
  EXPECT_TRUE(fs::exists(dir.path() / "rir" / "room.json"));
  // A saved room reproduces the same responses.
  ASSERT_EQ(RunCli("gen-rir --room " + Q(dir.path() / "rir" / "room.json") + " --out " + Q(dir.path() / "again")), 0);
  EXPECT_EQ(ReadBytes(dir.path() / "again" / "manifest.jsonl"), manifest);
}

fs::path WriteStereo(const fs::path& path, std::size_t n, std::uint64_t seed) {
  Audio a;
  a.sample_rate = 16000;
  a.channels = {testing::WhiteNoise(n, seed, 0.1), testing::WhiteNoise(n, seed + 1, 0.1)};
  for (auto& ch : a.channels) {
    for (double& v : ch) v = static_cast<float>(v);
  }
  WriteWav(path, a);
  return path;
}

TEST(CliTest, IdentitySeparateIsSampleExact) {
  TempDir dir("cli");
  const fs::path in = WriteStereo(dir.path() / "in.wav", 4001, 21);
  const fs::path out = dir.path() / "out" / "mono.wav";
  ASSERT_EQ(RunCli("separate --separator identity --chunk 7 --input " + Q(in) + " --output " + Q(out)), 0);
  const Audio a = ReadWav(in), b = ReadWav(out);
  ASSERT_EQ(b.num_channels(), 1u);
  EXPECT_EQ(b.channels[0], a.channels[0]);
}

TEST(CliTest, IpdSeparateKeepsLength) {
  TempDir dir("cli");
  const fs::path in = WriteStereo(dir.path() / "in.wav", 3000, 22);
  for (const char* offset : {"0", "4", "-2.5"}) {
    const fs::path out = dir.path() / (std::string("o") + offset + ".wav");
    ASSERT_EQ(RunCli("separate --offset " + std::string(offset) + " --input " + Q(in) + " --output " + Q(out)), 0)
        << offset;
    EXPECT_EQ(ReadWav(out).length(), 3000u);
  }
  EXPECT_EQ(RunCli("separate --offset 9 --input " + Q(in) + " --output " + Q(dir.path() / "x.wav")), 4);
  EXPECT_EQ(RunCli("separate --separator identity --offset 1 --input " + Q(in) + " --output " +
                Q(dir.path() / "x.wav")),
            4);
}

TEST(CliTest, ErrorTaxonomy) {
  TempDir dir("cli");
  const fs::path out = dir.path() / "o.wav";
  WriteBytes(dir.path() / "corrupt.wav", "RIFF\x10\x00\x00\x00WAVEjunkjunk");
  EXPECT_EQ(RunCli("separate --input " + Q(dir.path() / "corrupt.wav") + " --output " + Q(out)), 3);
  EXPECT_EQ(RunCli("separate --input " + Q(dir.path() / "absent.wav") + " --output " + Q(out)), 3);

  const fs::path bad = dir.path() / "bad.toml";
  WriteBytes(bad, "[geometry]\nthetta_deg = 30\n");
  EXPECT_EQ(RunCli("synth-dataset --config " + Q(bad) + " --out " + Q(dir.path() / "d")), 2);
  WriteBytes(bad, "[geometry]\ntheta_deg = 80\n");
  EXPECT_EQ(RunCli("synth-dataset --config " + Q(bad) + " --out " + Q(dir.path() / "d")), 2);
  EXPECT_EQ(RunCli("synth-dataset --config " + Q(dir.path() / "missing.toml")), 2);

  WriteWav(dir.path() / "mono.wav", Waveform(1000, 0.1), 16000);
  EXPECT_EQ(RunCli("separate --input " + Q(dir.path() / "mono.wav") + " --output " + Q(out)), 4);
  Audio fast;
  fast.sample_rate = 48000;
  fast.channels = {Waveform(1000, 0.1), Waveform(1000, 0.1)};
  WriteWav(dir.path() / "fast.wav", fast);
  EXPECT_EQ(RunCli("separate --input " + Q(dir.path() / "fast.wav") + " --output " + Q(out)), 4);

  EXPECT_EQ(RunCli("evaluate --manifest " + Q(dir.path() / "none.jsonl") + " --out " + Q(dir.path() / "e")), 3);
  EXPECT_EQ(RunCli("evaluate --out " + Q(dir.path() / "e")), 2);
}

std::vector<std::vector<std::string>> ReadCsv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(ReadBytes(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(CliTest, SuppressionWithIdentityIsAllZero) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), kSmallConfig);
  ASSERT_EQ(RunCli("evaluate --config " + Q(cfg) + " --bench suppression --separator identity --out " +
                Q(dir.path() / "r")),
            0);
  const auto rows = ReadCsv(dir.path() / "r" / "suppression.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][2], "0.0000");
  EXPECT_TRUE(fs::exists(dir.path() / "r" / "suppression.json"));
}

TEST(CliTest, SteeringEmitsFivePolarPlots) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), kSmallConfig);
  ASSERT_EQ(RunCli("evaluate --config " + Q(cfg) + " --bench steering --out " + Q(dir.path() / "s")), 0);
  std::size_t svgs = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "s")) svgs += e.path().extension() == ".svg";
  EXPECT_EQ(svgs, 5u);
  for (const char* k : {"-4", "-2", "+0", "+2", "+4"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "s" / ("steering_offset_" + std::string(k) + ".svg"))) << k;
  }
}

TEST(CliTest, EnhancementOverTenSeedsHasMeanAndStd) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), R"(
[bench]
duration_s = 0.3
loudspeaker_angles_deg = [0, 90, 180, 270]
snr_db = [0]
seeds = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
)");
  ASSERT_EQ(RunCli("evaluate --config " + Q(cfg) + " --bench enhancement --out " + Q(dir.path() / "e")), 0);
  const auto rows = ReadCsv(dir.path() / "e" / "enhancement.csv");
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0], (std::vector<std::string>{"condition", "angle_deg", "mean_db", "std_db", "count", "saturated"}));
  ASSERT_EQ(rows.size(), 1u + 3 * 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][4], "10");
    EXPECT_GE(std::stod(rows[i][3]), 0.0);
    // Broadside interference leaves the mask open, so only the raw SDR rows
    // are guaranteed to vary across seeds.
    if (rows[i][0] == "snr_0db") {
      EXPECT_GT(std::stod(rows[i][3]), 0.0) << rows[i][1];
    }
  }
}

TEST(CliTest, DirectivityAndManifestEvaluation) {
  TempDir dir("cli");
  const fs::path cfg = WriteConfig(dir.path(), kSmallConfig);
  ASSERT_EQ(RunCli("directivity --config " + Q(cfg) + " --offset 2 --out " + Q(dir.path() / "d")), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "d" / "directivity_offset_+2.svg"));
  EXPECT_EQ(ReadCsv(dir.path() / "d" / "directivity.csv").size(), 13u);

  ASSERT_EQ(RunCli("synth-dataset --config " + Q(cfg) + " --count 2 --out " + Q(dir.path() / "ds")), 0);
  ASSERT_EQ(RunCli("evaluate --config " + Q(cfg) + " --separator identity --manifest " +
                Q(dir.path() / "ds" / "manifest.jsonl") + " --out " + Q(dir.path() / "m")),
            0);
  const auto j = nlohmann::json::parse(ReadBytes(dir.path() / "m" / "manifest_eval.json"));
  EXPECT_EQ(j["scenes"], 2);
  EXPECT_EQ(j["sdr_improvement_db"]["mean"], 0.0);
}

}  // namespace
}  // namespace angsep
