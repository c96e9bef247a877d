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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "angsep/config.hpp"
#include "angsep/errors.hpp"
#include "angsep/geometry.hpp"
#include "angsep/parallel.hpp"
#include "angsep/random.hpp"
#include "angsep/rir.hpp"
#include "angsep/scene.hpp"
#include "angsep/wav.hpp"

namespace angsep {

// Band-limited resampling with a Hann-windowed sinc (32 zero crossings of
// the narrower of the two Nyquist bands).
inline Waveform Resample(std::span<const double> x, double from_hz, double to_hz) {
  if (!(from_hz > 0.0 && to_hz > 0.0)) throw ContractError("sample rates must be positive");
  if (from_hz == to_hz) return Waveform(x.begin(), x.end());
  const double ratio = to_hz / from_hz;
  const double cutoff = std::min(1.0, ratio);
  const double support = 32.0 / cutoff;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * ratio));
  Waveform y(out_len, 0.0);
  const long n_in = static_cast<long>(x.size());
  for (std::size_t m = 0; m < out_len; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - support)));
    const long hi = std::min(n_in - 1, static_cast<long>(std::floor(t + support)));
    double acc = 0.0;
    for (long n = lo; n <= hi; ++n) {
      const double d = t - static_cast<double>(n);
      const double arg = kPi * cutoff * d;
      const double sinc = d == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double w = 0.5 * (1.0 + std::cos(kPi * d / support));
      acc += x[static_cast<std::size_t>(n)] * cutoff * sinc * w;
    }
    y[m] = acc;
  }
  return y;
}

// Mono 16 kHz (or `sample_rate`) clips loaded from a directory of WAVs,
// sorted by file name. Multichannel files are averaged to mono.
inline std::vector<Waveform> LoadCorpus(const std::filesystem::path& dir, double sample_rate) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no WAV files in " + dir.string());
  std::vector<Waveform> clips;
  for (const auto& f : files) {
    const Audio a = ReadWav(f);
    Waveform mono(a.length(), 0.0);
    for (const auto& ch : a.channels) {
      for (std::size_t n = 0; n < mono.size(); ++n) mono[n] += ch[n] / static_cast<double>(a.num_channels());
    }
    clips.push_back(Resample(mono, a.sample_rate, sample_rate));
  }
  return clips;
}

// Random `length`-sample excerpt of a random clip, zero-padded when the clip
// is shorter. Silent excerpts are redrawn.
inline Waveform PickSegment(const std::vector<Waveform>& corpus, std::size_t length, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Waveform& clip = corpus[std::uniform_int_distribution<std::size_t>(0, corpus.size() - 1)(rng)];
    Waveform seg(length, 0.0);
    std::size_t start = 0;
    if (clip.size() > length) start = std::uniform_int_distribution<std::size_t>(0, clip.size() - length)(rng);
    const std::size_t n = std::min(length, clip.size() - start);
    std::copy(clip.begin() + static_cast<long>(start), clip.begin() + static_cast<long>(start + n), seg.begin());
    if (Energy(seg) > 0.0) return seg;
  }
  throw DegenerateInputError("corpus produced only silent excerpts");
}

struct Corpora {
  std::vector<Waveform> target, interference, noise;
};

inline Corpora LoadCorpora(const CorpusConfig& config, double sample_rate) {
  Corpora c;
  if (!config.target_dir.empty()) c.target = LoadCorpus(config.target_dir, sample_rate);
  if (!config.interference_dir.empty()) c.interference = LoadCorpus(config.interference_dir, sample_rate);
  if (!config.noise_dir.empty()) c.noise = LoadCorpus(config.noise_dir, sample_rate);
  return c;
}

// Synthetic signals with corpus excerpts substituted where a corpus is given.
inline SceneSignals SampleSignals(const SceneConfig& config, const Corpora& corpora, std::uint64_t seed) {
  SceneSignals s = SampleSyntheticSignals(config, seed);
  Rng rng = MakeRng(DeriveSeed(seed, 1), Stream::kSignals);
  const std::size_t len = config.length();
  if (!corpora.target.empty()) {
    s.s1 = PickSegment(corpora.target, len, rng);
    if (!s.s2.empty()) s.s2 = PickSegment(corpora.target, len, rng);
  }
  if (!corpora.interference.empty() && !s.i.empty()) s.i = PickSegment(corpora.interference, len, rng);
  if (!corpora.noise.empty()) s.n = PickSegment(corpora.noise, len, rng);
  return s;
}

// One generated scene with everything needed to write it out.
struct GeneratedScene {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  RirMatrix rirs;
  MixtureScene mixture;
};

inline std::uint64_t SceneSeed(std::uint64_t global_seed, std::size_t index) {
  return DeriveSeed(global_seed, static_cast<std::uint64_t>(index));
}

inline GeneratedScene GenerateScene(const GlobalConfig& config, const Corpora& corpora, std::size_t index) {
  GeneratedScene g;
  g.index = index;
  g.seed = SceneSeed(config.seed, index);
  const RoomSpec room = SampleScene(config.geometry, g.seed);
  g.rirs = MakeRirMatrix(room, config.rir);
  const SceneSignals signals = SampleSignals(config.scene, corpora, g.seed);
  const GainSpec gains = SampleGains(config.scene.gains, g.seed);
  g.mixture = Synthesize(room, g.rirs, signals, gains);
  return g;
}

inline std::string SceneStem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%06zu", index);
  return buf;
}

inline std::string RirFileName(std::size_t k, std::size_t j) {
  return "rir_" + std::string(RoleName(kAllRoles[k])) + "_mic" + std::to_string(j) + ".wav";
}

// Writes the eight responses of `rirs` into `dir` and returns one manifest
// record per response.
inline std::vector<nlohmann::json> ExportRirs(const RirMatrix& rirs, const std::filesystem::path& dir,
                                              const std::string& prefix = "") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<nlohmann::json> records;
  for (std::size_t k = 0; k < kSourceCount; ++k) {
    for (std::size_t j = 0; j < kReceiverCount; ++j) {
      const Rir& r = rirs.entries[k][j];
      const std::string name = RirFileName(k, j);
      WriteWav(dir / name, r.samples, r.sample_rate);
      records.push_back({{"role", std::string(RoleName(kAllRoles[k]))},
                         {"source_index", k},
                         {"receiver_index", j},
                         {"file", prefix + name},
                         {"normalization", rirs.normalization[k]},
                         {"direct_delay_samples", rirs.direct_delay_samples[k][j]},
                         {"length_samples", r.samples.size()},
                         {"length_capped", r.length_capped}});
    }
  }
  return records;
}

inline nlohmann::json GainsToJson(const GainSpec& g) {
  return {{"g0_db", g.component_db[0]},
          {"g1_db", g.component_db[1]},
          {"g2_db", g.component_db[2]},
          {"g3_db", g.component_db[3]},
          {"g_global_db", g.global_db}};
}

struct DatasetOptions {
  bool write_stems = false;
  bool write_rirs = true;
};

// Writes a scene's audio and returns its manifest record.
inline nlohmann::json WriteScene(const GeneratedScene& g, const GlobalConfig& config,
                                 const std::filesystem::path& out_dir, const DatasetOptions& options) {
  const std::string stem = SceneStem(g.index);
  const std::filesystem::path scene_dir = out_dir / "scenes";
  const double fs = config.rir.sample_rate;
  const MixtureScene& m = g.mixture;
  Audio mix;
  mix.sample_rate = fs;
  mix.channels = {m.y0, m.y1};
  WriteWav(scene_dir / (stem + "_mix.wav"), mix);
  WriteWav(scene_dir / (stem + "_target.wav"), m.t, fs);
  nlohmann::json files = {{"mixture", "scenes/" + stem + "_mix.wav"}, {"target", "scenes/" + stem + "_target.wav"}};
  if (options.write_stems) {
    nlohmann::json stems = nlohmann::json::object();
    for (std::size_t k = 0; k < kSourceCount; ++k) {
      if (!m.present[k]) continue;
      Audio a;
      a.sample_rate = fs;
      a.channels = {m.stems[k][0], m.stems[k][1]};
      const std::string name = stem + "_stem_" + std::string(RoleName(kAllRoles[k])) + ".wav";
      WriteWav(scene_dir / name, a);
      stems[std::string(RoleName(kAllRoles[k]))] = "scenes/" + name;
    }
    files["stems"] = stems;
  }
  if (options.write_rirs) {
    files["rirs"] = ExportRirs(g.rirs, scene_dir / (stem + "_rir"), "scenes/" + stem + "_rir/");
  }

  nlohmann::json tdoas = nlohmann::json::object();
  nlohmann::json present = nlohmann::json::object();
  for (std::size_t k = 0; k < kSourceCount; ++k) {
    const std::string role(RoleName(kAllRoles[k]));
    tdoas[role] = Tdoa(m.room.sources[k].position, m.room.mic_pair, config.geometry.speed_of_sound);
    present[role] = m.present[k];
  }
  return {{"index", g.index},
          {"seed", g.seed},
          {"room", RoomSpecToJson(m.room)},
          {"gains", GainsToJson(m.gains)},
          {"present", present},
          {"component_scale", m.component_scale},
          {"global_scale", m.global_scale},
          {"rir_normalization", g.rirs.normalization},
          {"tdoa_s", tdoas},
          {"files", files}};
}

inline nlohmann::json ManifestHeader(const GlobalConfig& config, std::size_t count) {
  const auto& gains = config.scene.gains;
  nlohmann::json g = nlohmann::json::object();
  const char* names[] = {"g0_db", "g1_db", "g2_db", "g3_db"};
  for (std::size_t k = 0; k < 4; ++k) g[names[k]] = {gains.component[k].mean, gains.component[k].stddev};
  g["g_global_db"] = {gains.global.mean, gains.global.stddev};
  return {{"format", "angsep-dataset"},
          {"version", 1},
          {"count", count},
          {"seed", config.seed},
          {"sample_rate", config.rir.sample_rate},
          {"duration_s", config.scene.duration_s},
          {"theta_deg", config.geometry.region.theta_deg},
          {"phi_deg", config.geometry.region.phi_deg},
          {"p1", config.scene.p1},
          {"p2", config.scene.p2},
          {"spacing_m", {config.geometry.spacing_min_m, config.geometry.spacing_max_m}},
          {"rt60_s", {config.geometry.free_field ? 0.0 : config.geometry.rt60_min_s,
                      config.geometry.free_field ? 0.0 : config.geometry.rt60_max_s}},
          {"gains_mean_std_db", g},
          {"corpus", !config.corpus.empty()}};
}

// Generates `count` scenes into `out_dir`. The JSONL manifest holds one line
// per scene in index order, so its bytes do not depend on `workers`. The
// dataset-level parameters go to manifest_header.json. Returns the manifest
// path.
inline std::filesystem::path SynthesizeDataset(const GlobalConfig& config, std::size_t count,
                                               const std::filesystem::path& out_dir, int workers,
                                               const DatasetOptions& options = {}) {
  if (count == 0) throw ConfigError("count must be positive");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "scenes", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const Corpora corpora = LoadCorpora(config.corpus, config.rir.sample_rate);
  std::vector<std::string> lines(count);
  ParallelFor(count, workers, [&](std::size_t i) {
    const GeneratedScene g = GenerateScene(config, corpora, i);
    lines[i] = WriteScene(g, config, out_dir, options).dump();
  });
  const auto manifest = out_dir / "manifest.jsonl";
  {
    std::ofstream out(manifest, std::ios::binary);
    if (!out) throw IoError("cannot write " + manifest.string());
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError("write failed: " + manifest.string());
  }
  std::ofstream header(out_dir / "manifest_header.json", std::ios::binary);
  if (!header) throw IoError("cannot write manifest header");
  header << ManifestHeader(config, count).dump(2) << '\n';
  return manifest;
}

// Reads a JSONL manifest into records (blank lines skipped).
inline std::vector<nlohmann::json> ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace angsep
