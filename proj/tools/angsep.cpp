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

// angsep: command-line front end for scene generation, separation and
// evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "angsep/bench.hpp"
#include "angsep/config.hpp"
#include "angsep/dataset.hpp"
#include "angsep/errors.hpp"
#include "angsep/evaluate.hpp"
#include "angsep/metrics.hpp"
#include "angsep/report.hpp"
#include "angsep/rir.hpp"
#include "angsep/separator.hpp"
#include "angsep/wav.hpp"

namespace fs = std::filesystem;
using namespace angsep;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitContract = 4;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

struct SeparatorOptions {
  std::string kind = "ipd";
  std::optional<double> offset;
  std::string signal_clip;
  std::string noise_clip;
};

GlobalConfig LoadGlobal(const CommonOptions& opts) {
  GlobalConfig c = opts.config_path.empty() ? GlobalConfig{} : LoadConfig(opts.config_path);
  if (opts.seed) c.seed = *opts.seed;
  if (opts.workers) c.workers = *opts.workers;
  c.Finalize();
  return c;
}

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Random seed (overrides the config)");
  cmd->add_option("--workers", opts.workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
}

void AddSeparatorOptions(CLI::App* cmd, SeparatorOptions& opts) {
  cmd->add_option("--separator", opts.kind, "identity, ipd or mcwf")
      ->check(CLI::IsMember({"identity", "ipd", "mcwf"}));
  cmd->add_option("--offset", opts.offset, "Steering offset in samples applied to channel 1 (ipd)");
  cmd->add_option("--signal-clip", opts.signal_clip, "2-channel WAV of the target alone (mcwf calibration)");
  cmd->add_option("--noise-clip", opts.noise_clip, "2-channel WAV of the interference alone (mcwf calibration)");
}

SpatialCovariance CovarianceFromWav(const std::string& path, const GlobalConfig& config) {
  const Audio a = ReadWav(path);
  if (a.num_channels() != 2) throw ContractError(path + ": calibration clip must have 2 channels");
  if (a.sample_rate != config.rir.sample_rate) throw ContractError(path + ": calibration clip sample rate mismatch");
  const std::span<const double> chans[2] = {a.channels[0], a.channels[1]};
  return EstimateCovariance(ChannelSpans(chans), config.separator.stft);
}

std::unique_ptr<Separator> MakeSeparator(const SeparatorOptions& opts, const GlobalConfig& config,
                                         std::optional<double> offset_override = std::nullopt) {
  const double offset = offset_override ? *offset_override : opts.offset.value_or(config.separator.steering_offset);
  if (opts.kind == "identity") {
    if (offset != 0.0) throw ContractError("steering offsets apply to the ipd separator only");
    return std::make_unique<IdentitySeparator>();
  }
  if (opts.kind == "ipd") return std::make_unique<IpdSeparator>(Steer(config.separator, offset));
  if (offset != 0.0) throw ContractError("steering offsets apply to the ipd separator only");
  if (opts.signal_clip.empty() != opts.noise_clip.empty()) {
    throw ConfigError("--signal-clip and --noise-clip must be given together");
  }
  if (!opts.signal_clip.empty()) {
    return std::make_unique<McwfSeparator>(CovarianceFromWav(opts.signal_clip, config),
                                           CovarianceFromWav(opts.noise_clip, config), config.separator.stft);
  }
  return std::make_unique<McwfSeparator>(CalibrateMcwf(config.bench));
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

int RunGenRir(const CommonOptions& common, const std::string& room_path, const std::string& out_dir) {
  const GlobalConfig config = LoadGlobal(common);
  const RoomSpec room = room_path.empty() ? SampleScene(config.geometry, config.seed) : LoadRoomSpec(room_path);
  const fs::path dir = out_dir.empty() ? config.output_dir / "rir" : fs::path(out_dir);
  const RirMatrix rirs = MakeRirMatrix(room, config.rir, config.workers);
  const auto records = ExportRirs(rirs, dir);
  SaveRoomSpec(room, dir / "room.json");
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw IoError("cannot write rir manifest");
  for (const auto& r : records) manifest << r.dump() << '\n';
  std::cout << (dir / "manifest.jsonl").string() << '\n';
  return 0;
}

int RunSynthDataset(const CommonOptions& common, std::size_t count, const std::string& out_dir, bool stems) {
  GlobalConfig config = LoadGlobal(common);
  const fs::path dir = out_dir.empty() ? config.output_dir : fs::path(out_dir);
  DatasetOptions options;
  options.write_stems = stems || config.write_stems;
  options.write_rirs = config.write_rirs;
  const fs::path manifest = SynthesizeDataset(config, count, dir, config.workers, options);
  std::cout << manifest.string() << '\n';
  return 0;
}

int RunSeparate(const CommonOptions& common, const SeparatorOptions& sep, const std::string& input,
                const std::string& output, std::size_t chunk) {
  const GlobalConfig config = LoadGlobal(common);
  const Audio in = ReadWav(input);
  if (in.num_channels() != 2) {
    throw ContractError(input + ": expected 2 channels, found " + std::to_string(in.num_channels()));
  }
  if (in.sample_rate != config.rir.sample_rate) {
    throw ContractError(input + ": expected " + std::to_string(static_cast<int>(config.rir.sample_rate)) +
                        " Hz, found " + std::to_string(static_cast<int>(in.sample_rate)) + " Hz");
  }
  const auto separator = MakeSeparator(sep, config);
  const std::span<const double> chans[2] = {in.channels[0], in.channels[1]};
  const Waveform out = SeparateStreaming(*separator, ChannelSpans(chans), chunk);
  const fs::path out_path(output);
  if (out_path.has_parent_path()) EnsureDir(out_path.parent_path());
  WriteWav(out_path, out, in.sample_rate);
  return 0;
}

int RunEvaluate(const CommonOptions& common, const SeparatorOptions& sep, const std::string& bench,
                const std::string& manifest, const std::string& out_dir) {
  const GlobalConfig config = LoadGlobal(common);
  const fs::path dir = out_dir.empty() ? config.output_dir / "eval" : fs::path(out_dir);
  if (bench.empty() == manifest.empty()) throw ConfigError("give exactly one of --bench or --manifest");
  if (!manifest.empty()) {
    const auto separator = MakeSeparator(sep, config);
    const ManifestEvaluation eval = EvaluateManifest(manifest, *separator, config.bench.sdr_taps, config.workers);
    EnsureDir(dir);
    internal::WriteText(dir / "manifest_eval.csv", ManifestEvaluationCsv(eval));
    const nlohmann::json summary = ManifestEvaluationJson(eval);
    WriteJsonFile(dir / "manifest_eval.json", summary);
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
  EvalReport report;
  if (bench == "enhancement") {
    report = RunEnhancementBench(*MakeSeparator(sep, config), config.bench);
  } else if (bench == "suppression") {
    report = RunSuppressionBench(*MakeSeparator(sep, config), config.bench);
  } else {
    const SeparatorFactory factory = [&](double k) { return MakeSeparator(sep, config, k); };
    report = RunSteeringBench(factory, config.steering_offsets, config.sweep);
  }
  const auto written = WriteReport(report, dir, bench, config.plot.floor_db);
  std::cout << ReportSummary(report);
  for (const auto& p : written) std::cout << p.string() << '\n';
  return 0;
}

int RunDirectivity(const CommonOptions& common, const SeparatorOptions& sep, const std::string& out_dir) {
  const GlobalConfig config = LoadGlobal(common);
  const fs::path dir = out_dir.empty() ? config.output_dir / "directivity" : fs::path(out_dir);
  const auto separator = MakeSeparator(sep, config);
  const double offset = sep.offset.value_or(config.separator.steering_offset);
  const DirectivitySweep sweep = RunDirectivitySweep(*separator, config.sweep, offset);
  const EvalReport report = SweepReport(sweep, config.sweep);
  const auto written = WriteReport(report, dir, "directivity", config.plot.floor_db);
  std::cout << ReportSummary(report);
  for (const auto& p : written) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-microphone delay-contrast separation workbench"};
  app.require_subcommand(1);

  CommonOptions common;
  SeparatorOptions sep;

  auto* gen_rir = app.add_subcommand("gen-rir", "Simulate and export the 4x2 RIR matrix of one scene");
  AddCommon(gen_rir, common);
  std::string room_path, rir_out;
  gen_rir->add_option("--room", room_path, "Room spec JSON (default: sample one from --seed)")
      ->check(CLI::ExistingFile);
  gen_rir->add_option("--out", rir_out, "Output directory");

  auto* synth = app.add_subcommand("synth-dataset", "Generate mixtures, ground truths and a JSONL manifest");
  AddCommon(synth, common);
  std::size_t count = 1;
  std::string synth_out;
  bool stems = false;
  synth->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_flag("--stems", stems, "Also write per-component stems");

  auto* separate = app.add_subcommand("separate", "Separate a 2-channel WAV through the streaming path");
  AddCommon(separate, common);
  AddSeparatorOptions(separate, sep);
  std::string input, output;
  std::size_t chunk = 160;
  separate->add_option("--input", input, "2-channel input WAV")->required();
  separate->add_option("--output", output, "Mono output WAV")->required();
  separate->add_option("--chunk", chunk, "Streaming chunk size in samples")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "Run a bench protocol or score a dataset manifest");
  AddCommon(evaluate, common);
  AddSeparatorOptions(evaluate, sep);
  std::string bench, manifest, eval_out;
  evaluate->add_option("--bench", bench, "enhancement, suppression or steering")
      ->check(CLI::IsMember({"enhancement", "suppression", "steering"}));
  evaluate->add_option("--manifest", manifest, "Dataset manifest (JSONL)");
  evaluate->add_option("--out", eval_out, "Report directory");

  auto* directivity = app.add_subcommand("directivity", "Sweep a lone source around the array");
  AddCommon(directivity, common);
  AddSeparatorOptions(directivity, sep);
  std::string dir_out;
  directivity->add_option("--out", dir_out, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen_rir) return RunGenRir(common, room_path, rir_out);
    if (*synth) return RunSynthDataset(common, count, synth_out, stems);
    if (*separate) return RunSeparate(common, sep, input, output, chunk);
    if (*evaluate) return RunEvaluate(common, sep, bench, manifest, eval_out);
    if (*directivity) return RunDirectivity(common, sep, dir_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
