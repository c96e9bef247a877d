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
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "angsep/dataset.hpp"
#include "angsep/errors.hpp"
#include "angsep/metrics.hpp"
#include "angsep/parallel.hpp"
#include "angsep/report.hpp"
#include "angsep/separator.hpp"
#include "angsep/stft.hpp"
#include "angsep/wav.hpp"

namespace angsep {

struct SceneScore {
  std::size_t index = 0;
  double sdr_input_db = 0.0;   // mic-0 mixture against the ground truth
  double sdr_output_db = 0.0;  // separator output against the ground truth
  double stft_loss_input = 0.0;
  double stft_loss_output = 0.0;
};

struct ManifestEvaluation {
  std::string separator;
  std::vector<SceneScore> scenes;
};

// Runs `separator` over every scene of a dataset manifest. File paths in the
// manifest are relative to the manifest's directory.
inline ManifestEvaluation EvaluateManifest(const std::filesystem::path& manifest, const Separator& separator,
                                           std::size_t sdr_taps = 512, int workers = 1) {
  const auto records = ReadManifest(manifest);
  if (records.empty()) throw IoError("manifest has no scenes: " + manifest.string());
  const auto root = manifest.parent_path();
  ManifestEvaluation eval;
  eval.separator = separator.name();
  eval.scenes.resize(records.size());
  ParallelFor(records.size(), workers, [&](std::size_t i) {
    const auto& rec = records[i];
    std::string mix_path, target_path;
    try {
      mix_path = rec.at("files").at("mixture").get<std::string>();
      target_path = rec.at("files").at("target").get<std::string>();
      eval.scenes[i].index = rec.at("index").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError("manifest record " + std::to_string(i) + " lacks file entries: " + e.what());
    }
    const Audio mix = ReadWav(root / mix_path);
    const Audio target = ReadWav(root / target_path);
    if (mix.num_channels() != 2) throw ContractError(mix_path + ": mixture must have 2 channels");
    if (target.num_channels() != 1 || target.length() != mix.length()) {
      throw ContractError(target_path + ": target must be mono and match the mixture length");
    }
    const Waveform out = separator.Separate(mix.channels[0], mix.channels[1]);
    const Waveform& t = target.channels[0];
    SceneScore& s = eval.scenes[i];
    s.sdr_input_db = BssSdr(mix.channels[0], t, sdr_taps);
    s.sdr_output_db = BssSdr(out, t, sdr_taps);
    s.stft_loss_input = StftLoss(mix.channels[0], t);
    s.stft_loss_output = StftLoss(out, t);
  });
  return eval;
}

inline std::string ManifestEvaluationCsv(const ManifestEvaluation& eval) {
  using internal::Fixed;
  std::ostringstream out;
  out << "scene,sdr_input_db,sdr_output_db,sdr_improvement_db,stft_loss_input,stft_loss_output\n";
  for (const auto& s : eval.scenes) {
    out << s.index << ',' << Fixed(s.sdr_input_db) << ',' << Fixed(s.sdr_output_db) << ','
        << Fixed(s.sdr_output_db - s.sdr_input_db) << ',' << Fixed(s.stft_loss_input, 6) << ','
        << Fixed(s.stft_loss_output, 6) << '\n';
  }
  return out.str();
}

inline nlohmann::json ManifestEvaluationJson(const ManifestEvaluation& eval) {
  std::vector<double> in, out, imp, loss_in, loss_out;
  for (const auto& s : eval.scenes) {
    in.push_back(s.sdr_input_db);
    out.push_back(s.sdr_output_db);
    imp.push_back(s.sdr_output_db - s.sdr_input_db);
    loss_in.push_back(s.stft_loss_input);
    loss_out.push_back(s.stft_loss_output);
  }
  auto stat = [](const std::vector<double>& v) {
    const Stat s = Summarize(v);
    return nlohmann::json{{"mean", s.mean + 0.0}, {"std", s.stddev}, {"count", s.count}, {"saturated", s.saturated}};
  };
  return {{"kind", "manifest"},
          {"separator", eval.separator},
          {"scenes", eval.scenes.size()},
          {"sdr_input_db", stat(in)},
          {"sdr_output_db", stat(out)},
          {"sdr_improvement_db", stat(imp)},
          {"stft_loss_input", stat(loss_in)},
          {"stft_loss_output", stat(loss_out)}};
}

}  // namespace angsep
