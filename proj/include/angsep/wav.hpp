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
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "angsep/errors.hpp"
#include "angsep/types.hpp"

namespace angsep {

// Planar multichannel audio.
struct Audio {
  double sample_rate = kDefaultSampleRate;
  std::vector<Waveform> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
};

namespace internal {

inline std::uint32_t Le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t Le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace internal

// Reads RIFF/WAVE with PCM int16 or IEEE float32 samples. WAVE_FORMAT_EXTENSIBLE
// is accepted when its subformat is one of those two.
inline Audio ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 || std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw IoError(where + "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* samples = nullptr;
  std::size_t sample_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::uint32_t size = internal::Le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > data.size() - body) throw IoError(where + "chunk overruns file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(where + "short fmt chunk");
      format = internal::Le16(chunk + 8);
      channels = internal::Le16(chunk + 10);
      rate = internal::Le32(chunk + 12);
      bits = internal::Le16(chunk + 22);
      if (format == 0xFFFE) {
        if (size < 40) throw IoError(where + "short extensible fmt chunk");
        format = internal::Le16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = chunk + 8;
      sample_bytes = size;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw IoError(where + "missing fmt chunk");
  if (samples == nullptr) throw IoError(where + "missing data chunk");
  if (channels == 0 || rate == 0) throw IoError(where + "invalid channel count or sample rate");
  const bool is_int16 = format == 1 && bits == 16;
  const bool is_float32 = format == 3 && bits == 32;
  if (!is_int16 && !is_float32) {
    throw IoError(where + "unsupported sample format (need PCM int16 or float32)");
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = sample_bytes / (width * channels);
  Audio audio;
  audio.sample_rate = rate;
  audio.channels.assign(channels, Waveform(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = samples + (n * channels + c) * width;
      if (is_int16) {
        audio.channels[c][n] = static_cast<std::int16_t>(internal::Le16(p)) / 32768.0;
      } else {
        const std::uint32_t u = internal::Le32(p);
        float f;
        std::memcpy(&f, &u, 4);
        audio.channels[c][n] = f;
      }
    }
  }
  return audio;
}

// Writes IEEE float32 WAV.
inline void WriteWav(const std::filesystem::path& path, const Audio& audio) {
  if (audio.channels.empty()) throw ContractError("cannot write audio with no channels");
  const std::size_t frames = audio.length();
  for (const auto& ch : audio.channels) {
    if (ch.size() != frames) throw ContractError("channel length mismatch");
  }
  const auto channels = static_cast<std::uint16_t>(audio.channels.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * channels * 4;
  if (data_bytes > 0xFFFFFFFFull - 64) throw ContractError("audio too long for WAV");
  std::vector<unsigned char> buf;
  buf.reserve(44 + data_bytes);
  auto put = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf.insert(buf.end(), b, b + n);
  };
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    buf.push_back(static_cast<unsigned char>(v & 0xFF));
    buf.push_back(static_cast<unsigned char>(v >> 8));
  };
  put("RIFF", 4);
  put32(static_cast<std::uint32_t>(36 + data_bytes));
  put("WAVE", 4);
  put("fmt ", 4);
  put32(16);
  put16(3);
  put16(channels);
  put32(rate);
  put32(rate * channels * 4);
  put16(static_cast<std::uint16_t>(channels * 4));
  put16(32);
  put("data", 4);
  put32(static_cast<std::uint32_t>(data_bytes));
  for (std::size_t n = 0; n < frames; ++n) {
    for (const auto& ch : audio.channels) {
      const auto f = static_cast<float>(ch[n]);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put32(u);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline void WriteWav(const std::filesystem::path& path, std::span<const double> mono, double sample_rate) {
  Audio a;
  a.sample_rate = sample_rate;
  a.channels.emplace_back(mono.begin(), mono.end());
  WriteWav(path, a);
}

}  // namespace angsep
