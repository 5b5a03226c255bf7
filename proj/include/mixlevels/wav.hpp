/*
 * Copyright (c) 2026, The Mixing Levels Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixlevels/errors.hpp"

namespace mixlevels {

static_assert(std::endian::native == std::endian::little, "WAV encoding assumes a little-endian host");

/// Mono 32-bit float RIFF/WAVE layout:
///
///   "RIFF" size "WAVE"                     12 bytes
///   "fmt " 16  tag=3 ch=1 rate bps 4 32    24 bytes
///   "fact" 4   frame count                 12 bytes
///   "data" size samples...                 8 + 4n bytes
inline constexpr std::size_t kWavHeaderBytes = 48;
inline constexpr std::size_t kWavDataChunkHeaderBytes = 8;
inline constexpr std::uint16_t kWavFormatPcm = 1;
inline constexpr std::uint16_t kWavFormatFloat = 3;

inline std::size_t wav_file_size(std::size_t samples) noexcept {
  return kWavHeaderBytes + kWavDataChunkHeaderBytes + 4 * samples;
}

namespace detail {

inline void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t at) {
  if (at + sizeof(T) > in.size()) throw IoError("wav: truncated file");
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  return v;
}

}  // namespace detail

/// Encodes a mono float buffer as WAV bytes. Samples must be finite and
/// within [-1, 1].
inline std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate_hz) {
  if (samples.empty()) throw DomainError("wav: refusing to encode an empty buffer");
  if (sample_rate_hz <= 0) throw ConfigError("wav: sample rate must be positive");
  for (float s : samples) {
    if (!(std::abs(s) <= 1.0f)) throw DomainError("wav: samples must be finite and within [-1, 1]");
  }
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * sizeof(float));

  std::vector<std::uint8_t> out;
  out.reserve(wav_file_size(samples.size()));
  detail::put_tag(out, "RIFF");
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(wav_file_size(samples.size()) - 8));
  detail::put_tag(out, "WAVE");

  detail::put_tag(out, "fmt ");
  detail::put_le<std::uint32_t>(out, 16);
  detail::put_le<std::uint16_t>(out, kWavFormatFloat);
  detail::put_le<std::uint16_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate_hz));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate_hz) * 4);
  detail::put_le<std::uint16_t>(out, 4);
  detail::put_le<std::uint16_t>(out, 32);

  detail::put_tag(out, "fact");
  detail::put_le<std::uint32_t>(out, 4);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(samples.size()));

  detail::put_tag(out, "data");
  detail::put_le<std::uint32_t>(out, data_bytes);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(samples.data());
  out.insert(out.end(), raw, raw + data_bytes);
  return out;
}

/// Writes `bytes` to `path` through a sibling temp file and a rename, so a
/// failed write never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline void write_wav(std::span<const float> samples, int sample_rate_hz, const std::filesystem::path& path) {
  const auto bytes = encode_wav(samples, sample_rate_hz);
  write_file_atomic(path, bytes);
}

struct WavData {
  int sample_rate_hz = 0;
  std::vector<float> samples;
};

/// Decodes mono float32 or 16-bit PCM WAV bytes. Unknown chunks are skipped.
inline WavData decode_wav(std::span<const std::uint8_t> in) {
  using detail::get_le;
  if (in.size() < 12 || std::memcmp(in.data(), "RIFF", 4) != 0 || std::memcmp(in.data() + 8, "WAVE", 4) != 0) {
    throw IoError("wav: not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= in.size()) {
    const std::string_view id(reinterpret_cast<const char*>(in.data() + pos), 4);
    const std::uint32_t size = get_le<std::uint32_t>(in, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > in.size()) throw IoError("wav: chunk runs past end of file");
    if (id == "fmt ") {
      if (size < 16) throw IoError("wav: fmt chunk too small");
      format = get_le<std::uint16_t>(in, body);
      channels = get_le<std::uint16_t>(in, body + 2);
      rate = get_le<std::uint32_t>(in, body + 4);
      bits = get_le<std::uint16_t>(in, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("wav: data chunk before fmt chunk");
      if (channels != 1) throw IoError("wav: only mono files are supported");
      WavData out;
      out.sample_rate_hz = static_cast<int>(rate);
      if (format == kWavFormatFloat && bits == 32) {
        out.samples.resize(size / 4);
        std::memcpy(out.samples.data(), in.data() + body, out.samples.size() * 4);
      } else if (format == kWavFormatPcm && bits == 16) {
        out.samples.resize(size / 2);
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
          out.samples[i] = static_cast<float>(get_le<std::int16_t>(in, body + 2 * i)) / 32768.0f;
        }
      } else {
        throw IoError("wav: unsupported sample format");
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw IoError("wav: no data chunk");
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline WavData read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

}  // namespace mixlevels
