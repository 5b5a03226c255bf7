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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/levels.hpp"
#include "mixlevels/stems.hpp"
#include "mixlevels/wav.hpp"

namespace mixlevels {

inline constexpr const char* kManifestName = "manifest.txt";

inline std::string stem_file_name(Instrument id) { return std::string(name(id)) + ".wav"; }

struct StemSummary {
  Instrument id = Instrument::Piano;
  std::string file;
  double rms_dbfs = 0.0;
  double peak = 0.0;
  double band_fraction = 0.0;
};

/// Plain-text description of an exported bank.
struct StemManifest {
  std::uint64_t seed = 0;
  double bpm = 0.0;
  int sample_rate_hz = 0;
  int beats = kLoopBeats;
  std::size_t loop_samples = 0;
  std::vector<StemSummary> stems;
  std::vector<std::pair<std::string, std::string>> generator_notes;

  std::string format() const {
    std::ostringstream out;
    out << "# mixlevels stem bank\n"
        << "seed = " << seed << '\n'
        << "bpm = " << bpm << '\n'
        << "sample_rate_hz = " << sample_rate_hz << '\n'
        << "beats = " << beats << '\n'
        << "loop_samples = " << loop_samples << '\n';
    for (const auto& [k, v] : generator_notes) out << "generator." << k << " = " << v << '\n';
    char buf[64];
    for (const auto& s : stems) {
      const std::string p(name(s.id));
      out << p << ".file = " << s.file << '\n';
      std::snprintf(buf, sizeof buf, "%.4f", s.rms_dbfs);
      out << p << ".rms_dbfs = " << buf << '\n';
      std::snprintf(buf, sizeof buf, "%.6f", s.peak);
      out << p << ".peak = " << buf << '\n';
      std::snprintf(buf, sizeof buf, "%.6f", s.band_fraction);
      out << p << ".band_fraction = " << buf << '\n';
    }
    return out.str();
  }

  static StemManifest parse(std::istream& in) {
    std::map<std::string, std::string, std::less<>> kv;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) throw IoError("manifest: malformed line '" + line + "'");
      kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto get = [&](const std::string& key) -> const std::string& {
      const auto it = kv.find(key);
      if (it == kv.end()) throw IoError("manifest: missing key " + key);
      return it->second;
    };
    StemManifest m;
    try {
      m.seed = std::stoull(get("seed"));
      m.bpm = std::stod(get("bpm"));
      m.sample_rate_hz = std::stoi(get("sample_rate_hz"));
      m.beats = std::stoi(get("beats"));
      m.loop_samples = std::stoull(get("loop_samples"));
      for (auto id : kInstruments) {
        const std::string p(name(id));
        StemSummary s;
        s.id = id;
        s.file = get(p + ".file");
        if (auto it = kv.find(p + ".rms_dbfs"); it != kv.end()) s.rms_dbfs = std::stod(it->second);
        if (auto it = kv.find(p + ".peak"); it != kv.end()) s.peak = std::stod(it->second);
        if (auto it = kv.find(p + ".band_fraction"); it != kv.end()) s.band_fraction = std::stod(it->second);
        m.stems.push_back(std::move(s));
      }
    } catch (const std::logic_error&) {
      throw IoError("manifest: malformed number");
    }
    for (const auto& [k, v] : kv) {
      if (k.rfind("generator.", 0) == 0) m.generator_notes.emplace_back(k.substr(10), v);
    }
    return m;
  }
};

inline StemManifest describe(const StemBank& bank) {
  StemManifest m;
  m.seed = bank.seed;
  m.bpm = bank.bpm;
  m.sample_rate_hz = bank.sample_rate_hz;
  m.loop_samples = bank.loop_samples();
  m.generator_notes = bank.generator_notes;
  for (auto id : kInstruments) {
    const auto s = bank.stem(id);
    m.stems.push_back({id, stem_file_name(id), to_db(rms(s)), peak(s), verify_band(s, bank.sample_rate_hz)});
  }
  return m;
}

/// In-memory export: file name -> bytes for the five stems and the manifest.
inline std::map<std::string, std::vector<std::uint8_t>, std::less<>> encode_bank(const StemBank& bank) {
  bank.validate();
  std::map<std::string, std::vector<std::uint8_t>, std::less<>> files;
  for (auto id : kInstruments) files[stem_file_name(id)] = encode_wav(bank.stem(id), bank.sample_rate_hz);
  const auto text = describe(bank).format();
  files[kManifestName] = std::vector<std::uint8_t>(text.begin(), text.end());
  return files;
}

/// Writes five mono WAV files and manifest.txt into `dir` (created if needed).
inline StemManifest export_stems(const StemBank& bank, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [file, bytes] : encode_bank(bank)) write_file_atomic(dir / file, bytes);
  return describe(bank);
}

/// Loads a bank exported by export_stems (or hand-made WAVs with a manifest).
/// Band compliance is not enforced here.
inline StemBank load_stems(const std::filesystem::path& dir) {
  std::ifstream f(dir / kManifestName);
  if (!f) throw IoError("no " + std::string(kManifestName) + " in " + dir.string());
  const auto manifest = StemManifest::parse(f);
  StemBank bank;
  bank.seed = manifest.seed;
  bank.bpm = manifest.bpm;
  bank.sample_rate_hz = manifest.sample_rate_hz;
  bank.generator_notes = manifest.generator_notes;
  for (const auto& s : manifest.stems) {
    auto wav = read_wav(dir / s.file);
    if (wav.sample_rate_hz != manifest.sample_rate_hz) {
      throw IoError(s.file + ": sample rate differs from manifest");
    }
    bank.stems[index(s.id)] = std::move(wav.samples);
  }
  try {
    bank.validate();
  } catch (const ConfigError& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  return bank;
}

}  // namespace mixlevels
