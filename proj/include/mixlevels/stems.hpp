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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/levels.hpp"
#include "mixlevels/spectrum.hpp"

namespace mixlevels {

inline constexpr int kLoopBeats = 16;
inline constexpr double kStemRmsDbfs = -18.0;

struct StemParams {
  std::uint64_t seed = 42;
  int sample_rate_hz = 48000;
  double bpm = 120.0;

  void validate() const {
    if (sample_rate_hz != 44100 && sample_rate_hz != 48000) {
      throw ConfigError("sample rate must be 44100 or 48000 Hz");
    }
    if (!(std::isfinite(bpm) && bpm >= 60.0 && bpm <= 200.0)) {
      throw ConfigError("bpm must lie in [60, 200]");
    }
  }
};

inline std::size_t loop_length_samples(int sample_rate_hz, double bpm) {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(sample_rate_hz) * 60.0 / bpm * kLoopBeats));
}

/// A scheduled note inside the loop. Positions are in samples from loop start.
struct NoteEvent {
  std::size_t onset = 0;
  std::size_t length = 0;
  double freq_hz = 0.0;
  double velocity = 1.0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Five equal-length mono loops, one per instrument.
struct StemBank {
  int sample_rate_hz = 48000;
  double bpm = 120.0;
  std::uint64_t seed = 0;
  std::array<std::vector<float>, kInstrumentCount> stems;
  /// Score used to synthesize each stem; empty for banks loaded from files.
  std::array<std::vector<NoteEvent>, kInstrumentCount> events;
  /// Free-form generator choices (key, voices) recorded in the manifest.
  std::vector<std::pair<std::string, std::string>> generator_notes;

  std::size_t loop_samples() const noexcept { return stems[0].size(); }

  std::span<const float> stem(Instrument id) const noexcept { return stems[index(id)]; }

  void validate() const {
    if (!(sample_rate_hz > 0)) throw ConfigError("stem bank: sample rate must be positive");
    const auto n = stems[0].size();
    if (n == 0) throw ConfigError("stem bank: stems must not be empty");
    for (const auto& s : stems) {
      if (s.size() != n) throw ConfigError("stem bank: all stems must have the same length");
    }
  }
};

/// Fraction of the buffer's spectral energy inside the speaker band
/// [180, 3200] Hz, over one transform of the whole buffer.
inline double verify_band(std::span<const float> buffer, int sample_rate_hz) {
  if (buffer.empty()) throw DomainError("verify_band: empty buffer");
  return band_energy_fraction(buffer, static_cast<double>(sample_rate_hz));
}

namespace detail {

// Portable draws from a fully specified engine; std distributions are
// implementation-defined and would break bit-exact output across toolchains.
class StemRng {
 public:
  explicit StemRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() noexcept { return 2.0 * uniform() - 1.0; }
  std::size_t below(std::size_t n) noexcept {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }
  bool chance(double p) noexcept { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

inline double midi_to_hz(double note) noexcept { return 440.0 * std::pow(2.0, (note - 69.0) / 12.0); }

// Raised-cosine attack and release over an event of `length` samples.
inline double edge_envelope(std::size_t i, std::size_t length, std::size_t attack,
                            std::size_t release) noexcept {
  double g = 1.0;
  if (i < attack) g *= 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(attack));
  const std::size_t from_end = length - 1 - i;
  if (from_end < release) {
    g *= 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(from_end) / static_cast<double>(release));
  }
  return g;
}

inline constexpr double kHarmonicCeilingHz = 2900.0;

/// Musical timing of one loop: 32 eighth-note slots over 16 beats.
struct Grid {
  int sample_rate_hz;
  std::size_t loop;

  static constexpr std::size_t kSlots = 32;

  std::size_t slot_start(std::size_t slot) const noexcept { return slot * loop / kSlots; }
  std::size_t slot_len() const noexcept { return loop / kSlots; }
  std::size_t ms(double v) const noexcept {
    return static_cast<std::size_t>(std::llround(v * 1e-3 * sample_rate_hz));
  }
  double seconds(std::size_t samples) const noexcept {
    return static_cast<double>(samples) / static_cast<double>(sample_rate_hz);
  }
};

/// Adds `voice(i)` for i in [0, e.length) at e.onset, wrapping past the end.
template <typename Voice>
void stamp(std::vector<double>& out, const NoteEvent& e, Voice&& voice) {
  const std::size_t n = out.size();
  const std::size_t len = std::min(e.length, n);
  for (std::size_t i = 0; i < len; ++i) out[(e.onset + i) % n] += voice(i);
}

// Rock-ish minor pentatonic material, MIDI note numbers relative to the key.
inline constexpr std::array<int, 9> kMelodyScale = {57, 60, 62, 64, 67, 69, 72, 74, 76};  // A3..E5
inline constexpr std::array<int, 4> kProgression = {0, 3, 5, 7};  // i bIII iv v

struct Score {
  int key = 0;
  std::vector<NoteEvent> melody;
  std::vector<NoteEvent> guitar;
  std::vector<NoteEvent> drums;  // freq_hz encodes the drum voice (see DrumVoice)
  std::vector<NoteEvent> synth;
};

enum class DrumVoice : int { Tom = 1, Snare = 2, Hat = 3 };

inline Score compose(StemRng& rng, const Grid& grid) {
  Score score;
  const int key = static_cast<int>(rng.below(5));  // transpose up 0..4 semitones
  score.key = key;
  const std::size_t slot = grid.slot_len();
  // The final eighth is a break for every part so the seam sits in near-silence.
  constexpr std::size_t kLastPlayable = Grid::kSlots - 2;

  // Melody on the eighth grid, random walk over the scale.
  std::size_t degree = 4;
  std::size_t s = 0;
  while (s <= kLastPlayable) {
    if (s != 0 && rng.chance(0.25)) {
      ++s;
      continue;
    }
    std::size_t dur = 1 + rng.below(3);
    dur = std::min(dur, kLastPlayable + 1 - s);
    const int step = static_cast<int>(rng.below(5)) - 2;
    degree = static_cast<std::size_t>(
        std::clamp<int>(static_cast<int>(degree) + step, 0, static_cast<int>(kMelodyScale.size()) - 1));
    score.melody.push_back({grid.slot_start(s), dur * slot,
                            midi_to_hz(kMelodyScale[degree] + key), 0.75 + 0.25 * rng.uniform()});
    s += dur;
  }

  // Guitar: palm-muted power-chord eighths, one chord per four beats.
  for (std::size_t g = 0; g <= kLastPlayable; ++g) {
    const int chord = kProgression[(g / 8) % kProgression.size()];
    const bool accent = g % 2 == 0;
    if (!accent && rng.chance(0.2)) continue;
    score.guitar.push_back({grid.slot_start(g), slot, midi_to_hz(57 + key + chord),
                            accent ? 1.0 : 0.7});
  }

  // Drums: toms on 1 and 3, snare on 2 and 4, hats on eighths.
  for (std::size_t g = 0; g <= kLastPlayable; ++g) {
    const std::size_t beat_slot = g % 4;
    const std::size_t len = std::min<std::size_t>(grid.ms(350), (kLastPlayable + 1 - g) * slot + slot / 2);
    if (beat_slot == 0 || (beat_slot == 3 && rng.chance(0.3))) {
      score.drums.push_back({grid.slot_start(g), len, static_cast<double>(DrumVoice::Tom),
                             beat_slot == 0 ? 1.0 : 0.6});
    }
    if (beat_slot == 2) {
      score.drums.push_back({grid.slot_start(g), len, static_cast<double>(DrumVoice::Snare), 1.0});
    }
    score.drums.push_back({grid.slot_start(g), std::min(len, grid.ms(120)),
                           static_cast<double>(DrumVoice::Hat), g % 2 == 0 ? 0.5 : 0.35});
  }

  // Synth: sixteenth-note arpeggio high up, chord tones of the progression.
  constexpr std::array<int, 4> kArp = {0, 3, 7, 12};
  const std::size_t sixteenth = slot / 2;
  for (std::size_t h = 0; h < 2 * (kLastPlayable + 1); ++h) {
    const int chord = kProgression[(h / 16) % kProgression.size()];
    const int note = 76 + key + chord + kArp[(h + rng.below(2)) % kArp.size()];
    score.synth.push_back({grid.slot_start(h / 2) + (h % 2) * sixteenth, sixteenth * 9 / 10,
                           midi_to_hz(note), h % 4 == 0 ? 1.0 : 0.8});
  }
  return score;
}

inline std::vector<double> render_piano(const std::vector<NoteEvent>& notes, const Grid& grid) {
  std::vector<double> out(grid.loop, 0.0);
  const double sr = grid.sample_rate_hz;
  for (const auto& n : notes) {
    NoteEvent e = n;
    e.length = n.length + grid.ms(400);  // let the string ring past the note
    const std::size_t attack = grid.ms(3);
    const std::size_t release = grid.ms(60);
    const int harmonics = static_cast<int>(kHarmonicCeilingHz / n.freq_hz);
    stamp(out, e, [&](std::size_t i) {
      const double t = static_cast<double>(i) / sr;
      double v = 0.0;
      for (int k = 1; k <= harmonics; ++k) {
        const double decay = std::exp(-t * (1.5 + 1.2 * k));
        v += decay * std::sin(2.0 * std::numbers::pi * n.freq_hz * k * t) / std::pow(k, 1.1);
      }
      return n.velocity * v * edge_envelope(i, e.length, attack, release);
    });
  }
  return out;
}

inline std::vector<double> render_keyboard(const std::vector<NoteEvent>& notes, const Grid& grid) {
  std::vector<double> out(grid.loop, 0.0);
  const double sr = grid.sample_rate_hz;
  constexpr std::array<double, 4> kDrawbars = {1.0, 0.6, 0.45, 0.25};
  for (const auto& n : notes) {
    const std::size_t attack = grid.ms(12);
    const std::size_t release = grid.ms(40);
    stamp(out, n, [&](std::size_t i) {
      const double t = static_cast<double>(i) / sr;
      double v = 0.0;
      for (std::size_t k = 1; k <= kDrawbars.size(); ++k) {
        if (n.freq_hz * k > kHarmonicCeilingHz) break;
        v += kDrawbars[k - 1] * std::sin(2.0 * std::numbers::pi * n.freq_hz * k * t);
      }
      const double tremolo = 1.0 - 0.15 * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * 5.0 * t));
      return n.velocity * v * tremolo * edge_envelope(i, n.length, attack, release);
    });
  }
  return out;
}

inline std::vector<double> render_guitar(const std::vector<NoteEvent>& notes, const Grid& grid) {
  std::vector<double> out(grid.loop, 0.0);
  const double sr = grid.sample_rate_hz;
  constexpr double kDrive = 2.5;
  const double norm = 1.0 / std::tanh(kDrive);
  for (const auto& n : notes) {
    const std::size_t attack = grid.ms(2);
    const std::size_t release = grid.ms(25);
    const double fifth = n.freq_hz * 1.4983070768766815;  // 2^(7/12)
    stamp(out, n, [&](std::size_t i) {
      const double t = static_cast<double>(i) / sr;
      double v = 0.0;
      for (int k = 1; k <= 6; ++k) {
        const double a = std::exp(-t * (4.0 + 2.0 * k)) / k;
        v += a * std::sin(2.0 * std::numbers::pi * n.freq_hz * k * t);
        v += 0.8 * a * std::sin(2.0 * std::numbers::pi * fifth * k * t);
      }
      return n.velocity * norm * std::tanh(kDrive * 0.5 * v) * edge_envelope(i, n.length, attack, release);
    });
  }
  return out;
}

inline std::vector<double> render_drums(const std::vector<NoteEvent>& hits, const Grid& grid,
                                        StemRng& rng) {
  std::vector<double> out(grid.loop, 0.0);
  const double sr = grid.sample_rate_hz;
  for (const auto& h : hits) {
    const auto voice = static_cast<DrumVoice>(static_cast<int>(h.freq_hz));
    const std::size_t attack = grid.ms(1);
    const std::size_t release = grid.ms(20);
    switch (voice) {
      case DrumVoice::Tom: {
        // Pitch glides down from 320 Hz and settles at 210 Hz.
        double phase = 0.0;
        stamp(out, h, [&](std::size_t i) {
          const double t = static_cast<double>(i) / sr;
          const double f = 210.0 + 110.0 * std::exp(-t / 0.04);
          phase += 2.0 * std::numbers::pi * f / sr;
          const double body = std::sin(phase) + 0.35 * std::sin(2.0 * phase);
          return h.velocity * body * std::exp(-t / 0.14) * edge_envelope(i, h.length, attack, release);
        });
        break;
      }
      case DrumVoice::Snare:
        stamp(out, h, [&](std::size_t i) {
          const double t = static_cast<double>(i) / sr;
          const double tone = 0.6 * std::sin(2.0 * std::numbers::pi * 330.0 * t) * std::exp(-t / 0.05);
          const double noise = 1.2 * rng.symmetric() * std::exp(-t / 0.09);
          return h.velocity * (tone + noise) * edge_envelope(i, h.length, attack, release);
        });
        break;
      case DrumVoice::Hat:
        stamp(out, h, [&](std::size_t i) {
          const double t = static_cast<double>(i) / sr;
          return h.velocity * 1.5 * rng.symmetric() * std::exp(-t / 0.03) *
                 edge_envelope(i, h.length, attack, release);
        });
        break;
    }
  }
  return out;
}

inline std::vector<double> render_synth(const std::vector<NoteEvent>& notes, const Grid& grid) {
  std::vector<double> out(grid.loop, 0.0);
  const double sr = grid.sample_rate_hz;
  constexpr double kDuty = 0.2;
  for (const auto& n : notes) {
    const std::size_t attack = grid.ms(3);
    const std::size_t release = grid.ms(15);
    double phase = 0.0;
    stamp(out, n, [&](std::size_t i) {
      const double t = static_cast<double>(i) / sr;
      const double f = n.freq_hz * (1.0 + 0.006 * std::sin(2.0 * std::numbers::pi * 6.0 * t));
      phase += 2.0 * std::numbers::pi * f / sr;
      double v = 0.0;
      for (int k = 1; n.freq_hz * k <= kHarmonicCeilingHz; ++k) {
        v += std::sin(std::numbers::pi * k * kDuty) / k * std::cos(k * phase);
      }
      return n.velocity * v * edge_envelope(i, n.length, attack, release);
    });
  }
  return out;
}

/// Band-limits, RMS-normalizes to the stem target and keeps the peak below
/// full scale. Loud transients are tamed by soft clipping followed by
/// another band-limit pass.
inline std::vector<float> finish_stem(std::vector<double> x, int sample_rate_hz) {
  const double target = from_db(kStemRmsDbfs);
  constexpr double kPeakCeiling = 0.97;
  for (int pass = 0;; ++pass) {
    circular_band_limit(x, sample_rate_hz);
    const double level = rms(std::span<const double>(x));
    if (!(level > 0.0)) throw ConfigError("stem synthesis produced silence");
    const double scale = target / level;
    for (auto& v : x) v *= scale;
    if (peak(std::span<const double>(x)) <= kPeakCeiling || pass == 8) break;
    const double knee = 0.8 * kPeakCeiling;
    for (auto& v : x) {
      const double a = std::abs(v);
      if (a > knee) v = std::copysign(knee + (1.0 - knee) * std::tanh((a - knee) / (1.0 - knee)), v);
    }
  }
  return {x.begin(), x.end()};
}

}  // namespace detail

/// Procedural five-stem loop of 16 beats. Output is a pure function of
/// (seed, sample rate, bpm).
inline StemBank generate_stems(const StemParams& params) {
  params.validate();
  const detail::Grid grid{params.sample_rate_hz, loop_length_samples(params.sample_rate_hz, params.bpm)};
  detail::StemRng rng(params.seed);
  const auto score = detail::compose(rng, grid);

  StemBank bank;
  bank.sample_rate_hz = params.sample_rate_hz;
  bank.bpm = params.bpm;
  bank.seed = params.seed;

  auto set = [&](Instrument id, std::vector<double> raw, const std::vector<NoteEvent>& events) {
    bank.stems[index(id)] = detail::finish_stem(std::move(raw), params.sample_rate_hz);
    bank.events[index(id)] = events;
  };
  set(Instrument::Piano, detail::render_piano(score.melody, grid), score.melody);
  set(Instrument::Keyboard, detail::render_keyboard(score.melody, grid), score.melody);
  set(Instrument::Guitar, detail::render_guitar(score.guitar, grid), score.guitar);
  set(Instrument::Drums, detail::render_drums(score.drums, grid, rng), score.drums);
  set(Instrument::Synth, detail::render_synth(score.synth, grid), score.synth);

  static constexpr std::array<const char*, 5> kKeys = {"A", "A#", "B", "C", "C#"};
  bank.generator_notes = {
      {"key", std::string(kKeys[static_cast<std::size_t>(score.key)]) + " minor pentatonic"},
      {"piano", "decaying additive harmonics, same melody as keyboard"},
      {"keyboard", "sustained drawbar harmonics with tremolo, same melody as piano"},
      {"guitar", "palm-muted power chords, tanh saturation"},
      {"drums", "pitched toms 210-320 Hz, noise snare and hats"},
      {"synth", "20% pulse arpeggio with 6 Hz vibrato, harmonics below 2.9 kHz"},
      {"band", "circular band-pass 180-3200 Hz with raised-cosine skirts"},
  };
  return bank;
}

}  // namespace mixlevels
