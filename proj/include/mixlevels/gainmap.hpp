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
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "mixlevels/errors.hpp"

namespace mixlevels {

enum class Instrument : std::uint8_t { Piano, Keyboard, Guitar, Drums, Synth };

inline constexpr std::size_t kInstrumentCount = 5;

inline constexpr std::array<Instrument, kInstrumentCount> kInstruments = {
    Instrument::Piano, Instrument::Keyboard, Instrument::Guitar, Instrument::Drums,
    Instrument::Synth};

/// The four instruments driven by a gain envelope (everything but the synth).
inline constexpr std::array<Instrument, 4> kContinuousInstruments = {
    Instrument::Piano, Instrument::Keyboard, Instrument::Guitar, Instrument::Drums};

constexpr std::size_t index(Instrument id) noexcept { return static_cast<std::size_t>(id); }

constexpr std::string_view name(Instrument id) noexcept {
  switch (id) {
    case Instrument::Piano: return "piano";
    case Instrument::Keyboard: return "keyboard";
    case Instrument::Guitar: return "guitar";
    case Instrument::Drums: return "drums";
    case Instrument::Synth: return "synth";
  }
  return "?";
}

inline std::optional<Instrument> instrument_from_name(std::string_view s) noexcept {
  for (auto id : kInstruments) {
    if (name(id) == s) return id;
  }
  return std::nullopt;
}

inline constexpr double kMaxTiltDeg = 90.0;

enum class TiltAxis : std::uint8_t { Pitch, Roll };

/// Device tilt in degrees. Pitch is positive when the top edge tips away from
/// the user, roll is positive when the right edge goes down.
struct TiltAngles {
  double pitch_deg = 0.0;
  double roll_deg = 0.0;

  double along(TiltAxis axis) const noexcept {
    return axis == TiltAxis::Pitch ? pitch_deg : roll_deg;
  }

  friend bool operator==(const TiltAngles&, const TiltAngles&) = default;
};

/// Folds both angles into [-90, 90]. Throws DomainError on NaN or infinity.
inline TiltAngles clamp_tilt(TiltAngles t) {
  if (!std::isfinite(t.pitch_deg) || !std::isfinite(t.roll_deg)) {
    throw DomainError("tilt angles must be finite");
  }
  return {std::clamp(t.pitch_deg, -kMaxTiltDeg, kMaxTiltDeg),
          std::clamp(t.roll_deg, -kMaxTiltDeg, kMaxTiltDeg)};
}

/// Piecewise-linear gain-vs-angle curve with a flat plateau around 0 deg.
///
/// The curve is evaluated in the instrument's favored-direction coordinate
/// x = clamp(angle * orientation, -90, 90) and passes through
///
///   (mute_angle, 0) -> (-hw, plateau_gain) -> (+hw, plateau_gain) -> (90, max_gain)
///
/// with hw = plateau_half_width_deg. Below mute_angle the gain stays 0.
struct GainEnvelope {
  double mute_angle_deg = -90.0;
  double plateau_half_width_deg = 5.0;
  double plateau_gain = 1.0;
  double max_gain = 2.0;
  int orientation = +1;
  TiltAxis axis = TiltAxis::Roll;

  void validate() const {
    auto fail = [](const char* what) { throw ConfigError(std::string("gain envelope: ") + what); };
    if (!std::isfinite(mute_angle_deg) || !std::isfinite(plateau_half_width_deg) ||
        !std::isfinite(plateau_gain) || !std::isfinite(max_gain)) {
      fail("all fields must be finite");
    }
    if (!(plateau_half_width_deg > 0.0 && plateau_half_width_deg < kMaxTiltDeg)) {
      fail("plateau_half_width_deg must lie in (0, 90)");
    }
    if (!(mute_angle_deg >= -kMaxTiltDeg && mute_angle_deg < -plateau_half_width_deg)) {
      fail("mute_angle_deg must lie in [-90, -plateau_half_width_deg)");
    }
    if (!(plateau_gain >= 0.0 && plateau_gain <= max_gain)) {
      fail("need 0 <= plateau_gain <= max_gain");
    }
    if (orientation != 1 && orientation != -1) fail("orientation must be +1 or -1");
  }

  friend bool operator==(const GainEnvelope&, const GainEnvelope&) = default;
};

struct GateConfig {
  double threshold_deg = 1.0;
  double hysteresis_deg = 0.2;
  double on_gain = 1.0;

  void validate() const {
    if (!(std::isfinite(threshold_deg) && threshold_deg > 0.0)) {
      throw ConfigError("gate: threshold_deg must be > 0");
    }
    if (!(std::isfinite(hysteresis_deg) && hysteresis_deg >= 0.0)) {
      throw ConfigError("gate: hysteresis_deg must be >= 0");
    }
    if (!(std::isfinite(on_gain) && on_gain >= 0.0)) {
      throw ConfigError("gate: on_gain must be >= 0");
    }
  }

  friend bool operator==(const GateConfig&, const GateConfig&) = default;
};

/// One linear gain per instrument.
struct GainVector {
  std::array<double, kInstrumentCount> values{};

  double& operator[](Instrument id) noexcept { return values[index(id)]; }
  double operator[](Instrument id) const noexcept { return values[index(id)]; }

  static GainVector uniform(double g) noexcept {
    GainVector v;
    v.values.fill(g);
    return v;
  }

  friend bool operator==(const GainVector&, const GainVector&) = default;
};

/// Envelope set plus synth gate.
struct MixConfig {
  GainEnvelope piano{.orientation = +1, .axis = TiltAxis::Roll};
  GainEnvelope keyboard{.orientation = -1, .axis = TiltAxis::Roll};
  GainEnvelope guitar{.orientation = -1, .axis = TiltAxis::Pitch};
  GainEnvelope drums{.orientation = +1, .axis = TiltAxis::Pitch};
  GateConfig gate;

  const GainEnvelope& envelope(Instrument id) const {
    switch (id) {
      case Instrument::Piano: return piano;
      case Instrument::Keyboard: return keyboard;
      case Instrument::Guitar: return guitar;
      case Instrument::Drums: return drums;
      case Instrument::Synth: break;
    }
    throw ConfigError("the synth is gated and has no envelope");
  }

  GainEnvelope& envelope(Instrument id) {
    return const_cast<GainEnvelope&>(std::as_const(*this).envelope(id));
  }

  void validate() const {
    for (auto id : kContinuousInstruments) envelope(id).validate();
    gate.validate();
  }

  friend bool operator==(const MixConfig&, const MixConfig&) = default;
};

/// Gain of one continuous instrument at the given angle (degrees).
///
/// Exact at the breakpoints: 0 at and below mute_angle, plateau_gain on
/// [-hw, hw], max_gain at +90 in the favored direction.
inline double axis_gain(double angle_deg, const GainEnvelope& env) {
  if (!std::isfinite(angle_deg)) throw DomainError("axis_gain: angle must be finite");
  env.validate();

  const double x = std::clamp(angle_deg * env.orientation, -kMaxTiltDeg, kMaxTiltDeg);
  const double hw = env.plateau_half_width_deg;
  if (x <= env.mute_angle_deg) return 0.0;
  if (x < -hw) return env.plateau_gain * (x - env.mute_angle_deg) / (-hw - env.mute_angle_deg);
  if (x <= hw) return env.plateau_gain;
  return env.plateau_gain + (env.max_gain - env.plateau_gain) * (x - hw) / (kMaxTiltDeg - hw);
}

/// Closed-square gate around level. Once open, the square grows by the
/// hysteresis margin until the tilt leaves it.
inline bool synth_gate(TiltAngles tilt, const GateConfig& cfg, bool was_on) noexcept {
  const double limit = was_on ? cfg.threshold_deg + cfg.hysteresis_deg : cfg.threshold_deg;
  return std::abs(tilt.pitch_deg) <= limit && std::abs(tilt.roll_deg) <= limit;
}

struct GainUpdate {
  GainVector gains;
  bool gate_on = false;
};

/// Maps a tilt to all five gains, threading the synth gate state.
inline GainUpdate compute_gains(TiltAngles tilt, const MixConfig& config, bool was_on) {
  config.validate();
  const TiltAngles t = clamp_tilt(tilt);

  GainUpdate out;
  for (auto id : kContinuousInstruments) {
    const auto& env = config.envelope(id);
    out.gains[id] = axis_gain(t.along(env.axis), env);
  }
  out.gate_on = synth_gate(t, config.gate, was_on);
  out.gains[Instrument::Synth] = out.gate_on ? config.gate.on_gain : 0.0;
  return out;
}

}  // namespace mixlevels
