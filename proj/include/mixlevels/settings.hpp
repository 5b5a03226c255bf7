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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "mixlevels/engine.hpp"
#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/orientation.hpp"

namespace mixlevels {

/// Everything configurable from a settings file.
///
/// The file is flat `key = value` text, `#` starts a comment. Keys:
///
///   piano.mute_angle_deg  piano.plateau_half_width_deg  piano.plateau_gain
///   piano.max_gain        piano.orientation (+1|-1)     piano.axis (pitch|roll)
///   (same for keyboard, guitar, drums)
///   gate.threshold_deg    gate.hysteresis_deg           gate.on_gain
///   engine.master_gain    engine.ramp_ms                engine.ramp_samples
///   engine.control_rate_hz engine.block_size
///   orientation.alpha     service.idle_timeout_s
///
/// Angles are in degrees, gains linear.
struct Settings {
  MixConfig mix;
  EngineConfig engine;
  double smoothing_alpha = TiltSmoother::kDefaultAlpha;
  double idle_timeout_s = 300.0;

  void validate() const {
    mix.validate();
    engine.validate();
    if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0)) throw ConfigError("orientation.alpha must lie in (0, 1]");
    if (!(std::isfinite(idle_timeout_s) && idle_timeout_s > 0.0)) {
      throw ConfigError("service.idle_timeout_s must be > 0");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view v, std::string_view key) {
  double out = 0.0;
  const char* first = v.data();
  if (!v.empty() && v.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("setting " + std::string(key) + ": not a number: '" + std::string(v) + "'");
  }
  return out;
}

using SettingSetter = std::function<void(Settings&, std::string_view)>;

inline const std::map<std::string, SettingSetter, std::less<>>& setting_table() {
  static const auto table = [] {
    std::map<std::string, SettingSetter, std::less<>> t;
    auto number = [&t](std::string key, auto member) {
      t.emplace(key, [key, member](Settings& s, std::string_view v) { member(s) = parse_number(v, key); });
    };
    for (auto id : kContinuousInstruments) {
      const std::string p(name(id));
      number(p + ".mute_angle_deg", [id](Settings& s) -> double& { return s.mix.envelope(id).mute_angle_deg; });
      number(p + ".plateau_half_width_deg",
             [id](Settings& s) -> double& { return s.mix.envelope(id).plateau_half_width_deg; });
      number(p + ".plateau_gain", [id](Settings& s) -> double& { return s.mix.envelope(id).plateau_gain; });
      number(p + ".max_gain", [id](Settings& s) -> double& { return s.mix.envelope(id).max_gain; });
      t.emplace(p + ".orientation", [id, p](Settings& s, std::string_view v) {
        const double o = parse_number(v, p + ".orientation");
        if (o != 1.0 && o != -1.0) throw ConfigError(p + ".orientation must be +1 or -1");
        s.mix.envelope(id).orientation = static_cast<int>(o);
      });
      t.emplace(p + ".axis", [id, p](Settings& s, std::string_view v) {
        if (v == "pitch") {
          s.mix.envelope(id).axis = TiltAxis::Pitch;
        } else if (v == "roll") {
          s.mix.envelope(id).axis = TiltAxis::Roll;
        } else {
          throw ConfigError(p + ".axis must be pitch or roll");
        }
      });
    }
    number("gate.threshold_deg", [](Settings& s) -> double& { return s.mix.gate.threshold_deg; });
    number("gate.hysteresis_deg", [](Settings& s) -> double& { return s.mix.gate.hysteresis_deg; });
    number("gate.on_gain", [](Settings& s) -> double& { return s.mix.gate.on_gain; });
    number("engine.master_gain", [](Settings& s) -> double& { return s.engine.master_gain; });
    number("engine.ramp_ms", [](Settings& s) -> double& { return s.engine.ramp_ms; });
    number("engine.control_rate_hz", [](Settings& s) -> double& { return s.engine.control_rate_hz; });
    t.emplace("engine.ramp_samples", [](Settings& s, std::string_view v) {
      const double n = parse_number(v, "engine.ramp_samples");
      if (!(n >= 1.0 && n == std::floor(n))) throw ConfigError("engine.ramp_samples must be a positive integer");
      s.engine.ramp_samples = static_cast<std::size_t>(n);
    });
    t.emplace("engine.block_size", [](Settings& s, std::string_view v) {
      const double n = parse_number(v, "engine.block_size");
      if (!(n >= 1.0 && n == std::floor(n))) throw ConfigError("engine.block_size must be a positive integer");
      s.engine.block_size = static_cast<std::size_t>(n);
    });
    number("orientation.alpha", [](Settings& s) -> double& { return s.smoothing_alpha; });
    number("service.idle_timeout_s", [](Settings& s) -> double& { return s.idle_timeout_s; });
    return t;
  }();
  return table;
}

}  // namespace detail

inline Settings parse_settings(std::istream& in) {
  Settings s;
  std::string raw;
  std::size_t lineno = 0;
  const auto& table = detail::setting_table();
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("settings line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigError("settings line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
    }
    it->second(s, value);
  }
  s.validate();
  return s;
}

/// Loads a settings file; a missing file yields the defaults.
inline Settings load_settings(const std::filesystem::path& path) {
  if (path.empty() || !std::filesystem::exists(path)) return Settings{};
  std::ifstream f(path);
  if (!f) throw IoError("cannot read settings file " + path.string());
  return parse_settings(f);
}

inline std::string format_settings(const Settings& s) {
  std::ostringstream out;
  out.precision(17);
  for (auto id : kContinuousInstruments) {
    const auto& e = s.mix.envelope(id);
    const std::string p(name(id));
    out << p << ".mute_angle_deg = " << e.mute_angle_deg << '\n'
        << p << ".plateau_half_width_deg = " << e.plateau_half_width_deg << '\n'
        << p << ".plateau_gain = " << e.plateau_gain << '\n'
        << p << ".max_gain = " << e.max_gain << '\n'
        << p << ".orientation = " << (e.orientation > 0 ? "+1" : "-1") << '\n'
        << p << ".axis = " << (e.axis == TiltAxis::Pitch ? "pitch" : "roll") << '\n';
  }
  out << "gate.threshold_deg = " << s.mix.gate.threshold_deg << '\n'
      << "gate.hysteresis_deg = " << s.mix.gate.hysteresis_deg << '\n'
      << "gate.on_gain = " << s.mix.gate.on_gain << '\n'
      << "engine.master_gain = " << s.engine.master_gain << '\n'
      << "engine.ramp_ms = " << s.engine.ramp_ms << '\n';
  if (s.engine.ramp_samples) out << "engine.ramp_samples = " << *s.engine.ramp_samples << '\n';
  out << "engine.control_rate_hz = " << s.engine.control_rate_hz << '\n'
      << "engine.block_size = " << s.engine.block_size << '\n'
      << "orientation.alpha = " << s.smoothing_alpha << '\n'
      << "service.idle_timeout_s = " << s.idle_timeout_s << '\n';
  return out.str();
}

}  // namespace mixlevels
