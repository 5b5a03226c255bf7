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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/orientation.hpp"
#include "mixlevels/settings.hpp"

namespace mixlevels {

// ---------------------------------------------------------------------------
// Wire messages. Each frame is one flat JSON object with a "type" field.
//
//   client -> server   {"type":"tilt","pitch_deg":..,"roll_deg":..}
//                      {"type":"accel","ax":..,"ay":..,"az":..}
//                      {"type":"config-get"}
//   server -> client   {"type":"gains","piano":..,"keyboard":..,"guitar":..,
//                       "drums":..,"synth":..,"gate_on":..,"seq":..}
//                      {"type":"config", <settings keys>...}
//                      {"type":"error","code":..,"text":..}
// ---------------------------------------------------------------------------

struct TiltMessage {
  TiltAngles tilt;
};

struct AccelMessage {
  double ax = 0.0, ay = 0.0, az = 0.0;
};

struct ConfigGetMessage {};

using ClientMessage = std::variant<TiltMessage, AccelMessage, ConfigGetMessage>;

struct GainsMessage {
  GainVector gains;
  bool gate_on = false;
  std::uint64_t seq = 0;

  friend bool operator==(const GainsMessage&, const GainsMessage&) = default;
};

struct ConfigMessage {
  Settings settings;
};

struct ErrorMessage {
  std::string code;
  std::string text;
};

using ServerMessage = std::variant<GainsMessage, ConfigMessage, ErrorMessage>;

namespace detail {

inline double json_number(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw DomainError(std::string("missing numeric field ") + key);
  return it->get<double>();
}

}  // namespace detail

/// Parses one client frame. Throws DomainError on anything malformed.
inline ClientMessage parse_client_message(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DomainError("frame is not a JSON object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw DomainError("missing message type");
  const auto& t = type->get_ref<const std::string&>();
  if (t == "tilt") return TiltMessage{{detail::json_number(j, "pitch_deg"), detail::json_number(j, "roll_deg")}};
  if (t == "accel") {
    return AccelMessage{detail::json_number(j, "ax"), detail::json_number(j, "ay"), detail::json_number(j, "az")};
  }
  if (t == "config-get") return ConfigGetMessage{};
  throw DomainError("unknown message type '" + t + "'");
}

inline nlohmann::json settings_to_json(const Settings& s) {
  nlohmann::json j = nlohmann::json::object();
  for (auto id : kContinuousInstruments) {
    const auto& e = s.mix.envelope(id);
    const std::string p(name(id));
    j[p + ".mute_angle_deg"] = e.mute_angle_deg;
    j[p + ".plateau_half_width_deg"] = e.plateau_half_width_deg;
    j[p + ".plateau_gain"] = e.plateau_gain;
    j[p + ".max_gain"] = e.max_gain;
    j[p + ".orientation"] = e.orientation;
    j[p + ".axis"] = e.axis == TiltAxis::Pitch ? "pitch" : "roll";
  }
  j["gate.threshold_deg"] = s.mix.gate.threshold_deg;
  j["gate.hysteresis_deg"] = s.mix.gate.hysteresis_deg;
  j["gate.on_gain"] = s.mix.gate.on_gain;
  j["engine.master_gain"] = s.engine.master_gain;
  j["engine.ramp_ms"] = s.engine.ramp_ms;
  j["engine.control_rate_hz"] = s.engine.control_rate_hz;
  j["orientation.alpha"] = s.smoothing_alpha;
  j["service.idle_timeout_s"] = s.idle_timeout_s;
  return j;
}

inline std::string to_json(const ServerMessage& msg) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GainsMessage>) {
          j["type"] = "gains";
          for (auto id : kInstruments) j[std::string(name(id))] = m.gains[id];
          j["gate_on"] = m.gate_on;
          j["seq"] = m.seq;
        } else if constexpr (std::is_same_v<T, ConfigMessage>) {
          j = settings_to_json(m.settings);
          j["type"] = "config";
        } else {
          j["type"] = "error";
          j["code"] = m.code;
          j["text"] = m.text;
        }
      },
      msg);
  return j.dump();
}

/// One client's control state: smoother, gate, sequence counter. Not
/// thread-safe on its own; SessionRegistry serializes access.
class Session {
 public:
  using Clock = std::chrono::steady_clock;

  Session(std::string id, Settings settings, Clock::time_point now = Clock::now())
      : id_(std::move(id)), settings_(std::move(settings)), smoother_(settings_.smoothing_alpha), last_activity_(now) {
    settings_.validate();
  }

  const std::string& id() const noexcept { return id_; }
  const Settings& settings() const noexcept { return settings_; }
  bool gate_on() const noexcept { return gate_on_; }
  std::uint64_t seq() const noexcept { return seq_; }
  Clock::time_point last_activity() const noexcept { return last_activity_; }

  ServerMessage handle(const ClientMessage& msg, Clock::time_point now = Clock::now()) {
    last_activity_ = now;
    return std::visit([this](const auto& m) { return on(m); }, msg);
  }

  /// Text in, text out: what a socket connection does per frame.
  std::string handle_text(std::string_view frame, Clock::time_point now = Clock::now()) {
    last_activity_ = now;
    ClientMessage msg;
    try {
      msg = parse_client_message(frame);
    } catch (const DomainError& e) {
      return to_json(ErrorMessage{"bad_message", e.what()});
    }
    return to_json(handle(msg, now));
  }

 private:
  ServerMessage on(const TiltMessage& m) {
    if (!std::isfinite(m.tilt.pitch_deg) || !std::isfinite(m.tilt.roll_deg)) {
      return ErrorMessage{"bad_value", "tilt angles must be finite"};
    }
    return apply(m.tilt);
  }

  ServerMessage on(const AccelMessage& m) {
    try {
      return apply(accel_to_tilt({m.ax, m.ay, m.az, 0.0}));
    } catch (const SampleRejected& e) {
      return ErrorMessage{"sample_rejected", e.what()};
    }
  }

  ServerMessage on(const ConfigGetMessage&) const { return ConfigMessage{settings_}; }

  GainsMessage apply(TiltAngles raw) {
    const auto smoothed = smoother_.smooth(raw);
    const auto update = compute_gains(smoothed, settings_.mix, gate_on_);
    gate_on_ = update.gate_on;
    return {update.gains, update.gate_on, ++seq_};
  }

  std::string id_;
  Settings settings_;
  TiltSmoother smoother_;
  bool gate_on_ = false;
  std::uint64_t seq_ = 0;
  Clock::time_point last_activity_;
};

/// Thread-safe session table. Frames for one session are handled one at a
/// time; different sessions proceed in parallel.
class SessionRegistry {
 public:
  using Clock = Session::Clock;

  explicit SessionRegistry(Settings settings = {}) : settings_(std::move(settings)) { settings_.validate(); }

  const Settings& settings() const noexcept { return settings_; }

  std::string open(Clock::time_point now = Clock::now()) {
    std::lock_guard lock(mutex_);
    std::string id;
    do {
      id = make_token();
    } while (sessions_.contains(id));
    sessions_.emplace(id, std::make_shared<Entry>(id, settings_, now));
    return id;
  }

  void close(const std::string& id) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
  }

  bool contains(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return sessions_.contains(id);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

  /// Throws DomainError when the session does not exist (never opened or expired).
  std::string handle_text(const std::string& id, std::string_view frame, Clock::time_point now = Clock::now()) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return entry->session.handle_text(frame, now);
  }

  ServerMessage handle(const std::string& id, const ClientMessage& msg, Clock::time_point now = Clock::now()) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return entry->session.handle(msg, now);
  }

  /// Drops sessions idle for longer than the configured timeout; returns how many.
  std::size_t expire(Clock::time_point now = Clock::now()) {
    const auto timeout = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(settings_.idle_timeout_s));
    std::lock_guard lock(mutex_);
    return std::erase_if(sessions_, [&](const auto& kv) {
      std::lock_guard entry_lock(kv.second->mutex);
      return now - kv.second->session.last_activity() > timeout;
    });
  }

 private:
  struct Entry {
    Entry(const std::string& id, const Settings& s, Clock::time_point now) : session(id, s, now) {}
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw DomainError("unknown session " + id);
    return it->second;
  }

  std::string make_token() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(32, '0');
    for (auto& c : out) c = kHex[rng_() & 0xF];
    return out;
  }

  Settings settings_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace mixlevels
