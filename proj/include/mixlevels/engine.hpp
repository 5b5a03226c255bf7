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

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/stems.hpp"

namespace mixlevels {

/// Loop playback position.
class Transport {
 public:
  Transport() = default;
  explicit Transport(std::size_t loop_len, std::size_t position = 0) : loop_len_(loop_len) {
    if (loop_len == 0) throw ConfigError("transport: loop length must be positive");
    position_ = position % loop_len;
  }

  std::size_t position() const noexcept { return position_; }
  std::size_t loop_len() const noexcept { return loop_len_; }

  void advance(std::size_t n) noexcept {
    if (loop_len_ == 0) return;
    position_ = static_cast<std::size_t>((static_cast<unsigned long long>(position_) + n % loop_len_) % loop_len_);
  }

 private:
  std::size_t loop_len_ = 0;
  std::size_t position_ = 0;
};

/// Linear gain ramp. After a target change the gain moves in equal steps and
/// lands exactly on the target after `ramp_samples` samples.
class GainRamp {
 public:
  GainRamp() noexcept : GainRamp(0.0) {}
  explicit GainRamp(double gain) noexcept : start_(gain), current_(gain), target_(gain) {}

  void reset(double gain) noexcept {
    start_ = current_ = target_ = gain;
    remaining_ = 0;
  }

  void set_target(double target, std::size_t ramp_samples) noexcept {
    target_ = target;
    start_ = current_;
    if (target == current_ || ramp_samples <= 1) {
      remaining_ = target == current_ ? 0 : 1;
      length_ = 1;
      return;
    }
    length_ = remaining_ = ramp_samples;
  }

  /// Gain for the next output sample.
  double next() noexcept {
    if (remaining_ > 0) {
      --remaining_;
      const auto done = static_cast<double>(length_ - remaining_);
      current_ = remaining_ == 0 ? target_ : start_ + (target_ - start_) * done / static_cast<double>(length_);
    }
    return current_;
  }

  double current() const noexcept { return current_; }
  double target() const noexcept { return target_; }
  bool ramping() const noexcept { return remaining_ > 0; }

 private:
  double start_;
  double current_;
  double target_;
  std::size_t length_ = 1;
  std::size_t remaining_ = 0;
};

inline constexpr double kLimiterThreshold = 0.9;
inline constexpr double kLimiterCeiling = 0.99;

/// Memoryless soft limiter: identity up to 0.9, then a C1 knee that
/// approaches 0.99 asymptotically.
inline double soft_limit(double x) noexcept {
  const double a = std::abs(x);
  if (a <= kLimiterThreshold) return x;
  constexpr double room = kLimiterCeiling - kLimiterThreshold;
  const double d = a - kLimiterThreshold;
  return std::copysign(kLimiterThreshold + room * d / (d + room), x);
}

struct EngineConfig {
  double master_gain = 0.25;
  double ramp_ms = 20.0;
  /// Overrides ramp_ms when set; 1 gives instant gain changes.
  std::optional<std::size_t> ramp_samples;
  double control_rate_hz = 100.0;
  std::size_t block_size = 480;
  /// Tracks summed into the output. Disabled tracks still follow their ramps.
  std::array<bool, kInstrumentCount> tracks_enabled{true, true, true, true, true};

  std::size_t ramp_length(int sample_rate_hz) const noexcept {
    if (ramp_samples) return std::max<std::size_t>(1, *ramp_samples);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ramp_ms * 1e-3 * sample_rate_hz)));
  }

  EngineConfig solo(Instrument id) const {
    EngineConfig c = *this;
    c.tracks_enabled.fill(false);
    c.tracks_enabled[index(id)] = true;
    return c;
  }

  void validate() const {
    if (!(std::isfinite(master_gain) && master_gain >= 0.0)) throw ConfigError("engine: master_gain must be >= 0");
    if (!(std::isfinite(ramp_ms) && ramp_ms >= 0.0)) throw ConfigError("engine: ramp_ms must be >= 0");
    if (!(std::isfinite(control_rate_hz) && control_rate_hz > 0.0)) {
      throw ConfigError("engine: control_rate_hz must be > 0");
    }
    if (block_size == 0) throw ConfigError("engine: block_size must be positive");
  }
};

inline void validate_gains(const GainVector& gv) {
  for (double g : gv.values) {
    if (!(std::isfinite(g) && g >= 0.0)) throw DomainError("gains must be finite and >= 0");
  }
}

/// Loop player and mono mixer.
///
/// One thread renders. Any thread may call post_gains(); posted gains are
/// picked up at the start of the next render call.
class Engine {
 public:
  explicit Engine(EngineConfig config = {}) : config_(std::move(config)) { config_.validate(); }

  Engine(std::shared_ptr<const StemBank> bank, EngineConfig config = {}) : Engine(std::move(config)) {
    load(std::move(bank));
  }

  void load(std::shared_ptr<const StemBank> bank) {
    if (!bank) throw NotReady("engine: null stem bank");
    bank->validate();
    bank_ = std::move(bank);
    transport_ = Transport(bank_->loop_samples());
    ramp_len_ = config_.ramp_length(bank_->sample_rate_hz);
  }

  bool ready() const noexcept { return bank_ != nullptr; }
  const StemBank& bank() const {
    if (!bank_) throw NotReady("engine: no stem bank loaded");
    return *bank_;
  }
  const EngineConfig& config() const noexcept { return config_; }
  const Transport& transport() const noexcept { return transport_; }
  std::size_t ramp_samples() const noexcept { return ramp_len_; }

  /// New targets for every track; each ramp restarts from its current gain.
  void set_gains(const GainVector& gv) {
    validate_gains(gv);
    for (auto id : kInstruments) ramps_[index(id)].set_target(gv[id], ramp_len_);
  }

  /// Jumps straight to `gv` without ramping.
  void reset_gains(const GainVector& gv) {
    validate_gains(gv);
    for (auto id : kInstruments) ramps_[index(id)].reset(gv[id]);
  }

  void post_gains(const GainVector& gv) {
    validate_gains(gv);
    std::lock_guard lock(mailbox_->mutex);
    mailbox_->pending = gv;
  }

  GainVector current_gains() const noexcept {
    GainVector v;
    for (auto id : kInstruments) v[id] = ramps_[index(id)].current();
    return v;
  }

  GainVector target_gains() const noexcept {
    GainVector v;
    for (auto id : kInstruments) v[id] = ramps_[index(id)].target();
    return v;
  }

  void seek(std::size_t position) { transport_ = Transport(bank().loop_samples(), position); }

  void render(std::span<float> out) {
    if (!bank_) throw NotReady("engine: no stem bank loaded");
    take_posted();
    const auto& stems = bank_->stems;
    const std::size_t loop = transport_.loop_len();
    std::size_t pos = transport_.position();
    for (float& sample : out) {
      double acc = 0.0;
      for (std::size_t t = 0; t < kInstrumentCount; ++t) {
        const double g = ramps_[t].next();
        if (config_.tracks_enabled[t]) acc += static_cast<double>(stems[t][pos]) * g;
      }
      sample = static_cast<float>(soft_limit(acc * config_.master_gain));
      if (++pos == loop) pos = 0;
    }
    transport_.advance(out.size());
  }

  std::vector<float> render_block(std::size_t n) {
    if (n == 0) throw DomainError("render_block: need at least one sample");
    std::vector<float> out(n);
    render(out);
    return out;
  }

 private:
  struct Mailbox {
    std::mutex mutex;
    std::optional<GainVector> pending;
  };

  void take_posted() {
    std::optional<GainVector> gv;
    {
      std::lock_guard lock(mailbox_->mutex);
      gv.swap(mailbox_->pending);
    }
    if (gv) set_gains(*gv);
  }

  EngineConfig config_;
  std::shared_ptr<const StemBank> bank_;
  Transport transport_;
  std::size_t ramp_len_ = 1;
  std::array<GainRamp, kInstrumentCount> ramps_{};
  std::unique_ptr<Mailbox> mailbox_ = std::make_unique<Mailbox>();
};

}  // namespace mixlevels
