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
#include <cmath>
#include <numbers>

#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"

namespace mixlevels {

/// Accelerometer reading in g. Device axes: x to the right, y toward the top
/// of the screen, z out of the screen.
struct AccelSample {
  double ax = 0.0;
  double ay = 0.0;
  double az = 1.0;
  double timestamp_s = 0.0;

  double magnitude() const noexcept { return std::sqrt(ax * ax + ay * ay + az * az); }
};

inline constexpr double kMinAccelMagnitude = 0.3;
inline constexpr double kMaxAccelMagnitude = 3.0;

namespace detail {
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}

/// Inclination from gravity. Throws SampleRejected when the magnitude is
/// outside [0.3, 3.0] g.
inline TiltAngles accel_to_tilt(const AccelSample& s) {
  if (!std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az)) {
    throw SampleRejected("accelerometer sample is not finite");
  }
  const double mag = s.magnitude();
  if (mag < kMinAccelMagnitude || mag > kMaxAccelMagnitude) {
    throw SampleRejected("accelerometer magnitude out of band (shake or freefall)");
  }
  const double pitch = std::atan2(-s.ay, std::hypot(s.ax, s.az)) * detail::kRadToDeg;
  const double roll = std::atan2(s.ax, s.az) * detail::kRadToDeg;
  return {std::clamp(pitch, -kMaxTiltDeg, kMaxTiltDeg), std::clamp(roll, -kMaxTiltDeg, kMaxTiltDeg)};
}

/// Per-axis exponential moving average. The first observation initializes
/// the state.
class TiltSmoother {
 public:
  static constexpr double kDefaultAlpha = 0.25;

  explicit TiltSmoother(double alpha = kDefaultAlpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("smoothing alpha must lie in (0, 1]");
  }

  TiltAngles smooth(TiltAngles raw) {
    raw = clamp_tilt(raw);
    if (!initialized_) {
      state_ = raw;
      initialized_ = true;
    } else {
      state_.pitch_deg = alpha_ * raw.pitch_deg + (1.0 - alpha_) * state_.pitch_deg;
      state_.roll_deg = alpha_ * raw.roll_deg + (1.0 - alpha_) * state_.roll_deg;
      state_ = {std::clamp(state_.pitch_deg, -kMaxTiltDeg, kMaxTiltDeg),
                std::clamp(state_.roll_deg, -kMaxTiltDeg, kMaxTiltDeg)};
    }
    return state_;
  }

  void reset() noexcept { initialized_ = false; }

  double alpha() const noexcept { return alpha_; }
  bool initialized() const noexcept { return initialized_; }
  TiltAngles current() const noexcept { return state_; }

 private:
  double alpha_;
  bool initialized_ = false;
  TiltAngles state_{};
};

}  // namespace mixlevels
