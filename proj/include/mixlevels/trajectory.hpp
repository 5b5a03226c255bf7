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
#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mixlevels/engine.hpp"
#include "mixlevels/errors.hpp"
#include "mixlevels/gainmap.hpp"
#include "mixlevels/stems.hpp"

namespace mixlevels {

struct TrajectoryPoint {
  double time_s = 0.0;
  TiltAngles tilt;
};

/// Tilt over time. Linear between points, held after the last one.
class TiltTrajectory {
 public:
  TiltTrajectory() = default;
  explicit TiltTrajectory(std::vector<TrajectoryPoint> points) : points_(std::move(points)) { validate(); }

  static TiltTrajectory constant(TiltAngles tilt) { return TiltTrajectory({{0.0, tilt}}); }

  void validate() const {
    if (points_.empty()) throw DomainError("trajectory: no points");
    if (points_.front().time_s != 0.0) throw DomainError("trajectory: first time must be 0");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (!std::isfinite(p.time_s) || !std::isfinite(p.tilt.pitch_deg) || !std::isfinite(p.tilt.roll_deg)) {
        throw DomainError("trajectory: values must be finite");
      }
      if (i > 0 && !(p.time_s > points_[i - 1].time_s)) {
        throw DomainError("trajectory: times must be strictly increasing");
      }
    }
  }

  const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }
  double end_time() const noexcept { return points_.empty() ? 0.0 : points_.back().time_s; }

  TiltAngles at(double t) const {
    if (points_.empty()) throw DomainError("trajectory: no points");
    if (t <= points_.front().time_s) return points_.front().tilt;
    if (t >= points_.back().time_s) return points_.back().tilt;
    const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double v, const TrajectoryPoint& p) { return v < p.time_s; });
    const auto lo = hi - 1;
    const double u = (t - lo->time_s) / (hi->time_s - lo->time_s);
    return {lo->tilt.pitch_deg + u * (hi->tilt.pitch_deg - lo->tilt.pitch_deg),
            lo->tilt.roll_deg + u * (hi->tilt.roll_deg - lo->tilt.roll_deg)};
  }

 private:
  std::vector<TrajectoryPoint> points_;
};

inline constexpr std::string_view kTrajectoryCsvHeader = "time_s,pitch_deg,roll_deg";

namespace detail {

inline double parse_csv_number(std::string_view field, std::size_t line) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line, "not a number: '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads `time_s,pitch_deg,roll_deg` CSV. Blank lines are skipped; a
/// trailing CR is tolerated. Errors carry the 1-based line number.
inline TiltTrajectory parse_trajectory_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<TrajectoryPoint> points;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kTrajectoryCsvHeader) {
        throw ParseError(lineno, "expected header '" + std::string(kTrajectoryCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    std::string_view rest(line);
    double fields[3];
    for (int f = 0; f < 3; ++f) {
      const auto comma = rest.find(',');
      if ((f < 2) != (comma != std::string_view::npos)) throw ParseError(lineno, "expected 3 fields");
      fields[f] = detail::parse_csv_number(rest.substr(0, comma), lineno);
      rest = f < 2 ? rest.substr(comma + 1) : std::string_view{};
    }
    if (!std::isfinite(fields[0]) || !std::isfinite(fields[1]) || !std::isfinite(fields[2])) {
      throw ParseError(lineno, "values must be finite");
    }
    if (points.empty() ? fields[0] != 0.0 : !(fields[0] > points.back().time_s)) {
      throw ParseError(lineno, points.empty() ? "first time must be 0" : "times must be strictly increasing");
    }
    points.push_back({fields[0], {fields[1], fields[2]}});
  }
  if (!header_seen) throw ParseError(lineno == 0 ? 1 : lineno, "missing header");
  if (points.empty()) throw ParseError(lineno, "no trajectory points");
  return TiltTrajectory(std::move(points));
}

inline void write_trajectory_csv(std::ostream& out, const TiltTrajectory& traj) {
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& p : traj.points()) {
    out << p.time_s << ',' << p.tilt.pitch_deg << ',' << p.tilt.roll_deg << '\n';
  }
}

struct RenderSettings {
  MixConfig mix;
  EngineConfig engine;
};

struct TrajectoryRender {
  std::vector<float> samples;
  /// Gains targeted by the last control tick.
  GainVector final_gains;
  bool final_gate_on = false;
};

/// Offline render of a tilt trajectory. Gains are recomputed at the control
/// rate from the interpolated tilt and ramped in between; the result is a
/// pure function of the inputs.
inline TrajectoryRender render_trajectory_detailed(std::shared_ptr<const StemBank> bank,
                                                   const TiltTrajectory& traj, const RenderSettings& settings,
                                                   double duration_s) {
  traj.validate();
  settings.mix.validate();
  if (!bank) throw NotReady("render_trajectory: no stem bank");
  if (!(std::isfinite(duration_s) && duration_s > 0.0)) throw DomainError("duration must be positive");
  if (duration_s < traj.end_time()) throw DomainError("duration is shorter than the trajectory");

  Engine engine(bank, settings.engine);
  const double sr = bank->sample_rate_hz;
  const auto total = static_cast<std::size_t>(std::llround(duration_s * sr));
  const auto period = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(sr / settings.engine.control_rate_hz)));

  TrajectoryRender result;
  result.samples.resize(total);
  bool gate = false;
  for (std::size_t start = 0, tick = 0; start < total; start += period, ++tick) {
    const auto update = compute_gains(traj.at(static_cast<double>(start) / sr), settings.mix, gate);
    gate = update.gate_on;
    if (tick == 0) {
      engine.reset_gains(update.gains);
    } else {
      engine.set_gains(update.gains);
    }
    engine.render(std::span<float>(result.samples).subspan(start, std::min(period, total - start)));
    result.final_gains = update.gains;
  }
  result.final_gate_on = gate;
  return result;
}

inline std::vector<float> render_trajectory(std::shared_ptr<const StemBank> bank, const TiltTrajectory& traj,
                                            const RenderSettings& settings, double duration_s) {
  return render_trajectory_detailed(std::move(bank), traj, settings, duration_s).samples;
}

}  // namespace mixlevels
