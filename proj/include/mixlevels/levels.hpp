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
#include <limits>
#include <span>

namespace mixlevels {

template <typename T>
double rms(std::span<const T> x) noexcept {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (auto v : x) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

template <typename T>
double peak(std::span<const T> x) noexcept {
  double p = 0.0;
  for (auto v : x) p = std::max(p, std::abs(static_cast<double>(v)));
  return p;
}

/// Largest |x[i] - x[i-1]| over the buffer (non-circular).
template <typename T>
double max_step(std::span<const T> x) noexcept {
  double m = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(x[i]) - static_cast<double>(x[i - 1])));
  }
  return m;
}

inline double to_db(double amplitude) noexcept {
  return amplitude > 0.0 ? 20.0 * std::log10(amplitude) : -std::numeric_limits<double>::infinity();
}

inline double from_db(double db) noexcept { return std::pow(10.0, db / 20.0); }

}  // namespace mixlevels
