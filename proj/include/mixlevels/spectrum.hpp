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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "mixlevels/errors.hpp"

namespace mixlevels {

/// Usable small-speaker band used for stem verification, in Hz.
inline constexpr double kBandLowHz = 180.0;
inline constexpr double kBandHighHz = 3200.0;
inline constexpr double kRequiredBandFraction = 0.95;

namespace detail {

// FFTW's planner is not reentrant; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanDeleter {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDeleter>;

/// Real-to-complex and complex-to-real transforms of one fixed length.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        spec_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (n == 0) throw DomainError("transform length must be positive");
    std::lock_guard lock(fftw_planner_mutex());
    const int len = static_cast<int>(n);
    forward_.reset(fftw_plan_dft_r2c_1d(len, real_.get(), spec_.get(), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(len, spec_.get(), real_.get(), FFTW_ESTIMATE));
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  std::span<double> time() noexcept { return {real_.get(), n_}; }
  std::span<fftw_complex> freq() noexcept { return {spec_.get(), bins()}; }

  void forward() noexcept { fftw_execute(forward_.get()); }
  /// Unnormalized: the result is scaled by size().
  void inverse() noexcept { fftw_execute(inverse_.get()); }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  FftwPlan forward_;
  FftwPlan inverse_;
};

}  // namespace detail

/// One-sided power spectrum of the whole buffer (rectangular window, length
/// = buffer length). Entry k is the energy at k * sample_rate / n Hz; interior
/// bins are doubled so the entries sum to n * sum(x^2) by Parseval.
template <typename T>
std::vector<double> power_spectrum(std::span<const T> buffer) {
  if (buffer.empty()) throw DomainError("power_spectrum: empty buffer");
  detail::RealFft fft(buffer.size());
  auto t = fft.time();
  for (std::size_t i = 0; i < buffer.size(); ++i) t[i] = static_cast<double>(buffer[i]);
  fft.forward();

  const std::size_t n = buffer.size();
  auto f = fft.freq();
  std::vector<double> power(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double p = f[k][0] * f[k][0] + f[k][1] * f[k][1];
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    power[k] = unpaired ? p : 2.0 * p;
  }
  return power;
}

/// Fraction of spectral energy whose frequency lies in [low_hz, high_hz].
/// A silent buffer has no in-band energy and yields 0.
template <typename T>
double band_energy_fraction(std::span<const T> buffer, double sample_rate_hz,
                            double low_hz = kBandLowHz, double high_hz = kBandHighHz) {
  if (buffer.empty()) throw DomainError("band_energy_fraction: empty buffer");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  const auto power = power_spectrum(buffer);
  const double bin_hz = sample_rate_hz / static_cast<double>(buffer.size());
  double in_band = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double hz = static_cast<double>(k) * bin_hz;
    total += power[k];
    if (hz >= low_hz && hz <= high_hz) in_band += power[k];
  }
  return total > 0.0 ? in_band / total : 0.0;
}

/// Edges of a band-pass with raised-cosine skirts, in Hz.
struct BandShape {
  double low_stop_hz = kBandLowHz;
  double low_pass_hz = 220.0;
  double high_pass_hz = 2800.0;
  double high_stop_hz = kBandHighHz;

  double response(double hz) const noexcept {
    if (hz <= low_stop_hz || hz >= high_stop_hz) return 0.0;
    if (hz >= low_pass_hz && hz <= high_pass_hz) return 1.0;
    const double u = hz < low_pass_hz ? (hz - low_stop_hz) / (low_pass_hz - low_stop_hz)
                                      : (high_stop_hz - hz) / (high_stop_hz - high_pass_hz);
    return 0.5 - 0.5 * std::cos(std::numbers::pi * u);
  }
};

/// Zero-phase band-pass of a periodic signal: the buffer is treated as one
/// period, so the result still loops seamlessly.
inline void circular_band_limit(std::span<double> buffer, double sample_rate_hz,
                                const BandShape& shape = {}) {
  if (buffer.empty()) throw DomainError("circular_band_limit: empty buffer");
  detail::RealFft fft(buffer.size());
  std::copy(buffer.begin(), buffer.end(), fft.time().begin());
  fft.forward();
  const double bin_hz = sample_rate_hz / static_cast<double>(buffer.size());
  auto f = fft.freq();
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double g = shape.response(static_cast<double>(k) * bin_hz);
    f[k][0] *= g;
    f[k][1] *= g;
  }
  fft.inverse();
  const double scale = 1.0 / static_cast<double>(buffer.size());
  auto t = fft.time();
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = t[i] * scale;
}

}  // namespace mixlevels
