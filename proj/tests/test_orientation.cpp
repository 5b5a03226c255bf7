#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mixlevels/orientation.hpp"

using namespace mixlevels;
using Catch::Approx;

TEST_CASE("accel_to_tilt examples", "[orientation]") {
  auto flat = accel_to_tilt({0.0, 0.0, 1.0});
  CHECK(flat.pitch_deg == 0.0);
  CHECK(flat.roll_deg == 0.0);

  const double s45 = std::sin(std::numbers::pi / 4), c45 = std::cos(std::numbers::pi / 4);
  auto right = accel_to_tilt({s45, 0.0, c45});
  CHECK(right.pitch_deg == Approx(0.0).margin(1e-12));
  CHECK(right.roll_deg == Approx(45.0).margin(1e-12));

  // Frozen from a 40-digit mpmath evaluation of the same trigonometry.
  auto t = accel_to_tilt({0.1, 0.2, 0.97});
  CHECK(t.pitch_deg == Approx(-11.590544426108218).margin(0.01));
  CHECK(t.roll_deg == Approx(5.885987833028266).margin(0.01));
  CHECK(t.pitch_deg == Approx(-11.590544426108218).margin(1e-9));
}

TEST_CASE("accel sign conventions", "[orientation]") {
  // Top edge tipped away: gravity picks up a -y component.
  CHECK(accel_to_tilt({0.0, -0.3, 0.95}).pitch_deg > 0.0);
  // Right edge down: gravity picks up a +x component.
  CHECK(accel_to_tilt({0.3, 0.0, 0.95}).roll_deg > 0.0);
}

TEST_CASE("out-of-band samples are rejected", "[orientation]") {
  CHECK_THROWS_AS(accel_to_tilt({0.0, 0.0, 0.1}), SampleRejected);
  CHECK_THROWS_AS(accel_to_tilt({2.0, 2.0, 2.0}), SampleRejected);
  CHECK_THROWS_AS(accel_to_tilt({0.0, 0.0, std::nan("")}), SampleRejected);
  CHECK_NOTHROW(accel_to_tilt({0.0, 0.0, 0.3}));
  CHECK_NOTHROW(accel_to_tilt({0.0, 0.0, 3.0}));
}

TEST_CASE("accel_to_tilt is scale invariant", "[orientation][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  for (int i = 0; i < 2000; ++i) {
    AccelSample s{comp(rng), comp(rng), comp(rng)};
    const double m = s.magnitude();
    if (m < 1e-3) continue;
    s = {s.ax / m, s.ay / m, s.az / m};
    const double k = scale(rng);
    const auto a = accel_to_tilt(s);
    const auto b = accel_to_tilt({k * s.ax, k * s.ay, k * s.az});
    CHECK(b.pitch_deg == Approx(a.pitch_deg).margin(1e-9));
    CHECK(b.roll_deg == Approx(a.roll_deg).margin(1e-9));
    CHECK(std::abs(a.pitch_deg) <= 90.0);
    CHECK(std::abs(a.roll_deg) <= 90.0);
  }
}

TEST_CASE("smoother examples", "[orientation]") {
  TiltSmoother identity(1.0);
  identity.smooth({-20.0, 50.0});
  CHECK(identity.smooth({3.0, 4.0}) == TiltAngles{3.0, 4.0});

  TiltSmoother half(0.5);
  half.smooth({0.0, 0.0});
  CHECK(half.smooth({10.0, -10.0}) == TiltAngles{5.0, -5.0});

  TiltSmoother first(0.2);
  CHECK(first.smooth({7.0, 7.0}) == TiltAngles{7.0, 7.0});

  CHECK_THROWS_AS(TiltSmoother(0.0), ConfigError);
  CHECK_THROWS_AS(TiltSmoother(1.5), ConfigError);
}

TEST_CASE("smoother converges geometrically and stays in the hull", "[orientation][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-90.0, 90.0);
  std::uniform_real_distribution<double> alpha(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = alpha(rng);
    TiltSmoother sm(a);
    const TiltAngles start{angle(rng), angle(rng)};
    const TiltAngles target{angle(rng), angle(rng)};
    sm.smooth(start);
    double lo = std::min(start.pitch_deg, target.pitch_deg), hi = std::max(start.pitch_deg, target.pitch_deg);
    for (int n = 1; n <= 40; ++n) {
      const auto out = sm.smooth(target);
      const double bound = std::pow(1.0 - a, n) * std::abs(start.pitch_deg - target.pitch_deg);
      CHECK(std::abs(out.pitch_deg - target.pitch_deg) <= bound + 1e-9);
      CHECK(out.pitch_deg >= lo - 1e-12);
      CHECK(out.pitch_deg <= hi + 1e-12);
    }
  }
}

TEST_CASE("smoother clamps raw input", "[orientation]") {
  TiltSmoother sm(0.5);
  CHECK(sm.smooth({200.0, -200.0}) == TiltAngles{90.0, -90.0});
  CHECK_THROWS_AS(sm.smooth({INFINITY, 0.0}), DomainError);
}
