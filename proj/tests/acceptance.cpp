// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mixlevels.hpp"
#include "run_command.hpp"

using namespace mixlevels;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const StemBank> default_bank() {
  static const auto bank = std::make_shared<const StemBank>(generate_stems({42, 48000, 120.0}));
  return bank;
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Envelope law on a 0.1 deg grid.
Verdict envelope_law() {
  const auto t0 = Clock::now();
  const MixConfig cfg;
  std::size_t violations = 0;
  double worst_mirror = 0.0;
  for (auto id : kContinuousInstruments) {
    const auto& env = cfg.envelope(id);
    double prev = -1.0;
    // Walk in the favored direction so the sequence must be non-decreasing.
    for (int i = -900; i <= 900; ++i) {
      const double favored = i / 10.0;
      const double g = axis_gain(favored * env.orientation, env);
      if (g < prev) ++violations;
      prev = g;
      if (std::abs(favored) <= env.plateau_half_width_deg && g != env.plateau_gain) ++violations;
    }
    if (axis_gain(-90.0 * env.orientation, env) != 0.0) ++violations;
    if (axis_gain(90.0 * env.orientation, env) != env.max_gain) ++violations;
  }
  for (int i = -900; i <= 900; ++i) {
    const double a = i / 10.0;
    worst_mirror = std::max(worst_mirror, std::abs(axis_gain(a, cfg.keyboard) - axis_gain(-a, cfg.piano)));
    worst_mirror = std::max(worst_mirror, std::abs(axis_gain(a, cfg.guitar) - axis_gain(-a, cfg.drums)));
  }
  const double elapsed = seconds_since(t0);
  return {violations == 0 && worst_mirror <= 1e-12 && elapsed < 1.0,
          fmt("violations=%zu mirror_err=%.1e runtime=%.3fs (<1s)", violations, worst_mirror, elapsed)};
}

// 2. Gate geometry, hysteresis off, 0.01 deg grid over [-2, 2]^2.
Verdict gate_geometry() {
  const auto t0 = Clock::now();
  GateConfig gate;
  gate.hysteresis_deg = 0.0;
  std::size_t mismatches = 0, points = 0, inside = 0;
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const double p = i / 100.0, r = j / 100.0;
      const bool expected = p >= -1.0 && p <= 1.0 && r >= -1.0 && r <= 1.0;
      for (bool was_on : {false, true}) {
        if (synth_gate({p, r}, gate, was_on) != expected) ++mismatches;
      }
      inside += expected;
      ++points;
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && inside == 201u * 201u && elapsed < 5.0,
          fmt("points=%zu inside=%zu mismatches=%zu runtime=%.3fs (<5s)", points, inside, mismatches, elapsed)};
}

// 3. Level balance: per-track solo contributions of a full loop at (0, 0).
Verdict level_balance() {
  const auto bank = default_bank();
  const double loop_s = static_cast<double>(bank->loop_samples()) / bank->sample_rate_hz;
  std::array<double, kInstrumentCount> level_db{};
  for (auto id : kInstruments) {
    RenderSettings s;
    s.engine = s.engine.solo(id);
    const auto out = render_trajectory(bank, TiltTrajectory::constant({0.0, 0.0}), s, loop_s);
    level_db[index(id)] = to_db(rms(std::span<const float>(out)));
  }
  double spread = 0.0;
  for (double a : level_db) {
    for (double b : level_db) spread = std::max(spread, std::abs(a - b));
  }
  return {spread <= 0.5, fmt("solo rms dBFS piano %.3f keyboard %.3f guitar %.3f drums %.3f synth %.3f; spread %.3f dB "
                             "(<=0.5)",
                             level_db[0], level_db[1], level_db[2], level_db[3], level_db[4], spread)};
}

// 4. Spectral constraint.
Verdict spectral_constraint() {
  const auto t0 = Clock::now();
  const auto bank = generate_stems({42, 48000, 120.0});
  double worst = 1.0;
  for (auto id : kInstruments) worst = std::min(worst, verify_band(bank.stem(id), bank.sample_rate_hz));
  std::vector<float> tone(bank.loop_samples());
  for (std::size_t i = 0; i < tone.size(); ++i) {
    tone[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * 100.0 * i / bank.sample_rate_hz));
  }
  const double control = verify_band(tone, bank.sample_rate_hz);
  const double elapsed = seconds_since(t0);
  return {worst >= 0.95 && control < 0.95 && elapsed < 10.0,
          fmt("worst stem in-band %.6f (>=0.95), 100 Hz tone %.6f (fails), runtime=%.2fs (<10s)", worst, control,
              elapsed)};
}

// 5. Click-free ramping.
Verdict click_free() {
  const auto bank = default_bank();
  const std::size_t half = 48000;
  Engine steady(bank);
  steady.reset_gains(GainVector::uniform(1.0));
  const auto base = steady.render_block(2 * half);
  const double base_step = max_step(std::span<const float>(base));

  Engine stepped(bank);
  stepped.reset_gains(GainVector::uniform(0.0));
  std::vector<float> out(2 * half);
  stepped.render(std::span<float>(out).first(half));
  stepped.set_gains(GainVector::uniform(1.0));
  stepped.render(std::span<float>(out).last(half));
  const double step_jump = max_step(std::span<const float>(out));

  Engine timing(bank);
  timing.reset_gains(GainVector::uniform(0.0));
  timing.set_gains(GainVector::uniform(1.0));
  const std::size_t ramp = timing.ramp_samples();
  timing.render_block(ramp - 1);
  const bool short_of_target = timing.current_gains()[Instrument::Piano] < 1.0;
  timing.render_block(1);
  const bool on_target = timing.current_gains() == GainVector::uniform(1.0);

  return {step_jump <= 3.0 * base_step && short_of_target && on_target && ramp == 960,
          fmt("max jump %.5f vs baseline %.5f (ratio %.2f <= 3); target reached at sample %zu exactly", step_jump,
              base_step, step_jump / base_step, ramp)};
}

// 6. Determinism of the CLI render and of stem generation.
Verdict determinism() {
  const auto dir = fs::temp_directory_path() / "mixlevels_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "traj.csv") << "time_s,pitch_deg,roll_deg\n0,0,-90\n2,3,0.5\n4,-40,60\n";
  const std::string base = mixlevels::testing::cli() + " render " + (dir / "traj.csv").string() + " ";
  const auto a = mixlevels::testing::run_command(base + (dir / "a.wav").string() + " --seed 42");
  const auto b = mixlevels::testing::run_command(base + (dir / "b.wav").string() + " --seed 42");
  bool ok = a.exit_code == 0 && b.exit_code == 0;
  std::uint64_t ha = 0, hb = 0;
  if (ok) {
    ha = fnv1a(read_file(dir / "a.wav"));
    hb = fnv1a(read_file(dir / "b.wav"));
  }
  fs::remove_all(dir);

  const auto s1 = generate_stems({42, 48000, 120.0});
  const auto s2 = generate_stems({42, 48000, 120.0});
  bool stems_equal = true;
  for (auto id : kInstruments) stems_equal = stems_equal && s1.stems[index(id)] == s2.stems[index(id)];
  return {ok && ha == hb && stems_equal,
          fmt("render exit %d/%d, fnv1a %016llx vs %016llx; stems bit-identical: %s", a.exit_code, b.exit_code,
              static_cast<unsigned long long>(ha), static_cast<unsigned long long>(hb), stems_equal ? "yes" : "no")};
}

// 7. Trajectory semantics.
Verdict trajectory_semantics() {
  const auto bank = default_bank();
  const TiltTrajectory sweep({{0.0, {0.0, -90.0}}, {8.0, {0.0, 90.0}}});
  const std::size_t window = bank->sample_rate_hz / 2;

  auto solo = [&](Instrument id) {
    RenderSettings s;
    s.engine = s.engine.solo(id);
    return render_trajectory(bank, sweep, s, 8.0);
  };
  const auto piano = solo(Instrument::Piano);
  const auto keyboard = solo(Instrument::Keyboard);
  auto window_db = [&](const std::vector<float>& x, bool early) {
    const auto s = std::span<const float>(x);
    return to_db(rms(early ? s.first(window) : s.last(window)));
  };
  const double early_sep = window_db(keyboard, true) - window_db(piano, true);
  const double late_sep = window_db(piano, false) - window_db(keyboard, false);

  const auto plus = render_trajectory(bank, TiltTrajectory::constant({0.0, 0.5}), {}, 4.0);
  const auto minus = render_trajectory(bank, TiltTrajectory::constant({0.0, -0.5}), {}, 4.0);
  const bool plateau_identical = plus == minus;

  return {early_sep >= 12.0 && late_sep >= 12.0 && plateau_identical,
          fmt("first 0.5 s keyboard-piano %.1f dB, last 0.5 s piano-keyboard %.1f dB (>=12); (0,+-0.5) "
              "bit-identical: %s",
              early_sep, late_sep, plateau_identical ? "yes" : "no")};
}

// 8. Service replay of a recorded 600-message script.
Verdict service_replay() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> hand(0.0, 4.0);
  std::vector<std::string> script;
  double pitch = 20.0, roll = -35.0;
  for (int i = 0; i < 600; ++i) {
    pitch = 0.97 * pitch + 0.3 * hand(rng);
    roll = 0.97 * roll + 0.3 * hand(rng);
    if (i % 10 == 9) {
      const double p = pitch * std::numbers::pi / 180.0, r = roll * std::numbers::pi / 180.0;
      script.push_back(nlohmann::json{{"type", "accel"},
                                      {"ax", std::cos(p) * std::sin(r)},
                                      {"ay", -std::sin(p)},
                                      {"az", std::cos(p) * std::cos(r)}}
                           .dump());
    } else {
      script.push_back(nlohmann::json{{"type", "tilt"}, {"pitch_deg", pitch}, {"roll_deg", roll}}.dump());
    }
  }

  SessionRegistry registry;
  auto play = [&](std::vector<std::string>& out) {
    const auto id = registry.open();
    const auto t0 = Clock::now();
    for (const auto& m : script) out.push_back(registry.handle_text(id, m));
    const double mean_ms = 1e3 * seconds_since(t0) / static_cast<double>(script.size());
    registry.close(id);
    return mean_ms;
  };
  std::vector<std::string> recorded, replayed;
  play(recorded);
  const double mean_ms = play(replayed);

  std::size_t gains = 0;
  bool seq_ok = true;
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    const auto j = nlohmann::json::parse(replayed[i]);
    if (j["type"] == "gains") seq_ok = seq_ok && j["seq"] == ++gains;
  }
  const bool identical = recorded == replayed;
  return {identical && seq_ok && gains == script.size() && mean_ms < 5.0,
          fmt("600 messages, %zu gains frames, identical stream: %s, seq monotone: %s, mean latency %.4f ms (<5)", gains,
              identical ? "yes" : "no", seq_ok ? "yes" : "no", mean_ms)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1 envelope law", envelope_law},
      {"AC2 gate geometry", gate_geometry},
      {"AC3 level balance", level_balance},
      {"AC4 spectral constraint", spectral_constraint},
      {"AC5 click-free ramping", click_free},
      {"AC6 determinism", determinism},
      {"AC7 trajectory semantics", trajectory_semantics},
      {"AC8 service replay", service_replay},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %-26s %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
