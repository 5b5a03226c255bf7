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

// mixlevels: offline rendering, stem export, spectral analysis and the live
// control server.
//
// Exit codes: 0 ok, 1 constraint failed, 2 bad input, 3 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mixlevels.hpp"
#include "mixlevels/server.hpp"

namespace fs = std::filesystem;
using namespace mixlevels;

namespace {

enum Exit : int { kOk = 0, kConstraintFailed = 1, kBadInput = 2, kIoError = 3 };

struct SharedFlags {
  std::string config;
  std::uint64_t seed = 42;
  int sample_rate_hz = 48000;
  double bpm = 120.0;

  StemParams stem_params() const { return {seed, sample_rate_hz, bpm}; }
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config, "Settings file (key = value); defaults if absent");
  cmd->add_option("--seed", f.seed, "Stem generator seed")->capture_default_str();
  cmd->add_option("--sample-rate", f.sample_rate_hz, "44100 or 48000")->capture_default_str();
  cmd->add_option("--bpm", f.bpm, "Loop tempo, 60..200")->capture_default_str();
}

std::shared_ptr<const StemBank> bank_for(const SharedFlags& flags, const std::string& stems_dir) {
  if (stems_dir.empty()) return std::make_shared<const StemBank>(generate_stems(flags.stem_params()));
  auto bank = load_stems(stems_dir);
  for (auto id : kInstruments) {
    const double frac = verify_band(bank.stem(id), bank.sample_rate_hz);
    if (frac < kRequiredBandFraction) {
      std::fprintf(stderr, "warning: %s stem has only %.1f%% of its energy in %g-%g Hz\n",
                   std::string(name(id)).c_str(), 100.0 * frac, kBandLowHz, kBandHighHz);
    }
  }
  return std::make_shared<const StemBank>(std::move(bank));
}

int cmd_render(const SharedFlags& flags, const std::string& csv, const std::string& out_wav,
               std::optional<double> duration, const std::string& stems_dir) {
  const auto settings = load_settings(flags.config);
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv);
  const auto traj = parse_trajectory_csv(in);
  const auto bank = bank_for(flags, stems_dir);

  double seconds = duration.value_or(traj.end_time());
  if (!duration && seconds <= 0.0) {
    seconds = static_cast<double>(bank->loop_samples()) / bank->sample_rate_hz;
  }
  const auto result = render_trajectory_detailed(bank, traj, {settings.mix, settings.engine}, seconds);
  write_wav(result.samples, bank->sample_rate_hz, out_wav);

  std::printf("wrote %s\n", out_wav.c_str());
  std::printf("duration   %.3f s (%zu samples @ %d Hz, mono)\n",
              static_cast<double>(result.samples.size()) / bank->sample_rate_hz, result.samples.size(),
              bank->sample_rate_hz);
  std::printf("peak       %.6f (%.2f dBFS)\n", peak(std::span<const float>(result.samples)),
              to_db(peak(std::span<const float>(result.samples))));
  std::printf("final gate %s\n", result.final_gate_on ? "on" : "off");
  for (auto id : kInstruments) {
    const double g = result.final_gains[id];
    const double level = g * rms(bank->stem(id)) * settings.engine.master_gain;
    std::printf("  %-8s gain %.4f  rms %7.2f dBFS\n", std::string(name(id)).c_str(), g, to_db(level));
  }
  return kOk;
}

int cmd_stems(const SharedFlags& flags, const std::string& out_dir) {
  const auto bank = generate_stems(flags.stem_params());
  const auto manifest = export_stems(bank, out_dir);
  std::printf("wrote %zu stems to %s (seed %llu, %g bpm, %d Hz, %zu samples)\n", manifest.stems.size(),
              out_dir.c_str(), static_cast<unsigned long long>(manifest.seed), manifest.bpm,
              manifest.sample_rate_hz, manifest.loop_samples);
  bool ok = true;
  for (const auto& s : manifest.stems) {
    std::printf("  %-13s rms %7.2f dBFS  peak %.4f  in-band %.4f\n", s.file.c_str(), s.rms_dbfs, s.peak,
                s.band_fraction);
    ok = ok && s.band_fraction >= kRequiredBandFraction;
  }
  return ok ? kOk : kConstraintFailed;
}

int cmd_analyze(const std::string& target) {
  std::vector<fs::path> files;
  if (fs::is_directory(target)) {
    for (const auto& entry : fs::directory_iterator(target)) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .wav files in " + target);
  } else {
    files.emplace_back(target);
  }

  bool ok = true;
  for (const auto& f : files) {
    const auto wav = read_wav(f);
    if (wav.samples.empty()) throw IoError(f.string() + ": no samples");
    const std::span<const float> s(wav.samples);
    const double frac = verify_band(s, wav.sample_rate_hz);
    const bool pass = frac >= kRequiredBandFraction;
    ok = ok && pass;
    std::printf("%-40s in-band %.4f  rms %7.2f dBFS  peak %.4f  %s\n", f.filename().string().c_str(), frac,
                to_db(rms(s)), peak(s), pass ? "ok" : "FAIL");
  }
  return ok ? kOk : kConstraintFailed;
}

int cmd_serve(const SharedFlags& flags, unsigned short port, const std::string& address,
              const std::string& stems_dir, const std::string& static_dir, int threads) {
  ServerOptions options;
  options.address = address;
  options.port = port;
  options.settings = load_settings(flags.config);
  options.static_dir = static_dir;
  options.threads = threads;
  options.stem_files = stems_dir.empty() ? encode_bank(generate_stems(flags.stem_params())) : read_stem_dir(stems_dir);

  Server server(std::move(options));
  std::printf("mixlevels serving on http://%s:%u  (control channel: ws://%s:%u/ws)\n", address.c_str(),
              server.port(), address.c_str(), server.port());
  std::fflush(stdout);
  server.run_until_signal();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tilt-controlled five-stem loop mixer"};
  app.require_subcommand(1, 1);

  SharedFlags flags;

  auto* render = app.add_subcommand("render", "Render a tilt trajectory CSV to a mono float WAV");
  std::string csv, out_wav, render_stems;
  std::optional<double> duration;
  render->add_option("trajectory", csv, "CSV with header time_s,pitch_deg,roll_deg")->required();
  render->add_option("output", out_wav, "Output WAV path")->required();
  render->add_option("--duration", duration, "Seconds to render (default: last trajectory time)");
  render->add_option("--stems", render_stems, "Use an exported stem directory instead of generating");
  add_shared(render, flags);

  auto* stems = app.add_subcommand("stems", "Generate the stem bank and export WAVs + manifest");
  std::string stems_out;
  stems->add_option("output_dir", stems_out, "Directory to write into")->required();
  add_shared(stems, flags);

  auto* analyze = app.add_subcommand("analyze", "Report in-band energy, RMS and peak of WAV files");
  std::string analyze_target;
  analyze->add_option("path", analyze_target, "A WAV file or a directory of them")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket control server");
  unsigned short port = 8080;
  std::string address = "0.0.0.0", serve_stems, static_dir;
  int threads = 2;
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--address", address, "Bind address")->capture_default_str();
  serve->add_option("--stems", serve_stems, "Serve an exported stem directory");
  serve->add_option("--static", static_dir, "Directory of UI assets served at /");
  serve->add_option("--threads", threads, "I/O threads")->capture_default_str();
  add_shared(serve, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*render) return cmd_render(flags, csv, out_wav, duration, render_stems);
    if (*stems) return cmd_stems(flags, stems_out);
    if (*analyze) return cmd_analyze(analyze_target);
    if (*serve) return cmd_serve(flags, port, address, serve_stems, static_dir, threads);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  } catch (const std::invalid_argument& e) {  // ConfigError
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::domain_error& e) {  // DomainError
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  }
  return kBadInput;
}
