// SPDX-License-Identifier: Apache-2.0
//
// isac-clutter: subspace clutter removal and OFDM radar simulation
// Copyright (C) 2026 The isac-clutter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command line front end: acquire, calibrate, sense, simulate, track.
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include "isac/harness.hpp"
#include "isac/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

isac::ExperimentConfig config_or_desk(const std::string& path)
{
    return path.empty() ? isac::ExperimentConfig::desk_preset() : isac::load_config(path);
}

int cmd_acquire(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
                std::optional<double> noise_dbm, const std::string& runtime_out)
{
    isac::ExperimentConfig cfg = isac::load_config(config_path);
    if (seed) cfg.seed = *seed;
    const double noise = noise_dbm ? *noise_dbm : cfg.noise_dbm.front();
    isac::Rng rng = isac::derive_rng(cfg.seed, 0x61637175ULL, 0);
    const isac::Scene scene = isac::generate_scenario(cfg.scenario, cfg.rf, rng);
    const isac::NoiseSpec noise_spec = isac::NoiseSpec::from_dbm(noise, cfg.rf);
    const isac::ClutterSnapshots snaps = isac::acquire_snapshots(
        cfg.rf, scene.clutter, noise_spec, cfg.scenario.n_snapshots, cfg.scenario.clutter_phase_jitter_rad, rng);
    isac::io::save_snapshots(out, snaps);

    std::cout << "role,range_m,velocity_mps,amplitude\n";
    for (const auto& c : scene.clutter) {
        std::cout << "clutter," << c.range_m << ',' << c.velocity_mps << ',' << std::abs(c.coeff) << '\n';
    }
    if (!runtime_out.empty()) {
        std::vector<isac::Scatterer> objects =
            isac::jittered(scene.clutter, cfg.scenario.clutter_phase_jitter_rad, rng);
        objects.push_back(scene.target);
        const isac::CsiFrame frame = isac::synthesize_csi(cfg.rf, objects, noise_spec, isac::draw_phase(rng), rng);
        isac::ClutterSnapshots one;
        one.n_rows = cfg.rf.rows();
        one.n_cols = cfg.rf.cols();
        one.c = isac::vectorize(frame.h).transpose().eval();
        isac::io::save_snapshots(runtime_out, one);
        std::cout << "target," << scene.target.range_m << ',' << scene.target.velocity_mps << ','
                  << std::abs(scene.target.coeff) << '\n';
    }
    std::cerr << "wrote " << snaps.count() << " snapshots of " << snaps.n_rows << "x" << snaps.n_cols << " to " << out
              << '\n';
    return kExitOk;
}

int cmd_calibrate(const std::string& in, const std::string& out, const std::string& order_text)
{
    const isac::ClutterSnapshots snaps = isac::io::load_snapshots(in);
    isac::OrderSpec order = isac::OrderSpec::automatic();
    if (order_text != "auto") {
        std::size_t used = 0;
        long value = -1;
        try {
            value = std::stol(order_text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != order_text.size() || value < 1) {
            throw isac::ConfigError("--order must be a positive integer or 'auto'");
        }
        order = isac::OrderSpec::explicit_order(value);
    }
    const isac::ClutterCalibration cal = isac::calibrate(snaps, isac::CalibrateOptions{order, true});
    isac::io::save_calibration(out, cal);
    std::cout << "order," << cal.order() << '\n'
              << "order_from_mdl," << int(cal.report.order_from_mdl) << '\n'
              << "pure_noise," << int(cal.report.pure_noise) << '\n'
              << "truncated," << int(cal.report.truncated) << '\n'
              << "snapshot_sha256," << isac::io::hex(cal.snapshot_hash) << '\n';
    return kExitOk;
}

int cmd_sense(const std::string& cal_path, const std::string& snap_path, const std::string& in,
              const std::string& remover_text, const std::string& config_path, const std::string& pgram_out,
              std::optional<double> p_fa_override)
{
    const isac::ExperimentConfig cfg = config_or_desk(config_path);
    const isac::Remover remover = isac::parse_remover(remover_text);
    const isac::ClutterSnapshots frames = isac::io::load_snapshots(in);
    if (frames.count() != 1) {
        throw isac::ConfigError("--in must hold exactly one frame");
    }
    if (frames.n_rows != cfg.rf.rows() || frames.n_cols != cfg.rf.cols()) {
        throw isac::ConfigError("frame dimensions do not match the RF configuration");
    }
    const isac::ComplexMatrix h = frames.frame(0);

    isac::ComplexMatrix cleaned;
    switch (remover) {
    case isac::Remover::None: cleaned = h; break;
    case isac::Remover::Subspace:
        if (cal_path.empty()) throw isac::ConfigError("--remover crap requires --cal");
        cleaned = isac::crap_remove(isac::io::load_calibration(cal_path), h);
        break;
    case isac::Remover::EcaC:
    case isac::Remover::EcaS: {
        if (snap_path.empty()) throw isac::ConfigError("--remover eca-c/eca-s requires --snapshots");
        const auto snaps = isac::io::load_snapshots(snap_path);
        const auto domain = remover == isac::Remover::EcaC ? isac::EcaCanceller::Domain::Subcarrier
                                                           : isac::EcaCanceller::Domain::Symbol;
        cleaned = isac::EcaCanceller(snaps, domain).remove(h);
        break;
    }
    }

    const isac::Periodogram pg = isac::periodogram(cleaned);
    const double p_fa = p_fa_override ? *p_fa_override : cfg.p_fa;
    const isac::CfarThreshold thr = isac::cfar_threshold(pg, p_fa);
    const isac::Detection det = isac::find_strongest(pg, thr.eta, cfg.rf, cfg.interpolation);
    if (!pgram_out.empty()) {
        isac::io::save_periodogram(pgram_out, pg);
    }
    std::cout << "detected,range_m,velocity_mps,peak_power,eta\n"
              << int(det.above_threshold) << ',' << det.range_m << ',' << det.velocity_mps << ',' << det.peak_power
              << ',' << thr.eta << '\n';
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out, const std::string& records_out,
                 std::optional<std::size_t> trials, std::optional<unsigned> threads, std::optional<std::uint64_t> seed,
                 bool quiet)
{
    isac::ExperimentConfig cfg = isac::load_config(config_path);
    if (trials) cfg.trials = *trials;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    std::function<void(std::size_t, std::size_t)> progress;
    if (!quiet) {
        progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\r%zu/%zu trials", done, total);
            if (done == total) std::fputc('\n', stderr);
        };
    }
    const isac::SweepResult result = isac::sweep(cfg, progress);
    isac::append_sweep_csv(out, result.rows);
    if (!records_out.empty()) {
        isac::append_trial_csv(records_out, result.records);
    }
    std::cout << isac::kSweepHeader << '\n';
    isac::write_sweep_rows(std::cout, result.rows);
    return kExitOk;
}

int cmd_track(const std::string& config_path, const std::string& trajectory_path, const std::string& out,
              const std::string& remover_text, std::optional<std::uint64_t> seed)
{
    isac::ExperimentConfig cfg = isac::load_config(config_path);
    if (!remover_text.empty()) cfg.tracker.remover = isac::parse_remover(remover_text);
    if (seed) cfg.seed = *seed;
    const auto trajectory = isac::load_trajectory(trajectory_path);
    const auto log = isac::replay_track(cfg, trajectory);
    isac::append_track_csv(out, log);
    std::size_t resets = 0;
    std::size_t detections = 0;
    for (const auto& row : log) {
        resets += row.reset ? 1 : 0;
        detections += std::isnan(row.r_meas) ? 0 : 1;
    }
    std::cout << "frames," << log.size() << "\ndetections," << detections << "\nresets," << resets << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OFDM sensing simulator with subspace clutter removal"};
    app.require_subcommand(1);

    std::string config_path, out, in, cal_path, snap_path, remover = "crap", order = "auto", pgram_out, records_out,
                                                             trajectory_path, runtime_out, track_remover;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_dbm, p_fa;
    std::optional<std::size_t> trials;
    std::optional<unsigned> threads;
    bool quiet = false;

    auto* acquire = app.add_subcommand("acquire", "record K clutter-only frames of a random scene");
    acquire->add_option("--config", config_path, "experiment configuration (INI)")->required();
    acquire->add_option("--out", out, "snapshot file to write")->required();
    acquire->add_option("--seed", seed, "scene and noise seed");
    acquire->add_option("--noise-dbm", noise_dbm, "total noise power (default: first sweep point)");
    acquire->add_option("--runtime", runtime_out, "also write one runtime frame (clutter + target)");

    auto* calibrate = app.add_subcommand("calibrate", "estimate the clutter subspace from snapshots");
    calibrate->add_option("--in", in, "snapshot file")->required();
    calibrate->add_option("--out", out, "calibration file to write")->required();
    calibrate->add_option("--order", order, "clutter order L or 'auto' (MDL)");

    auto* sense = app.add_subcommand("sense", "remove clutter from one frame and detect the strongest peak");
    sense->add_option("--in", in, "frame file (snapshot format, one frame)")->required();
    sense->add_option("--remover", remover, "none | crap | eca-c | eca-s");
    sense->add_option("--cal", cal_path, "calibration file (crap)");
    sense->add_option("--snapshots", snap_path, "snapshot file (eca-c, eca-s)");
    sense->add_option("--config", config_path, "RF configuration (default: desk preset)");
    sense->add_option("--dump-pgram", pgram_out, "write the periodogram (float32)");
    sense->add_option("--p-fa", p_fa, "false-alarm probability per frame");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep over noise power and removers");
    simulate->add_option("--config", config_path, "experiment configuration (INI)")->required();
    simulate->add_option("--out", out, "summary CSV (appended)")->required();
    simulate->add_option("--records", records_out, "per-trial CSV (appended)");
    simulate->add_option("--trials", trials, "override trials per point");
    simulate->add_option("--threads", threads, "worker threads (0: all cores)");
    simulate->add_option("--seed", seed, "override seed");
    simulate->add_flag("--quiet", quiet, "no progress output");

    auto* track = app.add_subcommand("track", "replay a target trajectory through detection and tracking");
    track->add_option("--config", config_path, "experiment configuration (INI)")->required();
    track->add_option("--trajectory", trajectory_path, "CSV with t,r,v[,present]")->required();
    track->add_option("--out", out, "track log CSV (appended)")->required();
    track->add_option("--remover", track_remover, "override tracker.remover");
    track->add_option("--seed", seed, "override seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*acquire) return cmd_acquire(config_path, out, seed, noise_dbm, runtime_out);
        if (*calibrate) return cmd_calibrate(in, out, order);
        if (*sense) return cmd_sense(cal_path, snap_path, in, remover, config_path, pgram_out, p_fa);
        if (*simulate) return cmd_simulate(config_path, out, records_out, trials, threads, seed, quiet);
        if (*track) return cmd_track(config_path, trajectory_path, out, track_remover, seed);
    } catch (const isac::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
