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

#pragma once

// Monte Carlo evaluation and replay drivers on top of the scene, clutter,
// radar and tracker modules, plus the INI-style experiment configuration and
// CSV outputs used by the command line tool.

#include "isac/clutter.hpp"
#include "isac/numerics.hpp"
#include "isac/radar.hpp"
#include "isac/scene.hpp"
#include "isac/tracker.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace isac {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Remover { None, Subspace, EcaC, EcaS };

inline std::string to_string(Remover r)
{
    switch (r) {
    case Remover::None: return "none";
    case Remover::Subspace: return "crap";
    case Remover::EcaC: return "eca-c";
    case Remover::EcaS: return "eca-s";
    }
    return "?";
}

inline Remover parse_remover(const std::string& text)
{
    const std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
    if (s == "none") return Remover::None;
    if (s == "crap") return Remover::Subspace;
    if (s == "eca-c") return Remover::EcaC;
    if (s == "eca-s") return Remover::EcaS;
    throw ConfigError("unknown remover '" + text + "' (expected none, crap, eca-c or eca-s)");
}

struct TrackerSettings {
    double q_accel = 1.0;
    double t_max_s = 0.5;
    double sigma_r_max_m = 2.0;
    double sigma_v_max_mps = 2.0;
    double noise_dbm = -120.0;
    Remover remover = Remover::Subspace;
};

struct ExperimentConfig {
    RfConfig rf = RfConfig::desk();
    ScenarioParams scenario;
    std::vector<double> noise_dbm{-120.0, -110.0, -100.0, -90.0, -80.0};
    std::size_t trials = 200;
    double p_fa = 1e-3;
    std::vector<Remover> removers{Remover::None, Remover::Subspace, Remover::EcaC, Remover::EcaS};
    OrderSpec order = OrderSpec::explicit_order(5);
    std::uint64_t seed = 1;
    unsigned threads = 0; ///< 0: hardware concurrency
    PeakInterpolation interpolation = PeakInterpolation::Dirichlet;
    TrackerSettings tracker;

    /// 256 x 128 grid, K = 64, 5 clutter objects, 200 trials per point.
    static ExperimentConfig desk_preset()
    {
        ExperimentConfig cfg;
        cfg.rf = RfConfig::desk();
        cfg.scenario.n_snapshots = 64;
        return cfg;
    }

    /// Full 1584 x 1120 grid with K = 100.
    static ExperimentConfig full_size_preset()
    {
        ExperimentConfig cfg;
        cfg.rf = RfConfig::full_size();
        cfg.scenario.n_snapshots = 100;
        cfg.trials = 50;
        cfg.removers = {Remover::Subspace};
        return cfg;
    }

    void validate() const
    {
        try {
            rf.validate();
            scenario.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (trials < 1) throw ConfigError("sweep.trials must be >= 1");
        if (noise_dbm.empty()) throw ConfigError("sweep.noise_dbm must not be empty");
        if (removers.empty()) throw ConfigError("sweep.removers must not be empty");
        if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("sweep.p_fa must lie in (0, 1)");
        if (order.fixed && (*order.fixed < 1 || *order.fixed > static_cast<Index>(scenario.n_snapshots))) {
            throw ConfigError("sweep.order must satisfy 1 <= L <= n_snapshots");
        }
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
    }
}

} // namespace detail

/// Reads an INI-style configuration (sections [rf], [scenario], [sweep],
/// [tracker]; `key = value` lines; `;` comments). Missing keys keep the
/// desk-preset defaults; `rf.preset = full` starts from the full-size grid.
inline ExperimentConfig parse_config(std::istream& is)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> kKnown = {
        {"rf", {"preset", "n_subcarriers", "n_symbols", "carrier_hz", "subcarrier_spacing_hz", "frame_duration_s",
                "symbol_duration_s"}},
        {"scenario", {"n_clutter", "n_snapshots", "min_range_m", "max_range_m", "min_velocity_mps", "max_velocity_mps",
                      "rician_k_db", "reference_power_dbm", "reference_range_m", "clutter_gain_db",
                      "path_loss_exponent", "clutter_phase_jitter_rad", "clutter_ranges_m"}},
        {"sweep", {"noise_dbm", "trials", "p_fa", "removers", "order", "seed", "threads", "interpolation"}},
        {"tracker", {"q_accel", "t_max_s", "sigma_r_max_m", "sigma_v_max_mps", "noise_dbm", "remover"}},
    };
    for (const auto& [section, body] : tree) {
        const auto known = kKnown.find(section);
        if (known == kKnown.end()) {
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    auto text = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(path)) {
            return boost::algorithm::trim_copy(*v);
        }
        return std::nullopt;
    };
    auto number = [&](const std::string& path, double& target) {
        if (auto v = text(path)) target = detail::parse_double(path, *v);
    };
    auto count = [&](const std::string& path, std::size_t& target) {
        if (auto v = text(path)) target = static_cast<std::size_t>(detail::parse_uint(path, *v));
    };

    ExperimentConfig cfg = ExperimentConfig::desk_preset();
    if (auto preset = text("rf.preset")) {
        if (*preset == "full") {
            cfg = ExperimentConfig::full_size_preset();
        } else if (*preset != "desk") {
            throw ConfigError("rf.preset must be 'desk' or 'full'");
        }
    }

    RfConfig& rf = cfg.rf;
    count("rf.n_subcarriers", rf.n_subcarriers);
    count("rf.n_symbols", rf.n_symbols);
    number("rf.carrier_hz", rf.carrier_hz);
    number("rf.subcarrier_spacing_hz", rf.subcarrier_spacing_hz);
    number("rf.frame_duration_s", rf.frame_duration_s);
    if (text("rf.symbol_duration_s")) {
        number("rf.symbol_duration_s", rf.symbol_duration_s);
    } else if (rf.n_symbols > 0) {
        rf.symbol_duration_s = rf.frame_duration_s / static_cast<double>(rf.n_symbols);
    }

    ScenarioParams& sc = cfg.scenario;
    count("scenario.n_clutter", sc.n_clutter);
    count("scenario.n_snapshots", sc.n_snapshots);
    number("scenario.min_range_m", sc.min_range_m);
    number("scenario.max_range_m", sc.max_range_m);
    number("scenario.min_velocity_mps", sc.min_velocity_mps);
    number("scenario.max_velocity_mps", sc.max_velocity_mps);
    number("scenario.rician_k_db", sc.rician_k_db);
    number("scenario.reference_power_dbm", sc.reference_power_dbm);
    number("scenario.reference_range_m", sc.reference_range_m);
    number("scenario.clutter_gain_db", sc.clutter_gain_db);
    number("scenario.path_loss_exponent", sc.path_loss_exponent);
    number("scenario.clutter_phase_jitter_rad", sc.clutter_phase_jitter_rad);
    if (auto v = text("scenario.clutter_ranges_m")) {
        sc.fixed_clutter_ranges_m.clear();
        for (const auto& item : detail::split_list(*v)) {
            sc.fixed_clutter_ranges_m.push_back(detail::parse_double("scenario.clutter_ranges_m", item));
        }
    }

    if (auto v = text("sweep.noise_dbm")) {
        cfg.noise_dbm.clear();
        for (const auto& item : detail::split_list(*v)) {
            cfg.noise_dbm.push_back(detail::parse_double("sweep.noise_dbm", item));
        }
    }
    count("sweep.trials", cfg.trials);
    number("sweep.p_fa", cfg.p_fa);
    if (auto v = text("sweep.removers")) {
        cfg.removers.clear();
        for (const auto& item : detail::split_list(*v)) {
            cfg.removers.push_back(parse_remover(item));
        }
    }
    if (auto v = text("sweep.order")) {
        if (*v == "auto") {
            cfg.order = OrderSpec::automatic();
        } else {
            cfg.order = OrderSpec::explicit_order(static_cast<Index>(detail::parse_uint("sweep.order", *v)));
        }
    }
    if (auto v = text("sweep.seed")) cfg.seed = detail::parse_uint("sweep.seed", *v);
    if (auto v = text("sweep.threads")) cfg.threads = static_cast<unsigned>(detail::parse_uint("sweep.threads", *v));
    if (auto v = text("sweep.interpolation")) {
        if (*v == "dirichlet") {
            cfg.interpolation = PeakInterpolation::Dirichlet;
        } else if (*v == "parabolic") {
            cfg.interpolation = PeakInterpolation::LogParabolic;
        } else {
            throw ConfigError("sweep.interpolation must be 'dirichlet' or 'parabolic'");
        }
    }

    TrackerSettings& tr = cfg.tracker;
    number("tracker.q_accel", tr.q_accel);
    number("tracker.t_max_s", tr.t_max_s);
    number("tracker.sigma_r_max_m", tr.sigma_r_max_m);
    number("tracker.sigma_v_max_mps", tr.sigma_v_max_mps);
    number("tracker.noise_dbm", tr.noise_dbm);
    if (auto v = text("tracker.remover")) tr.remover = parse_remover(*v);

    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open config file " + path);
    }
    return parse_config(is);
}

/// Independent generator for (seed, stream, index). Identical inputs give an
/// identical sequence regardless of scheduling.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

/// K clutter-only acquisitions of `clutter`, each with fresh noise and a fresh
/// global phase, written straight into the stacked snapshot matrix.
inline ClutterSnapshots acquire_snapshots(const RfConfig& rf, std::span<const Scatterer> clutter,
                                          const NoiseSpec& noise, std::size_t k, double jitter_rad, Rng& rng)
{
    ClutterSnapshots snaps;
    snaps.n_rows = rf.rows();
    snaps.n_cols = rf.cols();
    snaps.c.resize(static_cast<Index>(k), rf.rows() * rf.cols());
    for (std::size_t i = 0; i < k; ++i) {
        const auto objects = jittered(clutter, jitter_rad, rng);
        const double phase = draw_phase(rng);
        const CsiFrame frame = synthesize_csi(rf, objects, noise, phase, rng);
        snaps.c.row(static_cast<Index>(i)) = vectorize(frame.h).transpose();
    }
    return snaps;
}

/// Outcome of one remover on one Monte Carlo trial.
struct TrialRecord {
    std::size_t point = 0;
    std::size_t trial = 0;
    double noise_dbm = 0.0;
    Remover remover = Remover::None;
    double true_range_m = 0.0;
    double true_velocity_mps = 0.0;
    /// Distance from the target to the closest clutter object.
    double clutter_gap_m = std::numeric_limits<double>::infinity();
    bool detected = false; ///< strongest peak exceeded the CFAR threshold
    double est_range_m = std::numeric_limits<double>::quiet_NaN();
    double est_velocity_mps = std::numeric_limits<double>::quiet_NaN();
    double peak_power = 0.0;
    double eta = 0.0;
    bool valid_detection = false;
    bool failed = false;
    std::string error;
};

/// Strongest-peak detection with the validity rule: above threshold and both
/// errors below the range and velocity resolutions.
struct Assessment {
    Detection detection;
    double eta = 0.0;
    bool valid = false;
};

inline Assessment assess(const ComplexMatrix& cleaned, const RfConfig& rf, double p_fa, PeakInterpolation interp,
                         double true_range_m, double true_velocity_mps)
{
    const Periodogram pg = periodogram(cleaned);
    const CfarThreshold thr = cfar_threshold(pg, p_fa);
    Assessment out;
    out.eta = thr.eta;
    out.detection = find_strongest(pg, thr.eta, rf, interp);
    const Resolution res = resolutions(rf);
    out.valid = out.detection.above_threshold && std::abs(out.detection.range_m - true_range_m) < res.range_m &&
                std::abs(out.detection.velocity_mps - true_velocity_mps) < res.velocity_mps;
    return out;
}

/// One Monte Carlo trial: a fresh scene, K clutter-only acquisitions at the
/// given noise power, one runtime frame with the target, then every configured
/// remover followed by detection. Failures inside a remover are recorded, not
/// thrown. Returns one record per remover, in configuration order.
inline std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, double noise_dbm, Rng& rng)
{
    const RfConfig& rf = cfg.rf;
    const Scene scene = generate_scenario(cfg.scenario, rf, rng);
    const NoiseSpec noise = NoiseSpec::from_dbm(noise_dbm, rf);

    const bool need_snapshots = std::any_of(cfg.removers.begin(), cfg.removers.end(),
                                            [](Remover r) { return r != Remover::None; });
    ClutterSnapshots snaps;
    if (need_snapshots) {
        snaps = acquire_snapshots(rf, scene.clutter, noise, cfg.scenario.n_snapshots,
                                  cfg.scenario.clutter_phase_jitter_rad, rng);
    }
    std::vector<Scatterer> runtime = jittered(scene.clutter, cfg.scenario.clutter_phase_jitter_rad, rng);
    runtime.push_back(scene.target);
    const double phase = draw_phase(rng);
    const CsiFrame frame = synthesize_csi(rf, runtime, noise, phase, rng);

    double gap = std::numeric_limits<double>::infinity();
    for (const auto& c : scene.clutter) {
        gap = std::min(gap, std::abs(c.range_m - scene.target.range_m));
    }

    std::vector<TrialRecord> records;
    for (Remover remover : cfg.removers) {
        TrialRecord rec;
        rec.noise_dbm = noise_dbm;
        rec.remover = remover;
        rec.true_range_m = scene.target.range_m;
        rec.true_velocity_mps = scene.target.velocity_mps;
        rec.clutter_gap_m = gap;
        try {
            ComplexMatrix cleaned;
            switch (remover) {
            case Remover::None: cleaned = frame.h; break;
            case Remover::Subspace: cleaned = crap_remove(calibrate(snaps, cfg.order), frame.h); break;
            case Remover::EcaC: cleaned = EcaCanceller(snaps, EcaCanceller::Domain::Subcarrier).remove(frame.h); break;
            case Remover::EcaS: cleaned = EcaCanceller(snaps, EcaCanceller::Domain::Symbol).remove(frame.h); break;
            }
            const Assessment a = assess(cleaned, rf, cfg.p_fa, cfg.interpolation, rec.true_range_m,
                                        rec.true_velocity_mps);
            rec.detected = a.detection.above_threshold;
            rec.est_range_m = a.detection.range_m;
            rec.est_velocity_mps = a.detection.velocity_mps;
            rec.peak_power = a.detection.peak_power;
            rec.eta = a.eta;
            rec.valid_detection = a.valid;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.valid_detection = false;
            rec.error = e.what();
        }
        records.push_back(std::move(rec));
    }
    return records;
}

/// 1 - (#valid / #records).
inline double compute_pmd(std::span<const TrialRecord> records)
{
    if (records.empty()) {
        throw std::invalid_argument("compute_pmd: no records");
    }
    const auto valid = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.valid_detection; });
    return 1.0 - static_cast<double>(valid) / static_cast<double>(records.size());
}

enum class Quantity { Range, Velocity };

/// Root-mean-square error where a missed detection counts as one bin width.
inline double compute_rmse(std::span<const TrialRecord> records, Quantity which, const Resolution& bin_width)
{
    if (records.empty()) {
        throw std::invalid_argument("compute_rmse: no records");
    }
    double sum = 0.0;
    for (const auto& r : records) {
        double e = 0.0;
        if (r.valid_detection) {
            e = which == Quantity::Range ? r.est_range_m - r.true_range_m : r.est_velocity_mps - r.true_velocity_mps;
        } else {
            e = which == Quantity::Range ? bin_width.range_m : bin_width.velocity_mps;
        }
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(records.size()));
}

struct SweepRow {
    double noise_dbm = 0.0;
    Remover remover = Remover::None;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double pmd = 0.0;
    double rmse_range_m = 0.0;
    double rmse_velocity_mps = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<TrialRecord> records; ///< ordered by (point, trial, remover)
};

/// Runs `count` jobs on up to `threads` workers; job i writes only slot i.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// P_MD and RMSE for every (noise point, remover). Trial t of point p always
/// uses derive_rng(seed, p, t), so results do not depend on the thread count.
inline SweepResult sweep(const ExperimentConfig& cfg,
                         const std::function<void(std::size_t done, std::size_t total)>& progress = {})
{
    cfg.validate();
    const std::size_t points = cfg.noise_dbm.size();
    const std::size_t total = points * cfg.trials;
    std::vector<std::vector<TrialRecord>> slots(total);
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for(total, cfg.threads, [&](std::size_t i) {
        const std::size_t p = i / cfg.trials;
        const std::size_t t = i % cfg.trials;
        Rng rng = derive_rng(cfg.seed, p, t);
        auto recs = run_trial(cfg, cfg.noise_dbm[p], rng);
        for (auto& r : recs) {
            r.point = p;
            r.trial = t;
        }
        slots[i] = std::move(recs);
        const std::size_t finished = ++done;
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(finished, total);
        }
    });

    SweepResult result;
    const Resolution widths = bin_widths(cfg.rf);
    for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t ri = 0; ri < cfg.removers.size(); ++ri) {
            std::vector<TrialRecord> subset;
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                subset.push_back(slots[p * cfg.trials + t][ri]);
            }
            SweepRow row;
            row.noise_dbm = cfg.noise_dbm[p];
            row.remover = cfg.removers[ri];
            row.trials = subset.size();
            row.failures = static_cast<std::size_t>(
                std::count_if(subset.begin(), subset.end(), [](const auto& r) { return r.failed; }));
            row.pmd = compute_pmd(subset);
            row.rmse_range_m = compute_rmse(subset, Quantity::Range, widths);
            row.rmse_velocity_mps = compute_rmse(subset, Quantity::Velocity, widths);
            result.rows.push_back(row);
        }
    }
    for (auto& slot : slots) {
        for (auto& r : slot) result.records.push_back(std::move(r));
    }
    return result;
}

inline constexpr std::string_view kSweepSchema = "# schema: isac-sweep/1";
inline constexpr std::string_view kSweepHeader =
    "noise_dbm,remover,trials,failures,pmd,rmse_range_m,rmse_velocity_mps";
inline constexpr std::string_view kTrialSchema = "# schema: isac-trials/1";
inline constexpr std::string_view kTrialHeader =
    "point,trial,noise_dbm,remover,true_range_m,true_velocity_mps,clutter_gap_m,detected,est_range_m,"
    "est_velocity_mps,peak_power,eta,valid,failed";
inline constexpr std::string_view kTrackSchema = "# schema: isac-track/1";
inline constexpr std::string_view kTrackHeader = "time_s,r_meas,v_meas,r_post,v_post,sigma_r,sigma_v,reset_flag";

namespace detail {

inline std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Opens `path` for appending; writes the schema and header lines only when
/// the file is new or empty.
inline std::ofstream open_csv(const std::string& path, std::string_view schema, std::string_view header)
{
    namespace fs = std::filesystem;
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    if (fresh) {
        os << schema << '\n' << header << '\n';
    }
    return os;
}

} // namespace detail

inline void write_sweep_rows(std::ostream& os, std::span<const SweepRow> rows)
{
    for (const auto& r : rows) {
        os << detail::fmt(r.noise_dbm) << ',' << to_string(r.remover) << ',' << r.trials << ',' << r.failures << ','
           << detail::fmt(r.pmd) << ',' << detail::fmt(r.rmse_range_m) << ',' << detail::fmt(r.rmse_velocity_mps)
           << '\n';
    }
}

inline void write_trial_rows(std::ostream& os, std::span<const TrialRecord> records)
{
    using detail::fmt;
    for (const auto& r : records) {
        os << r.point << ',' << r.trial << ',' << fmt(r.noise_dbm) << ',' << to_string(r.remover) << ','
           << fmt(r.true_range_m) << ',' << fmt(r.true_velocity_mps) << ',' << fmt(r.clutter_gap_m) << ','
           << int(r.detected) << ',' << fmt(r.est_range_m) << ',' << fmt(r.est_velocity_mps) << ','
           << fmt(r.peak_power) << ',' << fmt(r.eta) << ',' << int(r.valid_detection) << ',' << int(r.failed) << '\n';
    }
}

inline void append_sweep_csv(const std::string& path, std::span<const SweepRow> rows)
{
    auto os = detail::open_csv(path, kSweepSchema, kSweepHeader);
    write_sweep_rows(os, rows);
}

inline void append_trial_csv(const std::string& path, std::span<const TrialRecord> records)
{
    auto os = detail::open_csv(path, kTrialSchema, kTrialHeader);
    write_trial_rows(os, records);
}

/// Ground-truth target state at time t. `present = false` removes the target
/// from the scene for that sample.
struct TrajectoryPoint {
    double time_s = 0.0;
    double range_m = 0.0;
    double velocity_mps = 0.0;
    bool present = true;
};

/// CSV with header `t,r,v[,present]`; lines starting with '#' are skipped.
inline std::vector<TrajectoryPoint> parse_trajectory(std::istream& is)
{
    std::vector<TrajectoryPoint> out;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        boost::algorithm::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (!std::isdigit(static_cast<unsigned char>(line.front())) && line.front() != '-' && line.front() != '.') {
                continue;
            }
        }
        const auto fields = detail::split_list(line);
        if (fields.size() < 3 || fields.size() > 4) {
            throw ConfigError("trajectory line " + std::to_string(line_no) + ": expected t,r,v[,present]");
        }
        TrajectoryPoint p;
        p.time_s = detail::parse_double("t", fields[0]);
        p.range_m = detail::parse_double("r", fields[1]);
        p.velocity_mps = detail::parse_double("v", fields[2]);
        if (fields.size() == 4) p.present = detail::parse_double("present", fields[3]) != 0.0;
        if (!out.empty() && !(p.time_s > out.back().time_s)) {
            throw ConfigError("trajectory timestamps must be strictly increasing");
        }
        out.push_back(p);
    }
    if (out.empty()) {
        throw ConfigError("trajectory is empty");
    }
    return out;
}

inline std::vector<TrajectoryPoint> load_trajectory(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open trajectory file " + path);
    }
    return parse_trajectory(is);
}

/// Linear interpolation of range and speed; presence follows the sample at or
/// before t.
inline TrajectoryPoint sample_trajectory(std::span<const TrajectoryPoint> traj, double t)
{
    if (t <= traj.front().time_s) return {t, traj.front().range_m, traj.front().velocity_mps, traj.front().present};
    if (t >= traj.back().time_s) return {t, traj.back().range_m, traj.back().velocity_mps, traj.back().present};
    const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                     [](double v, const TrajectoryPoint& p) { return v < p.time_s; });
    const auto lo = hi - 1;
    const double w = (t - lo->time_s) / (hi->time_s - lo->time_s);
    return {t, lo->range_m + w * (hi->range_m - lo->range_m),
            lo->velocity_mps + w * (hi->velocity_mps - lo->velocity_mps), lo->present};
}

struct TrackLogRow {
    double time_s = 0.0;
    double r_meas = std::numeric_limits<double>::quiet_NaN();
    double v_meas = std::numeric_limits<double>::quiet_NaN();
    double r_post = std::numeric_limits<double>::quiet_NaN();
    double v_post = std::numeric_limits<double>::quiet_NaN();
    double sigma_r = std::numeric_limits<double>::quiet_NaN();
    double sigma_v = std::numeric_limits<double>::quiet_NaN();
    bool reset = false;
    // Not part of the CSV: ground truth for analysis.
    double r_true = std::numeric_limits<double>::quiet_NaN();
    double v_true = std::numeric_limits<double>::quiet_NaN();
};

/// Frame-by-frame replay of a target trajectory through clutter removal,
/// detection and the Kalman tracker. The clutter scene comes from the
/// scenario settings (seeded by cfg.seed); one calibration is made up front.
/// Every frame runs predict; a detection above threshold runs update; the
/// reset rule is then checked.
inline std::vector<TrackLogRow> replay_track(const ExperimentConfig& cfg, std::span<const TrajectoryPoint> trajectory)
{
    cfg.validate();
    if (trajectory.empty()) {
        throw std::invalid_argument("replay_track: empty trajectory");
    }
    const RfConfig& rf = cfg.rf;
    Rng rng = derive_rng(cfg.seed, 0x7472616bULL, 0);
    const Scene scene = generate_scenario(cfg.scenario, rf, rng);
    const NoiseSpec noise = NoiseSpec::from_dbm(cfg.tracker.noise_dbm, rf);
    const Remover remover = cfg.tracker.remover;

    ClutterSnapshots snaps;
    std::optional<ClutterCalibration> cal;
    std::optional<EcaCanceller> eca;
    if (remover != Remover::None) {
        snaps = acquire_snapshots(rf, scene.clutter, noise, cfg.scenario.n_snapshots,
                                  cfg.scenario.clutter_phase_jitter_rad, rng);
        if (remover == Remover::Subspace) cal = calibrate(snaps, cfg.order);
        if (remover == Remover::EcaC) eca.emplace(snaps, EcaCanceller::Domain::Subcarrier);
        if (remover == Remover::EcaS) eca.emplace(snaps, EcaCanceller::Domain::Symbol);
    }

    KfParams kf = KfParams::for_radar(rf, cfg.tracker.q_accel);
    kf.t_max_s = cfg.tracker.t_max_s;
    kf.sigma_r_max_m = cfg.tracker.sigma_r_max_m;
    kf.sigma_v_max_mps = cfg.tracker.sigma_v_max_mps;
    kf.validate();
    const Mat2 p0 = default_initial_covariance(rf);

    // Target reflectivity fixed from its first position; free-space loss
    // follows the instantaneous range.
    const double ref_range = std::max(trajectory.front().range_m, 1e-3);
    const cplx target_coeff = draw_coefficient(cfg.scenario, rf, ref_range, Role::Target, rng);

    std::vector<TrackLogRow> log;
    TrackState track;
    const double t0 = trajectory.front().time_s;
    const double t_end = trajectory.back().time_s;
    const auto frames = static_cast<std::size_t>(std::floor((t_end - t0) / kf.dt + 1e-9)) + 1;
    for (std::size_t i = 0; i < frames; ++i) {
        const double t = t0 + static_cast<double>(i) * kf.dt;
        const TrajectoryPoint truth = sample_trajectory(trajectory, t);

        std::vector<Scatterer> objects = jittered(scene.clutter, cfg.scenario.clutter_phase_jitter_rad, rng);
        if (truth.present) {
            const double loss = attenuation(std::max(truth.range_m, 1e-3), rf, cfg.scenario.path_loss_exponent) /
                                attenuation(ref_range, rf, cfg.scenario.path_loss_exponent);
            objects.push_back({truth.range_m, truth.velocity_mps, target_coeff * loss, Role::Target});
        }
        const CsiFrame frame = synthesize_csi(rf, objects, noise, draw_phase(rng), rng);
        ComplexMatrix cleaned = frame.h;
        if (cal) cleaned = crap_remove(*cal, frame.h);
        if (eca) cleaned = eca->remove(frame.h);

        const Periodogram pg = periodogram(cleaned);
        const CfarThreshold thr = cfar_threshold(pg, cfg.p_fa);
        const auto det = detect_strongest(pg, thr.eta, rf, cfg.interpolation);

        TrackLogRow row;
        row.time_s = t;
        if (truth.present) {
            row.r_true = truth.range_m;
            row.v_true = truth.velocity_mps;
        }
        if (det) {
            row.r_meas = det->range_m;
            row.v_meas = det->velocity_mps;
        }
        if (!track.initialized) {
            if (det) track = track_init(Vec2(det->range_m, det->velocity_mps), p0, t);
        } else {
            track = track_predict(track, kf);
            if (det) track = track_update(track, Vec2(det->range_m, det->velocity_mps), kf, t);
            if (should_reset(track, t, kf)) {
                row.reset = true;
                track = TrackState{};
            }
        }
        if (track.initialized) {
            row.r_post = track.x(0);
            row.v_post = track.x(1);
            row.sigma_r = track.sigma_range();
            row.sigma_v = track.sigma_velocity();
        }
        log.push_back(row);
    }
    return log;
}

inline void write_track_rows(std::ostream& os, std::span<const TrackLogRow> rows)
{
    using detail::fmt;
    for (const auto& r : rows) {
        os << fmt(r.time_s) << ',' << fmt(r.r_meas) << ',' << fmt(r.v_meas) << ',' << fmt(r.r_post) << ','
           << fmt(r.v_post) << ',' << fmt(r.sigma_r) << ',' << fmt(r.sigma_v) << ',' << int(r.reset) << '\n';
    }
}

inline void append_track_csv(const std::string& path, std::span<const TrackLogRow> rows)
{
    auto os = detail::open_csv(path, kTrackSchema, kTrackHeader);
    write_track_rows(os, rows);
}

} // namespace isac
