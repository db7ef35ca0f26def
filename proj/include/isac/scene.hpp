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

// Point-scatterer model of an OFDM sensing channel: steering vectors, CSI
// synthesis with AWGN and a per-acquisition phase rotation, and random scene
// generation with Rician amplitudes and two-way free-space attenuation.

#include "isac/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

inline constexpr double kSpeedOfLight = 299'792'458.0;

using Rng = std::mt19937_64;

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Radio parameters of one sensing acquisition (one radio frame).
struct RfConfig {
    std::size_t n_subcarriers = 0;  ///< N
    std::size_t n_symbols = 0;      ///< M
    double carrier_hz = 0.0;
    double subcarrier_spacing_hz = 0.0;
    double symbol_duration_s = 0.0; ///< T0, includes cyclic prefix
    double frame_duration_s = 0.0;

    Index rows() const { return static_cast<Index>(n_subcarriers); }
    Index cols() const { return static_cast<Index>(n_symbols); }
    double bandwidth_hz() const { return static_cast<double>(n_subcarriers) * subcarrier_spacing_hz; }

    void validate() const
    {
        if (n_subcarriers < 2 || n_symbols < 2) {
            throw std::invalid_argument("RfConfig: need at least 2 subcarriers and 2 symbols");
        }
        if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0) || !(symbol_duration_s > 0.0)) {
            throw std::invalid_argument("RfConfig: carrier, spacing and symbol duration must be positive");
        }
        const double frame = symbol_duration_s * static_cast<double>(n_symbols);
        if (std::abs(frame - frame_duration_s) > 1e-9 * frame_duration_s) {
            throw std::invalid_argument("RfConfig: symbol_duration * n_symbols must equal frame_duration");
        }
    }

    /// Build a config whose symbol duration is frame_duration / M.
    static RfConfig make(std::size_t n, std::size_t m, double carrier_hz, double spacing_hz, double frame_duration_s)
    {
        RfConfig cfg{n, m, carrier_hz, spacing_hz, frame_duration_s / static_cast<double>(m), frame_duration_s};
        cfg.validate();
        return cfg;
    }

    /// 1584 subcarriers at 120 kHz, 1120 symbols in a 10 ms frame at 27.4 GHz.
    static RfConfig full_size() { return make(1584, 1120, 27.4e9, 120e3, 10e-3); }

    /// Reduced grid (256 x 128) keeping the 190 MHz bandwidth and 10 ms frame,
    /// so range and velocity resolutions stay close to the full-size setup.
    static RfConfig desk() { return make(256, 128, 27.4e9, 190.08e6 / 256.0, 10e-3); }
};

enum class Role { Clutter, Target };

struct Scatterer {
    double range_m = 0.0;
    double velocity_mps = 0.0; ///< sign follows the Doppler steering vector
    cplx coeff{0.0, 0.0};
    Role role = Role::Clutter;
};

/// AWGN level. The total power is spread evenly over the subcarriers.
struct NoiseSpec {
    double total_power_dbm = -std::numeric_limits<double>::infinity();
    double per_element_mw = 0.0;

    static NoiseSpec from_dbm(double total_dbm, const RfConfig& cfg)
    {
        return {total_dbm, dbm_to_mw(total_dbm) / static_cast<double>(cfg.n_subcarriers)};
    }
    static NoiseSpec silent() { return {}; }
};

struct FrameTruth {
    std::vector<Scatterer> scatterers;
    double noise_per_element_mw = 0.0;
    double phase_rad = 0.0;
};

/// N x M time-frequency channel of one acquisition; rows are subcarriers.
struct CsiFrame {
    RfConfig config;
    ComplexMatrix h;
    std::optional<FrameTruth> truth;
};

/// a(r): element k = exp(-j 4 pi k df r / c).
inline ComplexVector steering_range(const RfConfig& cfg, double range_m)
{
    if (!(range_m >= 0.0)) {
        throw std::invalid_argument("steering_range: range must be >= 0");
    }
    const double step = -4.0 * std::numbers::pi * cfg.subcarrier_spacing_hz * range_m / kSpeedOfLight;
    ComplexVector a(cfg.rows());
    for (Index k = 0; k < a.size(); ++k) {
        a(k) = std::polar(1.0, step * static_cast<double>(k));
    }
    return a;
}

struct DopplerSteering {
    ComplexVector values;
    bool ambiguous = false; ///< |v| 2 T0 fc / c >= 0.5: the Doppler aliases
};

/// b(v): element l = exp(+j 4 pi l T0 fc v / c).
inline DopplerSteering steering_doppler(const RfConfig& cfg, double velocity_mps)
{
    const double normalized = velocity_mps * cfg.symbol_duration_s * cfg.carrier_hz / kSpeedOfLight;
    DopplerSteering out;
    out.ambiguous = std::abs(2.0 * normalized) >= 0.5;
    out.values.resize(cfg.cols());
    const double step = 4.0 * std::numbers::pi * normalized;
    for (Index l = 0; l < out.values.size(); ++l) {
        out.values(l) = std::polar(1.0, step * static_cast<double>(l));
    }
    return out;
}

/// Adds circularly-symmetric complex Gaussian noise of the given per-element
/// variance to every entry of `h`.
inline void add_awgn(ComplexMatrix& h, double per_element_mw, Rng& rng)
{
    if (!(per_element_mw > 0.0)) {
        return;
    }
    std::normal_distribution<double> gauss(0.0, std::sqrt(per_element_mw / 2.0));
    cplx* p = h.data();
    for (Index i = 0; i < h.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        p[i] += cplx{re, im};
    }
}

/// H = exp(j phase) * sum_p alpha_p a(r_p) b(v_p)^T + Z.
inline CsiFrame synthesize_csi(const RfConfig& cfg, std::span<const Scatterer> scatterers, const NoiseSpec& noise,
                               double phase_rad, Rng& rng)
{
    CsiFrame frame{cfg, ComplexMatrix::Zero(cfg.rows(), cfg.cols()), std::nullopt};
    const cplx rotation = std::polar(1.0, phase_rad);
    for (const auto& s : scatterers) {
        const ComplexVector a = steering_range(cfg, s.range_m) * (rotation * s.coeff);
        const ComplexVector b = steering_doppler(cfg, s.velocity_mps).values;
        frame.h.noalias() += a * b.transpose();
    }
    add_awgn(frame.h, noise.per_element_mw, rng);
    frame.truth = FrameTruth{{scatterers.begin(), scatterers.end()}, noise.per_element_mw, phase_rad};
    return frame;
}

/// Two-way free-space amplitude factor (c / fc) / ((4 pi)^{3/2} r^exponent).
/// With the default exponent 2 the received power falls as 1 / r^4.
inline double attenuation(double range_m, const RfConfig& cfg, double exponent = 2.0)
{
    if (!(range_m > 0.0)) {
        throw std::invalid_argument("attenuation: range must be > 0");
    }
    const double wavelength = kSpeedOfLight / cfg.carrier_hz;
    return wavelength / (std::pow(4.0 * std::numbers::pi, 1.5) * std::pow(range_m, exponent));
}

/// Draw of a unit-power Rician amplitude with the given K-factor.
inline double rician_amplitude(double k_factor_db, Rng& rng)
{
    const double k = db_to_linear(k_factor_db);
    const double los = std::sqrt(k / (k + 1.0));
    const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double x = los + scatter * gauss(rng);
    const double y = scatter * gauss(rng);
    return std::hypot(x, y);
}

/// Scene generation knobs.
struct ScenarioParams {
    std::size_t n_clutter = 5;
    std::size_t n_snapshots = 100; ///< K clutter acquisitions
    double min_range_m = 1.0;
    double max_range_m = 25.0;
    double min_velocity_mps = -1.5;
    double max_velocity_mps = 1.5;
    double rician_k_db = 10.0;
    /// Per-element received power of a unit-gain target at reference_range_m.
    double reference_power_dbm = -130.0;
    double reference_range_m = 10.0;
    /// Extra reflectivity of clutter objects over the target.
    double clutter_gain_db = 20.0;
    double path_loss_exponent = 2.0;
    /// Std-dev of an independent per-acquisition phase wobble on each clutter
    /// coefficient. Zero keeps clutter exactly static.
    double clutter_phase_jitter_rad = 0.0;
    /// When non-empty these ranges replace the random clutter placement.
    std::vector<double> fixed_clutter_ranges_m;

    void validate() const
    {
        if (!(min_range_m >= 0.0) || !(max_range_m > min_range_m)) {
            throw std::invalid_argument("ScenarioParams: need 0 <= min_range < max_range");
        }
        if (!(max_velocity_mps >= min_velocity_mps)) {
            throw std::invalid_argument("ScenarioParams: velocity bounds reversed");
        }
        if (n_snapshots < 1) {
            throw std::invalid_argument("ScenarioParams: need at least one snapshot");
        }
        for (double r : fixed_clutter_ranges_m) {
            if (!(r > 0.0) || r > max_range_m) {
                throw std::invalid_argument("ScenarioParams: fixed clutter range outside (0, max_range]");
            }
        }
    }
};

struct Scene {
    std::vector<Scatterer> clutter;
    Scatterer target;

    std::vector<Scatterer> all() const
    {
        std::vector<Scatterer> out = clutter;
        out.push_back(target);
        return out;
    }
};

/// Complex coefficient for an object at `range_m`: Rician magnitude, free-space
/// attenuation relative to the reference range, uniform phase.
inline cplx draw_coefficient(const ScenarioParams& params, const RfConfig& cfg, double range_m, Role role, Rng& rng)
{
    const double gain_db = role == Role::Clutter ? params.clutter_gain_db : 0.0;
    const double scale = std::sqrt(dbm_to_mw(params.reference_power_dbm + gain_db));
    const double path = attenuation(range_m, cfg, params.path_loss_exponent) /
                        attenuation(params.reference_range_m, cfg, params.path_loss_exponent);
    const double magnitude = scale * path * rician_amplitude(params.rician_k_db, rng);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    return std::polar(magnitude, phase(rng));
}

/// Static clutter objects plus one moving target. Ranges are drawn from
/// (min_range, max_range]; the target velocity is uniform in the given bounds.
inline Scene generate_scenario(const ScenarioParams& params, const RfConfig& cfg, Rng& rng)
{
    params.validate();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_range = [&] { return params.max_range_m - unit(rng) * (params.max_range_m - params.min_range_m); };

    Scene scene;
    const std::size_t n_clutter = params.fixed_clutter_ranges_m.empty() ? params.n_clutter
                                                                        : params.fixed_clutter_ranges_m.size();
    for (std::size_t i = 0; i < n_clutter; ++i) {
        const double r = params.fixed_clutter_ranges_m.empty() ? draw_range() : params.fixed_clutter_ranges_m[i];
        scene.clutter.push_back({r, 0.0, draw_coefficient(params, cfg, r, Role::Clutter, rng), Role::Clutter});
    }
    const double rt = draw_range();
    std::uniform_real_distribution<double> vel(params.min_velocity_mps, params.max_velocity_mps);
    const double vt = vel(rng);
    scene.target = {rt, vt, draw_coefficient(params, cfg, rt, Role::Target, rng), Role::Target};
    return scene;
}

/// Clutter as seen by one acquisition: each coefficient picks up an independent
/// phase wobble when jitter is enabled.
inline std::vector<Scatterer> jittered(std::span<const Scatterer> clutter, double jitter_rad, Rng& rng)
{
    std::vector<Scatterer> out(clutter.begin(), clutter.end());
    if (jitter_rad > 0.0) {
        std::normal_distribution<double> wobble(0.0, jitter_rad);
        for (auto& s : out) {
            s.coeff *= std::polar(1.0, wobble(rng));
        }
    }
    return out;
}

inline double draw_phase(Rng& rng)
{
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    return phase(rng);
}

} // namespace isac
