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

// OFDM radar processing on a (clutter-rejected) CSI frame: zero-padded 2-D
// periodogram, frame-level CFAR threshold, strongest-peak extraction with
// fractional refinement, and the bin <-> physical conversions.

#include "isac/numerics.hpp"
#include "isac/scene.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace isac {

/// S(n, m) = |sum_k (sum_l H(k,l) e^{-j2pi lm/M'}) e^{+j2pi kn/N'}|^2 / (N'M').
///
/// Rows are range bins. Columns are Doppler bins shifted so that column M'/2
/// is zero velocity and negative velocities sit left of it. `spectrum` holds
/// the complex transform in the same layout.
struct Periodogram {
    Index n_rows = 0; ///< N before padding
    Index n_cols = 0; ///< M before padding
    RealMatrix values;
    ComplexMatrix spectrum;
    bool doppler_centered = true;

    Index n_prime() const { return values.rows(); }
    Index m_prime() const { return values.cols(); }

    /// Unshifted Doppler column for a centered column index.
    Index raw_column(Index centered) const { return (centered + m_prime() / 2) % m_prime(); }
};

inline Periodogram periodogram(const ComplexMatrix& h)
{
    const Index n = h.rows();
    const Index m = h.cols();
    if (n < 1 || m < 1) {
        throw std::invalid_argument("periodogram: empty frame");
    }
    const Index np = static_cast<Index>(pad_pow2(static_cast<std::size_t>(n)));
    const Index mp = static_cast<Index>(pad_pow2(static_cast<std::size_t>(m)));
    Dft dft;

    // DFT over symbols for each subcarrier.
    ComplexMatrix doppler(n, mp);
    for (Index k = 0; k < n; ++k) {
        doppler.row(k) = dft(h.row(k).transpose(), DftDirection::Forward, static_cast<std::size_t>(mp)).transpose();
    }
    // IDFT over subcarriers, written straight into the centered layout.
    Periodogram pg;
    pg.n_rows = n;
    pg.n_cols = m;
    pg.spectrum.resize(np, mp);
    for (Index col = 0; col < mp; ++col) {
        const Index centered = (col + mp / 2) % mp;
        pg.spectrum.col(centered) = dft(doppler.col(col), DftDirection::Inverse, static_cast<std::size_t>(np));
    }
    const double scale = 1.0 / (static_cast<double>(np) * static_cast<double>(mp));
    pg.values = pg.spectrum.cwiseAbs2() * scale;
    return pg;
}

struct CfarThreshold {
    double eta = 0.0;
    double noise_level = 0.0; ///< estimated mean of a noise-only bin
    bool degenerate = false;  ///< median was zero; eta forced to 0
};

/// Frame-level CFAR threshold.
///
/// Noise-only bins are modelled as exponential; their mean is estimated as
/// median / ln 2. eta is chosen so that the largest of the N'M' noise bins
/// exceeds it with probability p_fa:
///   eta = -mu * ln(1 - (1 - p_fa)^{1/(N'M')}).
inline CfarThreshold cfar_threshold(const Periodogram& pg, double p_fa)
{
    if (!(p_fa > 0.0 && p_fa < 1.0)) {
        throw std::invalid_argument("cfar_threshold: p_fa must lie in (0, 1)");
    }
    std::vector<double> bins(pg.values.data(), pg.values.data() + pg.values.size());
    if (bins.empty()) {
        throw std::invalid_argument("cfar_threshold: empty periodogram");
    }
    const auto mid = bins.begin() + static_cast<std::ptrdiff_t>(bins.size() / 2);
    std::nth_element(bins.begin(), mid, bins.end());
    const double median = *mid;

    CfarThreshold out;
    if (!(median > 0.0)) {
        out.degenerate = true;
        return out;
    }
    out.noise_level = median / std::numbers::ln2;
    const double cells = static_cast<double>(bins.size());
    const double per_cell = -std::expm1(std::log1p(-p_fa) / cells);
    out.eta = -out.noise_level * std::log(per_cell);
    return out;
}

/// Range and velocity resolutions c / (2 N df) and c / (2 M T0 fc).
/// The velocity expression equals c df / (2 M fc) when T0 = 1 / df.
struct Resolution {
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

inline Resolution resolutions(const RfConfig& cfg)
{
    return {kSpeedOfLight / (2.0 * static_cast<double>(cfg.n_subcarriers) * cfg.subcarrier_spacing_hz),
            kSpeedOfLight / (2.0 * static_cast<double>(cfg.n_symbols) * cfg.symbol_duration_s * cfg.carrier_hz)};
}

/// Width of one (zero-padded) periodogram bin in metres and metres/second.
inline Resolution bin_widths(const RfConfig& cfg)
{
    const double np = static_cast<double>(pad_pow2(cfg.n_subcarriers));
    const double mp = static_cast<double>(pad_pow2(cfg.n_symbols));
    return {kSpeedOfLight / (2.0 * cfg.subcarrier_spacing_hz * np),
            kSpeedOfLight / (2.0 * cfg.symbol_duration_s * cfg.carrier_hz * mp)};
}

/// Fractional (range row, centered Doppler column) to physical units.
inline Resolution bins_to_physical(double n_frac, double m_frac, const Periodogram& pg, const RfConfig& cfg)
{
    const double np = static_cast<double>(pg.n_prime());
    const double mp = static_cast<double>(pg.m_prime());
    return {n_frac * kSpeedOfLight / (2.0 * cfg.subcarrier_spacing_hz * np),
            (m_frac - mp / 2.0) * kSpeedOfLight / (2.0 * cfg.symbol_duration_s * cfg.carrier_hz * mp)};
}

enum class PeakInterpolation {
    /// Three-point parabola through the dB values of the peak and its
    /// neighbours, per axis.
    LogParabolic,
    /// Per-axis maximisation of the band-limited (Dirichlet) interpolation of
    /// the spectrum within half a bin of the peak. Unbiased for a single
    /// point target.
    Dirichlet,
};

struct Detection {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double peak_power = 0.0;
    double n_frac = 0.0;
    double m_frac = 0.0;
    bool above_threshold = false;
    bool edge_range = false;   ///< peak on first/last range bin: no refinement
    bool edge_doppler = false; ///< peak on first/last Doppler bin: no refinement
};

namespace detail {

inline double parabolic_offset(double left, double centre, double right)
{
    const double floor = std::max(centre, std::numeric_limits<double>::min()) * 1e-30;
    const double l = 10.0 * std::log10(std::max(left, floor));
    const double c = 10.0 * std::log10(std::max(centre, floor));
    const double r = 10.0 * std::log10(std::max(right, floor));
    const double denom = l - 2.0 * c + r;
    if (!(denom < 0.0)) {
        return 0.0;
    }
    return std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
}

// |sum_i x_i exp(sign * j 2 pi i f / P)|^2
inline double dtft_power(const ComplexVector& x, double f, double sign, double period)
{
    const double w = sign * 2.0 * std::numbers::pi * f / period;
    const cplx step = std::polar(1.0, w);
    cplx phasor{1.0, 0.0};
    cplx acc{0.0, 0.0};
    for (Index i = 0; i < x.size(); ++i) {
        acc += x(i) * phasor;
        phasor *= step;
        if ((i & 63) == 63) {
            phasor = std::polar(1.0, w * static_cast<double>(i + 1));
        }
    }
    return std::norm(acc);
}

inline double refine_peak(const ComplexVector& samples, double centre, double sign, double period)
{
    auto objective = [&](double f) { return -dtft_power(samples, f, sign, period); };
    const auto [best, value] = boost::math::tools::brent_find_minima(objective, centre - 0.5, centre + 0.5, 40);
    (void)value;
    return best;
}

} // namespace detail

/// Global maximum of the periodogram with fractional refinement on each axis.
/// `above_threshold` compares the integer-bin peak with eta.
inline Detection find_strongest(const Periodogram& pg, double eta, const RfConfig& cfg,
                                PeakInterpolation interp = PeakInterpolation::Dirichlet)
{
    if (!(eta >= 0.0)) {
        throw std::invalid_argument("find_strongest: threshold must be >= 0");
    }
    Index n_hat = 0;
    Index m_hat = 0;
    Detection d;
    d.peak_power = pg.values.maxCoeff(&n_hat, &m_hat);
    d.above_threshold = d.peak_power > eta;
    const Index np = pg.n_prime();
    const Index mp = pg.m_prime();
    d.edge_range = n_hat == 0 || n_hat == np - 1;
    d.edge_doppler = m_hat == 0 || m_hat == mp - 1;

    double n_off = 0.0;
    double m_off = 0.0;
    if (interp == PeakInterpolation::LogParabolic) {
        if (!d.edge_range) {
            n_off = detail::parabolic_offset(pg.values(n_hat - 1, m_hat), d.peak_power, pg.values(n_hat + 1, m_hat));
        }
        if (!d.edge_doppler) {
            m_off = detail::parabolic_offset(pg.values(n_hat, m_hat - 1), d.peak_power, pg.values(n_hat, m_hat + 1));
        }
    } else {
        Dft dft;
        if (!d.edge_range) {
            // Subcarrier-domain sequence behind this Doppler column.
            const ComplexVector seq = dft(pg.spectrum.col(m_hat), DftDirection::Forward, static_cast<std::size_t>(np))
                                          .head(pg.n_rows) /
                                      static_cast<double>(np);
            n_off = detail::refine_peak(seq, static_cast<double>(n_hat), +1.0, static_cast<double>(np)) -
                    static_cast<double>(n_hat);
        }
        if (!d.edge_doppler) {
            // Symbol-domain sequence behind this range row (unshifted order).
            ComplexVector row(mp);
            for (Index c = 0; c < mp; ++c) {
                row(pg.raw_column(c)) = pg.spectrum(n_hat, c);
            }
            const ComplexVector seq =
                dft(row, DftDirection::Inverse, static_cast<std::size_t>(mp)).head(pg.n_cols) / static_cast<double>(mp);
            const double centred = static_cast<double>(m_hat - mp / 2);
            m_off = detail::refine_peak(seq, centred, -1.0, static_cast<double>(mp)) - centred;
        }
    }
    d.n_frac = static_cast<double>(n_hat) + n_off;
    d.m_frac = static_cast<double>(m_hat) + m_off;
    const Resolution phys = bins_to_physical(d.n_frac, d.m_frac, pg, cfg);
    d.range_m = phys.range_m;
    d.velocity_mps = phys.velocity_mps;
    return d;
}

/// Strongest peak if it exceeds eta, otherwise nothing.
inline std::optional<Detection> detect_strongest(const Periodogram& pg, double eta, const RfConfig& cfg,
                                                 PeakInterpolation interp = PeakInterpolation::Dirichlet)
{
    Detection d = find_strongest(pg, eta, cfg, interp);
    if (!d.above_threshold) {
        return std::nullopt;
    }
    return d;
}

} // namespace isac
