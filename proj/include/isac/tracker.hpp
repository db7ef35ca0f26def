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

// Constant-velocity Kalman filter on (range, speed) with identity measurement
// model, plus the timeout / covariance-bound reset rule.

#include "isac/numerics.hpp"
#include "isac/radar.hpp"
#include "isac/scene.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace isac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct KfParams {
    Mat2 q = Mat2::Zero(); ///< process noise covariance
    Mat2 r = Mat2::Zero(); ///< measurement noise covariance
    double dt = 0.01;
    double t_max_s = 0.5;
    double sigma_r_max_m = 2.0;
    double sigma_v_max_mps = 2.0;

    /// Discrete white-acceleration process noise q_a [[dt^4/4, dt^3/2], [dt^3/2, dt^2]].
    static Mat2 white_acceleration(double dt, double q_accel)
    {
        Mat2 q;
        q << dt * dt * dt * dt / 4.0, dt * dt * dt / 2.0, dt * dt * dt / 2.0, dt * dt;
        return q_accel * q;
    }

    /// dt = frame duration, white-acceleration Q, R = diag((dr/2)^2, (dv/2)^2).
    static KfParams for_radar(const RfConfig& cfg, double q_accel = 1.0)
    {
        const Resolution res = resolutions(cfg);
        KfParams p;
        p.dt = cfg.frame_duration_s;
        p.q = white_acceleration(p.dt, q_accel);
        p.r = Vec2(0.25 * res.range_m * res.range_m, 0.25 * res.velocity_mps * res.velocity_mps).asDiagonal();
        return p;
    }

    void validate() const
    {
        if (!(dt > 0.0)) {
            throw std::invalid_argument("KfParams: dt must be positive");
        }
        auto psd = [](const Mat2& m) {
            Eigen::SelfAdjointEigenSolver<Mat2> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
            return m.isApprox(m.transpose()) && eig.eigenvalues().minCoeff() >= -1e-12;
        };
        if (!psd(q) || !psd(r)) {
            throw std::invalid_argument("KfParams: Q and R must be symmetric positive semi-definite");
        }
    }
};

struct TrackState {
    Vec2 x = Vec2::Zero(); ///< [range m, speed m/s]
    Mat2 p = Mat2::Zero();
    double last_update_time_s = 0.0;
    bool initialized = false;

    double sigma_range() const { return std::sqrt(std::max(p(0, 0), 0.0)); }
    double sigma_velocity() const { return std::sqrt(std::max(p(1, 1), 0.0)); }
};

/// diag(dr^2, dv^2) from the radar resolutions.
inline Mat2 default_initial_covariance(const RfConfig& cfg)
{
    const Resolution res = resolutions(cfg);
    return Vec2(res.range_m * res.range_m, res.velocity_mps * res.velocity_mps).asDiagonal();
}

inline TrackState track_init(const Vec2& z, const Mat2& p0, double time_s = 0.0)
{
    if (!z.allFinite()) {
        throw std::invalid_argument("track_init: measurement must be finite");
    }
    return {z, p0, time_s, true};
}

inline TrackState track_predict(const TrackState& s, const KfParams& params)
{
    if (!s.initialized) {
        throw std::logic_error("track_predict: track not initialised");
    }
    Mat2 f;
    f << 1.0, params.dt, 0.0, 1.0;
    TrackState out = s;
    out.x = f * s.x;
    out.p = f * s.p * f.transpose() + params.q;
    out.p = (0.5 * (out.p + out.p.transpose())).eval();
    return out;
}

/// K = P (P + R)^-1; x += K (z - x); P = (I - K) P.
inline TrackState track_update(const TrackState& predicted, const Vec2& z, const KfParams& params, double time_s)
{
    if (!predicted.initialized) {
        throw std::logic_error("track_update: track not initialised");
    }
    const Mat2 innovation_cov = predicted.p + params.r;
    Eigen::FullPivLU<Mat2> lu(innovation_cov);
    if (!lu.isInvertible()) {
        throw NumericError("track_update: P + R is singular");
    }
    const Mat2 gain = predicted.p * lu.inverse();
    TrackState out = predicted;
    out.x = predicted.x + gain * (z - predicted.x);
    out.p = (Mat2::Identity() - gain) * predicted.p;
    out.p = (0.5 * (out.p + out.p.transpose())).eval();
    out.last_update_time_s = time_s;
    return out;
}

enum class ResetReason { None, Timeout, RangeSigma, VelocitySigma };

struct ResetDecision {
    bool reset = false;
    ResetReason reason = ResetReason::None;

    explicit operator bool() const { return reset; }
};

inline ResetDecision should_reset(const TrackState& s, double now_s, const KfParams& params)
{
    if (now_s - s.last_update_time_s > params.t_max_s) {
        return {true, ResetReason::Timeout};
    }
    if (s.sigma_range() > params.sigma_r_max_m) {
        return {true, ResetReason::RangeSigma};
    }
    if (s.sigma_velocity() > params.sigma_v_max_mps) {
        return {true, ResetReason::VelocitySigma};
    }
    return {};
}

} // namespace isac
