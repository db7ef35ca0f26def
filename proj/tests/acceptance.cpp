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

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion in the selected group fails.
//
//   acceptance --group properties   criteria 1-8   (seconds)
//   acceptance --group behaviour    criteria 9, 10, 12 (minutes)
//   acceptance --group full-scale   criterion 11   (full grid, tens of minutes)
//   acceptance --group all

#include "isac/clutter.hpp"
#include "isac/harness.hpp"
#include "isac/numerics.hpp"
#include "isac/radar.hpp"
#include "isac/scene.hpp"
#include "isac/tracker.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

using namespace isac;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* group;
    const char* title;
    std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

ComplexMatrix random_matrix(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
    }
    return m;
}

ClutterSnapshots as_snapshots(const ComplexMatrix& c, Index n, Index m)
{
    ClutterSnapshots s;
    s.n_rows = n;
    s.n_cols = m;
    s.c = c;
    return s;
}

ComplexMatrix projector(const ClutterCalibration& cal) { return cal.projection_factor * cal.basis_h; }

// Clutter snapshots of a random static scene on an N x M grid.
ClutterSnapshots scene_snapshots(const RfConfig& rf, std::size_t n_clutter, std::size_t k, double noise_dbm, Rng& rng,
                                 Scene* scene_out = nullptr, double jitter_rad = 0.0)
{
    ScenarioParams sp;
    sp.n_clutter = n_clutter;
    sp.n_snapshots = k;
    const Scene scene = generate_scenario(sp, rf, rng);
    if (scene_out) *scene_out = scene;
    const NoiseSpec noise = std::isfinite(noise_dbm) ? NoiseSpec::from_dbm(noise_dbm, rf) : NoiseSpec::silent();
    return acquire_snapshots(rf, scene.clutter, noise, k, jitter_rad, rng);
}

// 1. Per-snapshot phase rotations leave the clutter projector unchanged.
Outcome phase_invariance()
{
    Rng rng(101);
    const RfConfig rf = RfConfig::make(32, 16, 27.4e9, 190.08e6 / 32.0, 10e-3);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        // Half the sets are unstructured Gaussian (L = K), half are clutter scenes.
    // The scenes carry per-object phase jitter so that their five clutter
    // directions are distinct and well above the noise: without it the static
    // clutter is rank one and an L = 5 subspace would be padded with noise
    // directions whose span is not defined to 1e-10.
        const bool gaussian = rep % 2 == 0;
        const ClutterSnapshots base = gaussian ? as_snapshots(random_matrix(16, rf.rows() * rf.cols(), rng), rf.rows(),
                                                              rf.cols())
                                               : scene_snapshots(rf, 5, 16, -150.0, rng, nullptr, 0.5);
        const Index order = gaussian ? 16 : 5;
        ClutterSnapshots rotated = base;
        for (Index k = 0; k < rotated.count(); ++k) rotated.c.row(k) *= std::polar(1.0, angle(rng));
        const ComplexMatrix p0 = projector(calibrate(base, OrderSpec::explicit_order(order)));
        const ComplexMatrix p1 = projector(calibrate(rotated, OrderSpec::explicit_order(order)));
        worst = std::max(worst, (p1 - p0).norm());
    }
    return {worst <= 1e-10, fmt("max ||P_rot - P||_F = %.3e over 20 sets (tol 1e-10)", worst)};
}

// 2. Idempotence and orthogonality of the subspace remover.
Outcome idempotence_orthogonality()
{
    Rng rng(202);
    const RfConfig rf = RfConfig::desk();
    double worst_idem = 0.0;
    double worst_coeff = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        Scene scene;
        const ClutterSnapshots snaps = scene_snapshots(rf, 5, 64, -110.0, rng, &scene);
        const ClutterCalibration cal = calibrate(snaps, OrderSpec::explicit_order(5));
        const CsiFrame frame = synthesize_csi(rf, scene.all(), NoiseSpec::from_dbm(-110.0, rf), draw_phase(rng), rng);
        const double hn = frame.h.norm();
        const ComplexMatrix once = crap_remove(cal, frame.h);
        const ComplexMatrix twice = crap_remove(cal, once);
        worst_idem = std::max(worst_idem, (twice - once).norm() / hn);
        const ComplexVector coeffs = cal.basis_h * vectorize(once);
        worst_coeff = std::max(worst_coeff, coeffs.norm() / hn);
    }
    return {worst_idem <= 1e-10 && worst_coeff <= 1e-10,
            fmt("||R(R(h)) - R(h)|| / ||h|| = %.3e, ||C^H R(h)|| / ||h|| = %.3e (tol 1e-10)", worst_idem,
                worst_coeff)};
}

// 3. All three removers against explicit dense projectors, N=8, M=4, K=3.
Outcome oracle_equivalence()
{
    constexpr Index n = 8, m = 4, k = 3, q = n * m;
    Rng rng(303);
    double worst[3] = {0.0, 0.0, 0.0};
    for (int rep = 0; rep < 50; ++rep) {
        const ComplexMatrix c = random_matrix(k, q, rng);
        const ComplexMatrix h = random_matrix(n, m, rng);
        const ClutterSnapshots snaps = as_snapshots(c, n, m);
        const double hn = h.norm();

        // Subspace: rows of C span the clutter, P = X (X^H X)^-1 X^H with X = C^T.
        const ComplexMatrix x = c.transpose();
        const ComplexMatrix p = x * (x.adjoint() * x).inverse() * x.adjoint();
        const ComplexVector expect_crap = vectorize(h) - p * vectorize(h);
        const ComplexMatrix got_crap = crap_remove(calibrate(snaps, OrderSpec::explicit_order(k)), h);
        worst[0] = std::max(worst[0], (vectorize(got_crap) - expect_crap).norm() / hn);

        // Per subcarrier: row h_n minus its projection on the rows of B_n (K x M).
        ComplexMatrix expect_c(n, m);
        for (Index i = 0; i < n; ++i) {
            ComplexMatrix b(k, m);
            for (Index s = 0; s < k; ++s) b.row(s) = snaps.frame(s).row(i);
            const ComplexMatrix pi = b.adjoint() * (b * b.adjoint()).inverse() * b;
            expect_c.row(i) = h.row(i) * (ComplexMatrix::Identity(m, m) - pi);
        }
        worst[1] = std::max(worst[1], (eca_c_remove(snaps, h) - expect_c).norm() / hn);

        // Per symbol: column h_m minus its projection on the columns of D_m (N x K).
        ComplexMatrix expect_s(n, m);
        for (Index j = 0; j < m; ++j) {
            ComplexMatrix d(n, k);
            for (Index s = 0; s < k; ++s) d.col(s) = snaps.frame(s).col(j);
            const ComplexMatrix pd = d * (d.adjoint() * d).inverse() * d.adjoint();
            expect_s.col(j) = (ComplexMatrix::Identity(n, n) - pd) * h.col(j);
        }
        worst[2] = std::max(worst[2], (eca_s_remove(snaps, h) - expect_s).norm() / hn);
    }
    const bool pass = worst[0] <= 1e-10 && worst[1] <= 1e-10 && worst[2] <= 1e-10;
    return {pass, fmt("relative error crap %.3e, eca-c %.3e, eca-s %.3e over 50 instances (tol 1e-10)", worst[0],
                      worst[1], worst[2])};
}

// 4. Noiseless clutter-only runtime frames vanish after removal.
Outcome exact_annihilation()
{
    Rng rng(404);
    const RfConfig rf = RfConfig::desk();
    constexpr Index order = 5;
    std::uniform_int_distribution<std::size_t> count(1, order);
    const std::size_t k_choices[] = {5, 8, 64};
    double worst = 0.0;
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n_clutter = count(rng);
        const std::size_t k = k_choices[rep % 3];
        Scene scene;
        const ClutterSnapshots snaps =
            scene_snapshots(rf, n_clutter, k, -std::numeric_limits<double>::infinity(), rng, &scene);
        const ClutterCalibration cal = calibrate(snaps, OrderSpec::explicit_order(order));
        const CsiFrame runtime = synthesize_csi(rf, scene.clutter, NoiseSpec::silent(), draw_phase(rng), rng);
        const double ratio = crap_remove(cal, runtime.h).squaredNorm() / runtime.h.squaredNorm();
        worst = std::max(worst, ratio);
    }
    return {worst <= 1e-18, fmt("max residual energy ratio %.3e over 12 scenes (tol 1e-18)", worst)};
}

// 5. Periodogram scaling and invariances.
Outcome periodogram_properties()
{
    Rng rng(505);
    const RfConfig rf = RfConfig::desk();
    const std::vector<Scatterer> objects{{4.2, 0.7, cplx(1.0, 0.5), Role::Target},
                                         {9.9, 0.0, cplx(3.0, 0.0), Role::Clutter}};
    const CsiFrame frame = synthesize_csi(rf, objects, NoiseSpec::from_dbm(0.0, rf), 0.0, rng);
    const Periodogram pg = periodogram(frame.h);
    const double parseval = std::abs(pg.values.sum() - frame.h.squaredNorm()) / frame.h.squaredNorm();

    // Unit target exactly on bin (n0, m0) of a grid that is already a power of two.
    const Index n = 256, m = 128, n0 = 37, m0 = 19;
    ComplexMatrix h(n, m);
    for (Index k = 0; k < n; ++k) {
        for (Index l = 0; l < m; ++l) {
            h(k, l) = std::polar(1.0, 2.0 * std::numbers::pi * (-double(k * n0) / double(n) + double(l * m0) / double(m)));
        }
    }
    const Periodogram aligned = periodogram(h);
    const double expected_peak = double(n * m) * double(n * m) / double(aligned.n_prime() * aligned.m_prime());
    const double peak_err = std::abs(aligned.values.maxCoeff() - expected_peak) / expected_peak;

    const Periodogram rotated = periodogram(frame.h * std::polar(1.0, 2.3));
    const double phase_err = (rotated.values - pg.values).cwiseAbs().maxCoeff() / pg.values.maxCoeff();

    const bool pass = parseval <= 1e-8 && peak_err <= 1e-6 && phase_err <= 1e-12;
    return {pass, fmt("Parseval %.2e (1e-8), aligned peak %.2e rel (1e-6), phase %.2e (1e-12)", parseval, peak_err,
                      phase_err)};
}

// 6. Noiseless single target at 7 m, +-1 m/s on the desk grid.
Outcome round_trip()
{
    const RfConfig rf = RfConfig::desk();
    Rng rng(606);
    std::string detail;
    bool pass = true;
    for (double v : {1.0, -1.0}) {
        const std::vector<Scatterer> target{{7.0, v, cplx(1.0, 0.0), Role::Target}};
        const CsiFrame frame = synthesize_csi(rf, target, NoiseSpec::silent(), 0.4, rng);
        const Periodogram pg = periodogram(frame.h);
        const Detection d = find_strongest(pg, 0.0, rf);
        const double er = std::abs(d.range_m - 7.0);
        const double ev = std::abs(d.velocity_mps - v);
        pass = pass && er <= 0.05 && ev <= 0.05 && std::signbit(d.velocity_mps) == std::signbit(v);
        detail += fmt("v=%+.0f: (%.4f m, %+.4f m/s) ", v, d.range_m, d.velocity_mps);
    }
    return {pass, detail + "(tol 0.05 m, 0.05 m/s)"};
}

// 7. Frame-level false-alarm rate of the CFAR threshold on noise-only frames.
Outcome cfar_rate()
{
    const RfConfig rf = RfConfig::desk();
    constexpr int frames = 10000;
    constexpr double p_fa = 1e-3;
    Rng rng(707);
    int alarms = 0;
    ComplexMatrix h(rf.rows(), rf.cols());
    for (int i = 0; i < frames; ++i) {
        h.setZero();
        add_awgn(h, 1.0, rng);
        const Periodogram pg = periodogram(h);
        const CfarThreshold thr = cfar_threshold(pg, p_fa);
        if (pg.values.maxCoeff() > thr.eta) ++alarms;
    }
    const double rate = double(alarms) / frames;
    return {rate >= 2e-4 && rate <= 5e-3,
            fmt("%d alarms in %d frames: rate %.2e (band [2e-4, 5e-3])", alarms, frames, rate)};
}

// 8. Kalman algebra and reset thresholds.
Outcome kalman()
{
    const RfConfig rf = RfConfig::desk();
    KfParams kf = KfParams::for_radar(rf);
    const TrackerSettings defaults;
    kf.t_max_s = defaults.t_max_s;
    kf.sigma_r_max_m = defaults.sigma_r_max_m;
    kf.sigma_v_max_mps = defaults.sigma_v_max_mps;

    // Diagonal prior and noise: gain p/(p+r), posterior p r/(p+r), per axis.
    double worst = 0.0;
    Rng rng(808);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
        KfParams p = kf;
        const double pr = u(rng), pv = u(rng), rr = u(rng), rv = u(rng);
        p.r = Vec2(rr, rv).asDiagonal();
        TrackState s = track_init(Vec2(u(rng), u(rng)), Vec2(pr, pv).asDiagonal(), 0.0);
        const Vec2 z(u(rng), u(rng));
        const TrackState post = track_update(s, z, p, 0.0);
        const Vec2 expect_x(s.x(0) + pr / (pr + rr) * (z(0) - s.x(0)), s.x(1) + pv / (pv + rv) * (z(1) - s.x(1)));
        const Mat2 expect_p = Vec2(pr * rr / (pr + rr), pv * rv / (pv + rv)).asDiagonal();
        worst = std::max({worst, (post.x - expect_x).cwiseAbs().maxCoeff(), (post.p - expect_p).cwiseAbs().maxCoeff()});
    }

    TrackState s = track_init(Vec2(5.0, 1.0), Mat2::Identity() * 0.01, 1.0);
    const bool timeout_ok = !should_reset(s, 1.5, kf) && should_reset(s, 1.5 + 1e-9, kf).reason == ResetReason::Timeout;
    s.p = Vec2(4.0, 0.01).asDiagonal();
    const bool range_edge = !should_reset(s, 1.0, kf);
    s.p(0, 0) = 4.0 * (1.0 + 1e-9);
    const bool range_over = should_reset(s, 1.0, kf).reason == ResetReason::RangeSigma;
    s.p = Vec2(0.01, 4.0).asDiagonal();
    const bool vel_edge = !should_reset(s, 1.0, kf);
    s.p(1, 1) = 4.0 * (1.0 + 1e-9);
    const bool vel_over = should_reset(s, 1.0, kf).reason == ResetReason::VelocitySigma;
    const bool configured = kf.t_max_s == 0.5 && kf.sigma_r_max_m == 2.0 && kf.sigma_v_max_mps == 2.0;

    const bool pass = worst <= 1e-12 && timeout_ok && range_edge && range_over && vel_edge && vel_over && configured;
    return {pass, fmt("closed-form error %.2e (1e-12); timeout@0.5s %s; sigma_r@2m %s; sigma_v@2m/s %s", worst,
                      timeout_ok ? "ok" : "wrong", range_edge && range_over ? "ok" : "wrong",
                      vel_edge && vel_over ? "ok" : "wrong")};
}

// 9. Miss-detection ordering at the lowest desk noise point.
Outcome desk_ordering()
{
    ExperimentConfig cfg = ExperimentConfig::desk_preset();
    cfg.noise_dbm = {cfg.noise_dbm.front()};
    const auto t0 = Clock::now();
    const SweepResult res = sweep(cfg);
    const double minutes = std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
    const Resolution res_phys = resolutions(cfg.rf);

    auto pmd_of = [&](Remover r, const std::function<bool(const TrialRecord&)>& keep, std::size_t* n = nullptr) {
        std::vector<TrialRecord> subset;
        for (const auto& rec : res.records) {
            if (rec.remover == r && keep(rec)) subset.push_back(rec);
        }
        if (n) *n = subset.size();
        return subset.empty() ? std::nan("") : compute_pmd(subset);
    };
    auto all = [](const TrialRecord&) { return true; };
    auto slow = [&](const TrialRecord& r) { return std::abs(r.true_velocity_mps) <= 0.5 * res_phys.velocity_mps; };
    auto near = [&](const TrialRecord& r) { return r.clutter_gap_m <= 0.5 * res_phys.range_m; };

    const double none = pmd_of(Remover::None, all);
    const double crap = pmd_of(Remover::Subspace, all);
    const double eca_c = pmd_of(Remover::EcaC, all);
    std::size_t n_slow = 0, n_near = 0;
    const double eca_c_slow = pmd_of(Remover::EcaC, slow, &n_slow);
    const double eca_s_near = pmd_of(Remover::EcaS, near, &n_near);

    const bool c_none = none >= 0.9;
    const bool c_crap = crap <= 0.02;
    const bool c_gap = eca_c - crap >= 0.1;
    const bool c_slow = eca_c_slow >= 0.8;
    const bool c_near = eca_s_near >= 0.8;
    std::string detail = fmt("noise %.0f dBm, %zu trials, %.1f min: ", cfg.noise_dbm.front(), cfg.trials, minutes);
    detail += fmt("none %.3f%s; crap %.3f%s; eca-c - crap %.3f%s; eca-c slow %.3f (n=%zu)%s; eca-s near %.3f (n=%zu)%s",
                  none, c_none ? "" : " [<0.9]", crap, c_crap ? "" : " [>0.02]", eca_c - crap, c_gap ? "" : " [<0.1]",
                  eca_c_slow, n_slow, c_slow ? "" : " [<0.8]", eca_s_near, n_near, c_near ? "" : " [<0.8]");
    return {c_none && c_crap && c_gap && c_slow && c_near, detail};
}

// 10. Zero-Doppler column after the per-subcarrier canceller vs the subspace remover.
Outcome zero_doppler_null()
{
    ExperimentConfig cfg = ExperimentConfig::desk_preset();
    cfg.scenario.fixed_clutter_ranges_m = {3.0, 5.5, 8.0, 12.0, 17.0};
    cfg.scenario.clutter_gain_db = 30.0;
    const RfConfig& rf = cfg.rf;
    const NoiseSpec noise = NoiseSpec::from_dbm(-110.0, rf);
    Rng rng(1010);
    double worst_db = -std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 5; ++rep) {
        const Scene scene = generate_scenario(cfg.scenario, rf, rng);
        const ClutterSnapshots snaps = acquire_snapshots(rf, scene.clutter, noise, 64, 0.0, rng);
        std::vector<Scatterer> objects = scene.clutter;
        const double range = 6.5 + rep;
        objects.push_back({range, 0.05 * (rep + 1), draw_coefficient(cfg.scenario, rf, range, Role::Target, rng),
                           Role::Target});
        const CsiFrame frame = synthesize_csi(rf, objects, noise, draw_phase(rng), rng);
        const Periodogram after_c = periodogram(eca_c_remove(snaps, frame.h));
        const Periodogram after_crap = periodogram(crap_remove(calibrate(snaps, OrderSpec::explicit_order(5)), frame.h));
        const Index zero = after_c.m_prime() / 2;
        const double ratio_db = 10.0 * std::log10(after_c.values.col(zero).sum() / after_crap.values.col(zero).sum());
        worst_db = std::max(worst_db, ratio_db);
    }
    return {worst_db <= -20.0, fmt("zero-Doppler column eca-c vs crap: worst %.1f dB over 5 scenes (need <= -20 dB)",
                                   worst_db)};
}

// 11. Full-size grid spot check of the subspace remover.
Outcome full_scale()
{
    ExperimentConfig cfg = ExperimentConfig::full_size_preset();
    cfg.noise_dbm = {-120.0};
    cfg.trials = 50;
    cfg.removers = {Remover::Subspace};
    const auto t0 = Clock::now();
    const SweepResult res = sweep(cfg, [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\r  full-scale trial %zu/%zu", done, total);
        if (done == total) std::fprintf(stderr, "\n");
    });
    const double minutes = std::chrono::duration<double>(Clock::now() - t0).count() / 60.0;
    const SweepRow& row = res.rows.front();
    const bool pass = row.rmse_range_m <= 0.15 && row.rmse_velocity_mps <= 0.10 && minutes <= 30.0;
    return {pass, fmt("%zu trials at %.0f dBm: range RMSE %.4f m (0.15), velocity RMSE %.4f m/s (0.10), P_MD %.3f, "
                      "%.1f min (30)",
                      row.trials, row.noise_dbm, row.rmse_range_m, row.rmse_velocity_mps, row.pmd, minutes)};
}

// 12. Wall time of the subspace remover is linear in Q at fixed L.
Outcome linear_runtime()
{
    constexpr Index order = 5;
    Rng rng(1212);
    std::vector<double> qs, ts;
    for (int e = 14; e <= 20; ++e) {
        const Index q = Index(1) << e;
        const Index n = Index(1) << (e / 2 + e % 2), m = q / n;
        ClutterCalibration cal;
        cal.n_rows = n;
        cal.n_cols = m;
        cal.n_snapshots = order;
        cal.basis_h = random_matrix(order, q, rng);
        cal.projection_factor = random_matrix(q, order, rng);
        const ComplexMatrix h = random_matrix(n, m, rng);
        const int reps = int(std::max<Index>(5, (Index(1) << 24) / q));
        double best = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 7; ++trial) {
            const auto t0 = Clock::now();
            double sink = 0.0;
            for (int r = 0; r < reps; ++r) sink += std::real(crap_remove(cal, h)(0, 0));
            const double dt = std::chrono::duration<double>(Clock::now() - t0).count() / reps;
            if (!std::isfinite(sink)) return {false, "non-finite output"};
            best = std::min(best, dt);
        }
        qs.push_back(double(q));
        ts.push_back(best);
    }
    // Ordinary least squares t = a + b Q.
    const double n = double(qs.size());
    const double mq = std::accumulate(qs.begin(), qs.end(), 0.0) / n;
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    double sqq = 0.0, sqt = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        sqq += (qs[i] - mq) * (qs[i] - mq);
        sqt += (qs[i] - mq) * (ts[i] - mt);
        stt += (ts[i] - mt) * (ts[i] - mt);
    }
    const double r2 = sqt * sqt / (sqq * stt);
    return {r2 >= 0.99, fmt("R^2 = %.5f for t(Q), Q = 2^14..2^20, L = %td; t(2^20) = %.2f ms (need R^2 >= 0.99)", r2,
                            order, ts.back() * 1e3)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app("acceptance criteria for isac-clutter");
    std::string group = "properties";
    app.add_option("--group", group, "properties | behaviour | full-scale | all")
        ->check(CLI::IsMember({"properties", "behaviour", "full-scale", "all"}));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "properties", "phase invariance of the clutter projector", phase_invariance},
        {2, "properties", "idempotence and orthogonality", idempotence_orthogonality},
        {3, "properties", "dense oracle equivalence (crap, eca-c, eca-s)", oracle_equivalence},
        {4, "properties", "exact annihilation of noiseless clutter", exact_annihilation},
        {5, "properties", "periodogram Parseval, aligned peak, phase", periodogram_properties},
        {6, "properties", "round-trip estimation at 7 m, +-1 m/s", round_trip},
        {7, "properties", "CFAR frame false-alarm rate", cfar_rate},
        {8, "properties", "Kalman closed form and reset rule", kalman},
        {9, "behaviour", "desk-scale miss-detection ordering", desk_ordering},
        {10, "behaviour", "zero-Doppler null after eca-c", zero_doppler_null},
        {11, "full-scale", "full-size RMSE spot check", full_scale},
        {12, "behaviour", "linear runtime in Q", linear_runtime},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (group != "all" && group != c.group) continue;
        Outcome out;
        const auto t0 = Clock::now();
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " -- " << out.detail
                  << fmt(" [%.1fs]", secs) << std::endl;
        if (!out.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
