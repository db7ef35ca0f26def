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

// Binary containers exchanged between the CLI stages.
//
// Snapshot set:   "CRAPSNAP" u32 version u32 N u32 M u32 K u8 convention,
//                 then K*N*M complex128 (snapshot-major, each frame column-major).
// Calibration:    "CRAPCALB" u32 version u32 N u32 M u32 L u32 K u8 convention,
//                 K float64 singular values (zero padded), basis_h as L
//                 vectors of Q complex128, P' as L columns of Q complex128,
//                 32-byte SHA-256 of the snapshot payload.
// Periodogram:    "CRAPPGRM" u32 N' u32 M', N'*M' float32 row-major.
//
// All integers and floats are little-endian. A single runtime frame is stored
// as a snapshot set with K = 1.

#include "isac/clutter.hpp"
#include "isac/numerics.hpp"
#include "isac/radar.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace isac::io {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::string_view kSnapshotMagic = "CRAPSNAP";
inline constexpr std::string_view kCalibrationMagic = "CRAPCALB";
inline constexpr std::string_view kPeriodogramMagic = "CRAPPGRM";

/// Malformed, truncated or mismatched file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void put(std::ostream& os, const T& value)
{
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void put_bytes(std::ostream& os, const void* data, std::size_t bytes)
{
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

template <class T>
T get(std::istream& is, const char* what)
{
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return value;
}

inline void get_bytes(std::istream& is, void* data, std::size_t bytes, const char* what)
{
    if (!is.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes))) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
}

inline void expect_magic(std::istream& is, std::string_view magic)
{
    char buf[8] = {};
    get_bytes(is, buf, sizeof(buf), "magic");
    if (std::string_view(buf, sizeof(buf)) != magic) {
        throw FormatError("bad magic: expected " + std::string(magic));
    }
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return os;
}

inline std::ifstream open_in(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    return is;
}

inline std::uint32_t to_u32(Index v, const char* what)
{
    if (v < 0 || v > static_cast<Index>(UINT32_MAX)) {
        throw std::invalid_argument(std::string(what) + " does not fit in u32");
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace detail

inline void write_snapshots(std::ostream& os, const ClutterSnapshots& snaps)
{
    using namespace detail;
    put_bytes(os, kSnapshotMagic.data(), kSnapshotMagic.size());
    put(os, kFormatVersion);
    put(os, to_u32(snaps.n_rows, "N"));
    put(os, to_u32(snaps.n_cols, "M"));
    put(os, to_u32(snaps.count(), "K"));
    put(os, kColumnMajor);
    ComplexVector row(snaps.dimension());
    for (Index k = 0; k < snaps.count(); ++k) {
        row = snaps.c.row(k).transpose();
        put_bytes(os, row.data(), static_cast<std::size_t>(row.size()) * sizeof(cplx));
    }
    if (!os) {
        throw std::runtime_error("write_snapshots: stream error");
    }
}

inline ClutterSnapshots read_snapshots(std::istream& is)
{
    using namespace detail;
    expect_magic(is, kSnapshotMagic);
    const auto version = get<std::uint32_t>(is, "version");
    if (version != kFormatVersion) {
        throw FormatError("unsupported snapshot file version " + std::to_string(version));
    }
    ClutterSnapshots snaps;
    snaps.n_rows = get<std::uint32_t>(is, "N");
    snaps.n_cols = get<std::uint32_t>(is, "M");
    const Index k = get<std::uint32_t>(is, "K");
    const auto convention = get<std::uint8_t>(is, "convention");
    if (convention != kColumnMajor) {
        throw FormatError("unsupported vectorisation convention " + std::to_string(convention));
    }
    if (snaps.n_rows < 1 || snaps.n_cols < 1 || k < 1) {
        throw FormatError("snapshot file has empty dimensions");
    }
    snaps.c.resize(k, snaps.n_rows * snaps.n_cols);
    ComplexVector row(snaps.c.cols());
    for (Index i = 0; i < k; ++i) {
        get_bytes(is, row.data(), static_cast<std::size_t>(row.size()) * sizeof(cplx), "snapshot payload");
        snaps.c.row(i) = row.transpose();
    }
    if (!snaps.c.allFinite()) {
        throw FormatError("snapshot payload contains NaN or Inf");
    }
    return snaps;
}

inline void write_calibration(std::ostream& os, const ClutterCalibration& cal)
{
    using namespace detail;
    put_bytes(os, kCalibrationMagic.data(), kCalibrationMagic.size());
    put(os, kFormatVersion);
    put(os, to_u32(cal.n_rows, "N"));
    put(os, to_u32(cal.n_cols, "M"));
    put(os, to_u32(cal.order(), "L"));
    put(os, to_u32(cal.n_snapshots, "K"));
    put(os, cal.convention);
    for (Index i = 0; i < cal.n_snapshots; ++i) {
        const double s = i < cal.singular_values.size() ? cal.singular_values(i) : 0.0;
        put(os, s);
    }
    ComplexVector vec(cal.dimension());
    for (Index l = 0; l < cal.order(); ++l) {
        vec = cal.basis_h.row(l).transpose();
        put_bytes(os, vec.data(), static_cast<std::size_t>(vec.size()) * sizeof(cplx));
    }
    for (Index l = 0; l < cal.order(); ++l) {
        vec = cal.projection_factor.col(l);
        put_bytes(os, vec.data(), static_cast<std::size_t>(vec.size()) * sizeof(cplx));
    }
    put_bytes(os, cal.snapshot_hash.data(), cal.snapshot_hash.size());
    if (!os) {
        throw std::runtime_error("write_calibration: stream error");
    }
}

inline ClutterCalibration read_calibration(std::istream& is)
{
    using namespace detail;
    expect_magic(is, kCalibrationMagic);
    const auto version = get<std::uint32_t>(is, "version");
    if (version != kFormatVersion) {
        throw FormatError("unsupported calibration file version " + std::to_string(version));
    }
    ClutterCalibration cal;
    cal.n_rows = get<std::uint32_t>(is, "N");
    cal.n_cols = get<std::uint32_t>(is, "M");
    const Index l = get<std::uint32_t>(is, "L");
    cal.n_snapshots = get<std::uint32_t>(is, "K");
    cal.convention = get<std::uint8_t>(is, "convention");
    if (cal.convention != kColumnMajor) {
        throw FormatError("unsupported vectorisation convention " + std::to_string(cal.convention));
    }
    if (cal.n_rows < 1 || cal.n_cols < 1 || cal.n_snapshots < 1 || l > cal.n_snapshots) {
        throw FormatError("calibration header inconsistent");
    }
    cal.singular_values.resize(cal.n_snapshots);
    get_bytes(is, cal.singular_values.data(), static_cast<std::size_t>(cal.n_snapshots) * sizeof(double),
              "singular values");
    const Index q = cal.dimension();
    cal.basis_h.resize(l, q);
    cal.projection_factor.resize(q, l);
    ComplexVector vec(q);
    for (Index i = 0; i < l; ++i) {
        get_bytes(is, vec.data(), static_cast<std::size_t>(q) * sizeof(cplx), "basis");
        cal.basis_h.row(i) = vec.transpose();
    }
    for (Index i = 0; i < l; ++i) {
        get_bytes(is, cal.projection_factor.col(i).data(), static_cast<std::size_t>(q) * sizeof(cplx),
                  "projection factor");
    }
    get_bytes(is, cal.snapshot_hash.data(), cal.snapshot_hash.size(), "snapshot hash");
    cal.report.requested_order = l;
    cal.report.numerical_rank = l;
    if (!cal.basis_h.allFinite() || !cal.projection_factor.allFinite()) {
        throw FormatError("calibration payload contains NaN or Inf");
    }
    return cal;
}

inline void write_periodogram(std::ostream& os, const Periodogram& pg)
{
    using namespace detail;
    put_bytes(os, kPeriodogramMagic.data(), kPeriodogramMagic.size());
    put(os, to_u32(pg.n_prime(), "N'"));
    put(os, to_u32(pg.m_prime(), "M'"));
    std::vector<float> row(static_cast<std::size_t>(pg.m_prime()));
    for (Index n = 0; n < pg.n_prime(); ++n) {
        for (Index m = 0; m < pg.m_prime(); ++m) {
            row[static_cast<std::size_t>(m)] = static_cast<float>(pg.values(n, m));
        }
        put_bytes(os, row.data(), row.size() * sizeof(float));
    }
    if (!os) {
        throw std::runtime_error("write_periodogram: stream error");
    }
}

/// Values only; the complex spectrum is not stored.
inline RealMatrix read_periodogram_values(std::istream& is)
{
    using namespace detail;
    expect_magic(is, kPeriodogramMagic);
    const Index np = get<std::uint32_t>(is, "N'");
    const Index mp = get<std::uint32_t>(is, "M'");
    RealMatrix values(np, mp);
    std::vector<float> row(static_cast<std::size_t>(mp));
    for (Index n = 0; n < np; ++n) {
        get_bytes(is, row.data(), row.size() * sizeof(float), "periodogram values");
        for (Index m = 0; m < mp; ++m) {
            values(n, m) = row[static_cast<std::size_t>(m)];
        }
    }
    return values;
}

inline void save_snapshots(const std::string& path, const ClutterSnapshots& snaps)
{
    auto os = detail::open_out(path);
    write_snapshots(os, snaps);
}

inline ClutterSnapshots load_snapshots(const std::string& path)
{
    auto is = detail::open_in(path);
    return read_snapshots(is);
}

inline void save_calibration(const std::string& path, const ClutterCalibration& cal)
{
    auto os = detail::open_out(path);
    write_calibration(os, cal);
}

inline ClutterCalibration load_calibration(const std::string& path)
{
    auto is = detail::open_in(path);
    return read_calibration(is);
}

inline void save_periodogram(const std::string& path, const Periodogram& pg)
{
    auto os = detail::open_out(path);
    write_periodogram(os, pg);
}

inline std::string hex(const Sha256& digest)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : digest) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

} // namespace isac::io
