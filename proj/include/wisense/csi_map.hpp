#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/common.hpp"
#include "wisense/io.hpp"
#include "wisense/sanitize.hpp"
#include "wisense/wavelet.hpp"

namespace wisense {

inline constexpr int kMapWindow = 20;  // frames per CSI map (0.2 s at 100 Hz)
inline constexpr int kMapStride = 5;   // frames between successive maps (20 Hz figures)

// Map k covers the 5 frames aligned with video frame k plus the 15 before
// them: [5k - 15, 5k + 5). The first complete map is k = 3.
inline std::pair<std::size_t, std::size_t> pose_map_window(std::size_t k) {
    if (k < 3) fail("pose_map_window: first complete map index is 3");
    return {kMapStride * k - 15, kMapStride * k + 5};
}

inline std::size_t pose_map_count(std::size_t frame_count) {
    if (frame_count < kMapWindow) return 0;
    return (frame_count - kMapWindow) / kMapStride + 1;  // k runs from 3 to 3 + count - 1
}

// Second principal component of the two antennas' amplitudes, as the rank-1
// sheet sigma_2 * u_2 * v_2^T restricted to the first antenna's rows. Rows of
// the stacked 60 x T matrix are mean-centered first; the dominant component
// (quasi-static power) is discarded, the second captures the body motion.
// Sign convention: the largest-magnitude entry of u_2 is made positive.
//
// Input matrices are subcarrier-major [30][T]; so is the output.
inline std::vector<double> pca_second_component(const std::vector<double>& amp_first,
                                                const std::vector<double>& amp_ref) {
    if (amp_first.size() != amp_ref.size()) fail("pca_second_component: size mismatch");
    if (amp_first.empty() || amp_first.size() % kSubcarrierCount != 0)
        fail("pca_second_component: input is not 30 x T");
    const std::size_t T = amp_first.size() / kSubcarrierCount;
    if (T < 2) fail("pca_second_component: need at least 2 frames");

    Eigen::MatrixXd X(2 * kSubcarrierCount, static_cast<Eigen::Index>(T));
    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        for (std::size_t t = 0; t < T; t++) {
            X(sc, static_cast<Eigen::Index>(t)) = amp_first[static_cast<std::size_t>(sc) * T + t];
            X(sc + kSubcarrierCount, static_cast<Eigen::Index>(t)) =
                amp_ref[static_cast<std::size_t>(sc) * T + t];
        }
    }
    for (Eigen::Index r = 0; r < X.rows(); r++) X.row(r).array() -= X.row(r).mean();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    std::vector<double> out(static_cast<std::size_t>(kSubcarrierCount) * T, 0.0);
    if (svd.singularValues().size() < 2) return out;
    const double sigma2 = svd.singularValues()(1);
    Eigen::VectorXd u2 = svd.matrixU().col(1);
    Eigen::VectorXd v2 = svd.matrixV().col(1);

    Eigen::Index imax = 0;
    for (Eigen::Index i = 1; i < u2.size(); i++)
        if (std::abs(u2(i)) > std::abs(u2(imax))) imax = i;
    if (u2(imax) < 0) {
        u2 = -u2;
        v2 = -v2;
    }
    for (int sc = 0; sc < kSubcarrierCount; sc++)
        for (std::size_t t = 0; t < T; t++)
            out[static_cast<std::size_t>(sc) * T + t] =
                sigma2 * u2(sc) * v2(static_cast<Eigen::Index>(t));
    return out;
}

// Per-row single-level db4 transform; each row of the 30 x T input becomes
// [T/2 approximation | T/2 detail] coefficients.
inline std::vector<double> dwt_features(const std::vector<double>& rows) {
    if (rows.empty() || rows.size() % kSubcarrierCount != 0) fail("dwt_features: input is not 30 x T");
    const std::size_t T = rows.size() / kSubcarrierCount;
    if (T % 2 != 0) fail("dwt_features: window length must be even");
    std::vector<double> out(rows.size());
    std::vector<double> row(T), approx, detail;
    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        const std::size_t base = static_cast<std::size_t>(sc) * T;
        for (std::size_t t = 0; t < T; t++) row[t] = rows[base + t];
        dwt_db4(row, approx, detail);
        for (std::size_t t = 0; t < T / 2; t++) {
            out[base + t] = approx[t];
            out[base + T / 2 + t] = detail[t];
        }
    }
    return out;
}

namespace map_detail {

inline void minmax01(std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi == lo) {
        for (double& x : v) x = 0.5;  // constant channel carries no contrast
        return;
    }
    const double inv = 1.0 / (hi - lo);
    // (x - lo) * inv can land one ulp outside [0, 1]; clamp so consumers can
    // rely on the interval exactly.
    for (double& x : v) x = std::min(1.0, std::max(0.0, (x - lo) * inv));
}

}  // namespace map_detail

// One receiver's 30 x 20 x 2 input patch: a denoised amplitude channel and a
// relative-phase channel, each min-max normalized into [0, 1].
struct CsiMap {
    int receiver = 0;
    std::size_t begin = 0, end = 0;  // frame window
    std::array<double, static_cast<std::size_t>(kSubcarrierCount) * kMapWindow> amp{};
    std::array<double, static_cast<std::size_t>(kSubcarrierCount) * kMapWindow> phase{};
};

// Build the map from a sanitized window slice [begin, end) (must be exactly 20
// frames inside the streams' window). Amplitude channel: second principal
// component of the two antennas' amplitudes, then per-row db4 split, then
// min-max. Phase channel: min-max of the relative phase.
inline CsiMap build_csi_map(const SanitizedStreams& s, std::size_t begin, std::size_t end,
                            int receiver) {
    if (begin < s.begin || end > s.end || begin >= end) fail("build_csi_map: window outside streams");
    const std::size_t T = end - begin;
    if (T != kMapWindow)
        fail("build_csi_map: window must be exactly " + std::to_string(kMapWindow) + " frames");
    const std::size_t n = s.frame_count();
    const std::size_t off = begin - s.begin;

    std::vector<double> a1(static_cast<std::size_t>(kSubcarrierCount) * T);
    std::vector<double> a2(a1.size());
    std::vector<double> ph(a1.size());
    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        for (std::size_t t = 0; t < T; t++) {
            const std::size_t src = static_cast<std::size_t>(sc) * n + off + t;
            const std::size_t dst = static_cast<std::size_t>(sc) * T + t;
            a1[dst] = s.amp_first[src];
            a2[dst] = s.amp_ref[src];
            ph[dst] = s.rel_phase[src];
        }
    }
    std::vector<double> amp = dwt_features(pca_second_component(a1, a2));
    map_detail::minmax01(amp);
    map_detail::minmax01(ph);

    CsiMap map;
    map.receiver = receiver;
    map.begin = begin;
    map.end = end;
    std::copy(amp.begin(), amp.end(), map.amp.begin());
    std::copy(ph.begin(), ph.end(), map.phase.begin());
    return map;
}

// Network input: 30 x 20 x 4, channels [rx1 amp, rx1 phase, rx2 amp, rx2 phase].
struct NetInput {
    std::size_t begin = 0, end = 0;
    std::vector<double> v;  // (sc * 20 + t) * 4 + channel

    double at(int sc, int t, int ch) const {
        return v[(static_cast<std::size_t>(sc) * kMapWindow + static_cast<std::size_t>(t)) * 4 +
                 static_cast<std::size_t>(ch)];
    }
};

inline NetInput stack_receivers(const CsiMap& rx1, const CsiMap& rx2) {
    if (rx1.begin != rx2.begin || rx1.end != rx2.end)
        fail("stack_receivers: receiver maps cover different frame windows");
    NetInput in;
    in.begin = rx1.begin;
    in.end = rx1.end;
    in.v.resize(static_cast<std::size_t>(kSubcarrierCount) * kMapWindow * 4);
    for (std::size_t i = 0; i < rx1.amp.size(); i++) {
        in.v[i * 4 + 0] = rx1.amp[i];
        in.v[i * 4 + 1] = rx1.phase[i];
        in.v[i * 4 + 2] = rx2.amp[i];
        in.v[i * 4 + 3] = rx2.phase[i];
    }
    return in;
}

// ---- NetInput CSV ------------------------------------------------------------

inline void write_netinput(const std::string& path, const NetInput& in) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "# begin = " << in.begin << "\n# end = " << in.end << "\n";
    out << "sc,t,rx1_amp,rx1_phase,rx2_amp,rx2_phase\n";
    for (int sc = 0; sc < kSubcarrierCount; sc++)
        for (int t = 0; t < kMapWindow; t++)
            out << sc << ',' << t << ',' << fmt_g17(in.at(sc, t, 0)) << ',' << fmt_g17(in.at(sc, t, 1))
                << ',' << fmt_g17(in.at(sc, t, 2)) << ',' << fmt_g17(in.at(sc, t, 3)) << "\n";
    if (!out) fail("write failed: " + path);
}

inline NetInput read_netinput(const std::string& path) {
    const std::vector<std::string> lines = io_detail::read_lines(path);
    NetInput in;
    in.v.assign(static_cast<std::size_t>(kSubcarrierCount) * kMapWindow * 4, -1.0);
    std::size_t i = 0;
    for (; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = io_detail::trim(t.substr(1, eq - 1));
            const std::string val = io_detail::trim(t.substr(eq + 1));
            const std::string where = path + " line " + std::to_string(i + 1);
            if (key == "begin") in.begin = io_detail::parse_u64(val, where);
            if (key == "end") in.end = io_detail::parse_u64(val, where);
            continue;
        }
        break;
    }
    if (i >= lines.size() || io_detail::trim(lines[i]) != "sc,t,rx1_amp,rx1_phase,rx2_amp,rx2_phase")
        fail(path + " line " + std::to_string(i + 1) +
             ": expected header 'sc,t,rx1_amp,rx1_phase,rx2_amp,rx2_phase'");
    std::size_t rows = 0;
    for (i++; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        const std::string where = path + " line " + std::to_string(i + 1);
        const auto cols = io_detail::split(t, ',');
        if (cols.size() != 6) fail(where + ": expected 6 columns");
        const int sc = io_detail::parse_int(cols[0], where);
        const int tt = io_detail::parse_int(cols[1], where);
        if (sc < 0 || sc >= kSubcarrierCount) fail(where + ": subcarrier out of range");
        if (tt < 0 || tt >= kMapWindow) fail(where + ": time index out of range");
        for (int ch = 0; ch < 4; ch++) {
            const double v = io_detail::parse_double(cols[static_cast<std::size_t>(ch) + 2], where);
            if (v < 0.0 || v > 1.0) fail(where + ": map values must lie in [0, 1]");
            in.v[(static_cast<std::size_t>(sc) * kMapWindow + static_cast<std::size_t>(tt)) * 4 +
                 static_cast<std::size_t>(ch)] = v;
        }
        rows++;
    }
    if (rows != static_cast<std::size_t>(kSubcarrierCount) * kMapWindow)
        fail(path + ": expected " + std::to_string(kSubcarrierCount * kMapWindow) + " rows, got " +
             std::to_string(rows));
    return in;
}

}  // namespace wisense
