#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/common.hpp"
#include "wisense/rng.hpp"
#include "wisense/scenario.hpp"
#include "wisense/skeleton.hpp"

namespace wisense {

inline constexpr int kSimAntennas = 3;
inline constexpr double kSubcarrierSpanHz = 18.125e6;  // edge-to-edge across 30 carriers

// The 30 evenly spaced subcarrier frequencies around the carrier.
inline std::vector<double> subcarrier_freqs(double carrier_hz) {
    if (!(carrier_hz > kSubcarrierSpanHz)) fail("subcarrier_freqs: carrier too small");
    std::vector<double> f(kSubcarrierCount);
    const double step = kSubcarrierSpanHz / (kSubcarrierCount - 1);
    for (int k = 0; k < kSubcarrierCount; k++)
        f[static_cast<std::size_t>(k)] = carrier_hz - kSubcarrierSpanHz / 2.0 + step * k;
    return f;
}

// Response of a single propagation path: attenuation * exp(-j*2*pi*f*L/c).
inline std::complex<double> path_response(double freq_hz, double length_m, double attenuation) {
    if (!(freq_hz > 0)) fail("path_response: frequency must be positive");
    if (!(length_m > 0)) fail("path_response: length must be positive");
    if (attenuation < 0) fail("path_response: attenuation must be >= 0");
    const double phase = -2.0 * kPi * freq_hz * length_m / kSpeedOfLight;
    return std::polar(attenuation, phase);
}

// Chest displacement at time t; frozen at its entry value inside apnea
// intervals.
inline double chest_displacement(const ChestModel& chest, double t_s) {
    const double omega = 2.0 * kPi * chest.rate_bpm / 60.0;
    for (const auto& [s, e] : chest.apnea_intervals)
        if (t_s >= s && t_s < e) return chest.displacement_amp_m * std::sin(omega * s);
    return chest.displacement_amp_m * std::sin(omega * t_s);
}

struct GroundTruth {
    std::vector<double> chest_displacement_m;                      // per frame; empty if no chest
    std::vector<std::vector<std::array<double, 2>>> reflector_xy;  // per frame, per reflector
    std::vector<SkeletonParams> skeleton;                          // per frame
};

struct SimResult {
    CsiTrace trace;
    GroundTruth truth;
};

namespace sim_detail {

// Adds attenuation * exp(-j*2*pi*f_k*L/c) for the 30 subcarriers to h.
// One polar() for the first subcarrier, then a constant rotation per step.
inline void add_path(std::complex<double>* h, const std::vector<double>& freqs, double length_m,
                     double attenuation) {
    const double phase0 = -2.0 * kPi * freqs[0] * length_m / kSpeedOfLight;
    const double dphase = -2.0 * kPi * (freqs[1] - freqs[0]) * length_m / kSpeedOfLight;
    std::complex<double> contrib = std::polar(attenuation, phase0);
    const std::complex<double> step = std::polar(1.0, dphase);
    for (int k = 0; k < kSubcarrierCount; k++) {
        h[k] += contrib;
        contrib *= step;
    }
}

inline std::array<double, 2> reflector_position(const MovingReflector& r, double t_s) {
    const double dx = r.end_x - r.start_x;
    const double dy = r.end_y - r.start_y;
    const double dist = std::hypot(dx, dy);
    if (dist == 0.0 || r.speed_mps == 0.0) return {r.start_x, r.start_y};
    const double travelled = std::min(r.speed_mps * t_s, dist);
    const double f = travelled / dist;
    return {r.start_x + f * dx, r.start_y + f * dy};
}

}  // namespace sim_detail

// Renders the scenario into a CSI trace for three colinear receive antennas
// spaced half a wavelength apart along +x, plus per-frame ground truth.
//
// Per frame: static paths (identical across antennas), reflector paths
// (exact per-element geometry), the chest path (per-element extra path of
// a * lambda/2 * incidence_cos), circular complex noise scaled from the mean
// static power, and finally one shared random phase rotation per packet when
// enabled. Noise and phase draws come from independent counter-based streams,
// so disabling one never shifts the other.
inline SimResult simulate(const Scenario& sc) {
    sc.validate();
    const std::vector<double> freqs = subcarrier_freqs(sc.carrier_hz);
    const double lambda = kSpeedOfLight / sc.carrier_hz;
    const double element_dx = lambda / 2.0;
    const std::size_t n_frames =
        static_cast<std::size_t>(std::llround(sc.duration_s * sc.sample_rate_hz));
    if (n_frames == 0) fail("simulate: scenario shorter than one frame");

    // Static superposition, shared by every antenna and frame.
    std::vector<std::complex<double>> static_sum(kSubcarrierCount, {0.0, 0.0});
    for (const StaticPath& p : sc.static_paths)
        sim_detail::add_path(static_sum.data(), freqs, p.length_m, p.attenuation);

    double noise_sigma = 0.0;
    if (sc.noise_snr_db) {
        double p_static = 0.0;
        for (const auto& v : static_sum) p_static += std::norm(v);
        p_static /= kSubcarrierCount;
        noise_sigma = std::sqrt(p_static * std::pow(10.0, -*sc.noise_snr_db / 10.0));
    }
    const double noise_component_sigma = noise_sigma / std::sqrt(2.0);

    SimResult out;
    out.trace.sample_rate_hz = sc.sample_rate_hz;
    out.trace.carrier_hz = sc.carrier_hz;
    out.trace.label = sc.label;
    out.trace.frames.reserve(n_frames);
    out.truth.reflector_xy.reserve(n_frames);
    out.truth.skeleton.reserve(n_frames);
    if (sc.chest) out.truth.chest_displacement_m.reserve(n_frames);

    for (std::size_t i = 0; i < n_frames; i++) {
        const double t = static_cast<double>(i) / sc.sample_rate_hz;
        CsiFrame frame;
        frame.t_us = static_cast<std::uint64_t>(std::llround(t * 1e6));
        frame.antennas = kSimAntennas;
        frame.h.assign(static_cast<std::size_t>(kSimAntennas) * kSubcarrierCount, {0.0, 0.0});

        std::vector<std::array<double, 2>> refl_pos;
        for (const MovingReflector& r : sc.reflectors)
            refl_pos.push_back(sim_detail::reflector_position(r, t));

        double displacement = 0.0;
        if (sc.chest) {
            displacement = chest_displacement(*sc.chest, t);
            out.truth.chest_displacement_m.push_back(displacement);
        }

        for (int a = 0; a < kSimAntennas; a++) {
            std::complex<double>* h = &frame.at(a, 0);
            for (int k = 0; k < kSubcarrierCount; k++) h[k] = static_sum[static_cast<std::size_t>(k)];
            for (std::size_t ri = 0; ri < sc.reflectors.size(); ri++) {
                const MovingReflector& r = sc.reflectors[ri];
                const auto& pos = refl_pos[ri];
                const double rx_ax = r.rx_x + a * element_dx;
                const double length = std::hypot(pos[0] - r.tx_x, pos[1] - r.tx_y) +
                                      std::hypot(pos[0] - rx_ax, pos[1] - r.rx_y);
                sim_detail::add_path(h, freqs, length, r.attenuation);
            }
            if (sc.chest) {
                const double length = sc.chest->base_path_length_m + displacement +
                                      a * element_dx * sc.chest->incidence_cos;
                sim_detail::add_path(h, freqs, length, sc.chest->attenuation);
            }
            if (noise_sigma > 0.0) {
                for (int k = 0; k < kSubcarrierCount; k++) {
                    double g0 = 0.0, g1 = 0.0;
                    rng::gauss_pair(rng::key(sc.seed, rng::kStreamNoise, i,
                                             static_cast<std::uint64_t>(a),
                                             static_cast<std::uint64_t>(k)),
                                    g0, g1);
                    h[k] += std::complex<double>(noise_component_sigma * g0,
                                                 noise_component_sigma * g1);
                }
            }
        }

        if (sc.phase_offset == PhaseOffsetMode::per_packet_random) {
            const double theta =
                2.0 * kPi * rng::uniform01(rng::key(sc.seed, rng::kStreamPhaseOffset, i));
            const std::complex<double> rot = std::polar(1.0, theta);
            for (auto& v : frame.h) v *= rot;
        }

        out.truth.reflector_xy.push_back(std::move(refl_pos));
        if (sc.reflectors.empty()) {
            out.truth.skeleton.push_back({});
        } else {
            const MovingReflector& r = sc.reflectors.front();
            const double dist = std::hypot(r.end_x - r.start_x, r.end_y - r.start_y);
            const double progress =
                dist > 0 && r.speed_mps > 0 ? std::min(r.speed_mps * t, dist) / dist : 0.0;
            out.truth.skeleton.push_back(walker_pose(progress));
        }
        out.trace.frames.push_back(std::move(frame));
    }
    out.trace.validate();
    return out;
}

}  // namespace wisense
