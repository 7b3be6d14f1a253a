#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "support/oracles.hpp"
#include "wisense/simulate.hpp"

using namespace wisense;

namespace {

Scenario static_only() {
    Scenario s;
    s.duration_s = 0.5;
    s.sample_rate_hz = 100.0;
    s.carrier_hz = 5.28e9;
    s.static_paths.push_back({2.0, 1.0});
    s.static_paths.push_back({3.7, 0.4});
    s.static_paths.push_back({5.1, 0.15});
    return s;
}

}  // namespace

TEST_CASE("subcarrier grid is centered on the carrier", "[simulate]") {
    const std::vector<double> f = subcarrier_freqs(5.28e9);
    REQUIRE(f.size() == 30);
    REQUIRE(f.front() == Catch::Approx(5.28e9 - 9.0625e6));
    REQUIRE(f.back() == Catch::Approx(5.28e9 + 9.0625e6));
    const double step = f[1] - f[0];
    REQUIRE(step == Catch::Approx(18.125e6 / 29.0));
    for (std::size_t k = 1; k < f.size(); k++)
        REQUIRE(f[k] - f[k - 1] == Catch::Approx(step).epsilon(1e-12));
}

TEST_CASE("path_response is the textbook narrowband term", "[simulate]") {
    const double f = 5.0e9, L = 3.25, a = 0.7;
    const std::complex<double> h = path_response(f, L, a);
    const double expected_phase = -2.0 * kPi * f * L / 299792458.0;
    REQUIRE(std::abs(h) == Catch::Approx(a));
    REQUIRE(std::abs(h - std::polar(a, expected_phase)) < 1e-12);
}

TEST_CASE("noise-free static scene matches the superposition oracle", "[simulate]") {
    const Scenario sc = static_only();
    const SimResult res = simulate(sc);
    const std::vector<double> freqs = subcarrier_freqs(sc.carrier_hz);
    const auto oracle_h = oracle::channel_superposition(
        freqs, {{2.0, 1.0}, {3.7, 0.4}, {5.1, 0.15}});
    for (const CsiFrame& frame : res.trace.frames)
        for (int a = 0; a < frame.antennas; a++)
            for (int sc_i = 0; sc_i < kSubcarrierCount; sc_i++)
                REQUIRE(std::abs(frame.at(a, sc_i) - oracle_h[static_cast<std::size_t>(sc_i)]) <
                        1e-9);
}

TEST_CASE("chest path adds the oracle term with sinusoidal displacement", "[simulate]") {
    Scenario sc = static_only();
    ChestModel chest;
    chest.rate_bpm = 15.0;
    chest.displacement_amp_m = 0.005;
    chest.base_path_length_m = 2.6;
    chest.attenuation = 0.3;
    chest.incidence_cos = 0.5;
    sc.chest = chest;
    sc.duration_s = 4.0;
    const SimResult res = simulate(sc);
    const std::vector<double> freqs = subcarrier_freqs(sc.carrier_hz);
    const double lambda = 299792458.0 / sc.carrier_hz;

    REQUIRE(res.truth.chest_displacement_m.size() == res.trace.frames.size());
    for (std::size_t i = 0; i < res.trace.frames.size(); i += 37) {
        const double t = static_cast<double>(i) / sc.sample_rate_hz;
        const double d = 0.005 * std::sin(2.0 * kPi * (15.0 / 60.0) * t);
        REQUIRE(res.truth.chest_displacement_m[i] == Catch::Approx(d).margin(1e-12));
        for (int a = 0; a < 3; a++) {
            const double chest_len = 2.6 + d + a * (lambda / 2.0) * 0.5;
            const auto h = oracle::channel_superposition(
                freqs, {{2.0, 1.0}, {3.7, 0.4}, {5.1, 0.15}, {chest_len, 0.3}});
            for (int k = 0; k < kSubcarrierCount; k++)
                REQUIRE(std::abs(res.trace.frames[i].at(a, k) - h[static_cast<std::size_t>(k)]) <
                        1e-9);
        }
    }
}

TEST_CASE("apnea freezes the displacement at its entry value", "[simulate]") {
    ChestModel chest;
    chest.rate_bpm = 12.0;
    chest.apnea_intervals.emplace_back(10.0, 20.0);
    const double d_entry = chest_displacement(chest, 10.0);
    for (double t : {10.0, 12.5, 15.0, 19.99})
        REQUIRE(chest_displacement(chest, t) == d_entry);
    REQUIRE(chest_displacement(chest, 9.99) != d_entry);
    // displacement is continuous at the exit too when the entry phase repeats
    REQUIRE(chest_displacement(chest, 20.0) ==
            chest.displacement_amp_m * std::sin(2.0 * kPi * 0.2 * 20.0));
}

TEST_CASE("injected noise power matches the requested SNR", "[simulate]") {
    Scenario sc = static_only();
    sc.duration_s = 20.0;
    sc.noise_snr_db = 10.0;
    sc.seed = 77;
    const Scenario clean_sc = [&] {
        Scenario c = sc;
        c.noise_snr_db.reset();
        return c;
    }();
    const SimResult noisy = simulate(sc);
    const SimResult clean = simulate(clean_sc);

    double p_static = 0.0, p_noise = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < noisy.trace.frames.size(); i++)
        for (int a = 0; a < 3; a++)
            for (int k = 0; k < kSubcarrierCount; k++) {
                p_static += std::norm(clean.trace.frames[i].at(a, k));
                p_noise += std::norm(noisy.trace.frames[i].at(a, k) - clean.trace.frames[i].at(a, k));
                count++;
            }
    const double snr_db = 10.0 * std::log10(p_static / p_noise);
    REQUIRE(snr_db == Catch::Approx(10.0).margin(0.2));
    (void)count;
}

TEST_CASE("per-packet phase offset rotates whole frames", "[simulate]") {
    Scenario sc = static_only();
    sc.phase_offset = PhaseOffsetMode::per_packet_random;
    sc.seed = 5;
    const SimResult rotated = simulate(sc);
    sc.phase_offset = PhaseOffsetMode::none;
    const SimResult clean = simulate(sc);
    bool any_rotation = false;
    for (std::size_t i = 0; i < clean.trace.frames.size(); i++) {
        // ratio rotated/clean must be one unit phasor common to all cells
        const std::complex<double> ref =
            rotated.trace.frames[i].at(0, 0) / clean.trace.frames[i].at(0, 0);
        REQUIRE(std::abs(std::abs(ref) - 1.0) < 1e-12);
        if (std::abs(ref - std::complex<double>(1.0, 0.0)) > 1e-3) any_rotation = true;
        for (int a = 0; a < 3; a++)
            for (int k = 0; k < kSubcarrierCount; k++) {
                const std::complex<double> r =
                    rotated.trace.frames[i].at(a, k) / clean.trace.frames[i].at(a, k);
                REQUIRE(std::abs(r - ref) < 1e-9);
            }
    }
    REQUIRE(any_rotation);
}

TEST_CASE("same seed reproduces the trace, another seed does not", "[simulate]") {
    Scenario sc = static_only();
    sc.noise_snr_db = 15.0;
    sc.seed = 9;
    const SimResult a = simulate(sc);
    const SimResult b = simulate(sc);
    REQUIRE(a.trace.frames.size() == b.trace.frames.size());
    for (std::size_t i = 0; i < a.trace.frames.size(); i++)
        REQUIRE(a.trace.frames[i].h == b.trace.frames[i].h);
    sc.seed = 10;
    const SimResult c = simulate(sc);
    bool differs = false;
    for (std::size_t i = 0; i < a.trace.frames.size() && !differs; i++)
        differs = a.trace.frames[i].h != c.trace.frames[i].h;
    REQUIRE(differs);
}

TEST_CASE("reflector ground truth follows the straight-line glide", "[simulate]") {
    Scenario sc = static_only();
    MovingReflector r;
    r.start_x = 1.0;
    r.start_y = 2.0;
    r.end_x = 2.0;
    r.end_y = 2.0;
    r.speed_mps = 1.0;
    r.attenuation = 0.4;
    r.rx_x = 4.0;
    sc.reflectors.push_back(r);
    sc.duration_s = 2.0;
    const SimResult res = simulate(sc);
    // at t=0.5 s it has moved 0.5 m of the 1 m course
    const auto& pos = res.truth.reflector_xy[50][0];
    REQUIRE(pos[0] == Catch::Approx(1.5));
    REQUIRE(pos[1] == Catch::Approx(2.0));
    // it stops at the end point
    const auto& last = res.truth.reflector_xy.back()[0];
    REQUIRE(last[0] == Catch::Approx(2.0));
    // and the skeleton tracks progress
    REQUIRE(res.truth.skeleton.size() == res.trace.frames.size());
    REQUIRE(res.truth.skeleton[50].segments.size() == 5);
}
