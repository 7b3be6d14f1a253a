#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/io.hpp"

namespace wisense {

// Propagation path that does not move: a fixed length and attenuation. Seen
// identically by all receive antennas (broadside arrival).
struct StaticPath {
    double length_m = 0.0;
    double attenuation = 0.0;
};

// Point reflector gliding from start to end at constant speed (it stops at the
// end point). Carries its own transmitter/receiver coordinates so a second
// receiver is just a second scenario with a shifted rx.
struct MovingReflector {
    double start_x = 0.0, start_y = 0.0;
    double end_x = 0.0, end_y = 0.0;
    double speed_mps = 0.0;
    double attenuation = 0.0;
    double tx_x = 0.0, tx_y = 0.0;
    double rx_x = 0.0, rx_y = 0.0;
};

// Sinusoidal chest displacement riding on a fixed base path. incidence_cos
// sets how much extra path each successive antenna element sees (as a
// fraction of the half-wavelength element spacing), i.e. where along the
// array axis the breather sits. apnea intervals freeze the displacement at
// its entry value.
struct ChestModel {
    double rate_bpm = 15.0;
    double displacement_amp_m = 0.005;
    double base_path_length_m = 2.0;
    double attenuation = 0.3;
    double incidence_cos = 0.5;
    std::vector<std::pair<double, double>> apnea_intervals;
};

enum class PhaseOffsetMode { none, per_packet_random };

struct Scenario {
    double duration_s = 0.0;
    double sample_rate_hz = 100.0;
    double carrier_hz = 5.28e9;
    std::vector<StaticPath> static_paths;
    std::vector<MovingReflector> reflectors;
    std::optional<ChestModel> chest;
    std::optional<double> noise_snr_db;
    PhaseOffsetMode phase_offset = PhaseOffsetMode::none;
    std::uint64_t seed = 0;
    std::string label;

    void validate() const {
        if (!(duration_s > 0)) fail("scenario: duration_s must be positive");
        if (!(sample_rate_hz > 0) || sample_rate_hz > 1e6)
            fail("scenario: sample_rate_hz must be in (0, 1e6]");
        if (!(carrier_hz > 18.125e6)) fail("scenario: carrier_hz too small for the subcarrier grid");
        if (static_paths.empty()) fail("scenario: need at least one static path (the LoS)");
        for (const StaticPath& p : static_paths) {
            if (!(p.length_m > 0)) fail("scenario: static path length must be positive");
            if (p.attenuation < 0) fail("scenario: static path attenuation must be >= 0");
        }
        for (const MovingReflector& r : reflectors) {
            if (r.speed_mps < 0) fail("scenario: reflector speed must be >= 0");
            if (r.attenuation < 0) fail("scenario: reflector attenuation must be >= 0");
        }
        if (chest) {
            if (chest->rate_bpm < 10.0 || chest->rate_bpm > 37.0)
                fail("scenario: chest rate_bpm must lie in [10, 37]");
            if (!(chest->displacement_amp_m > 0)) fail("scenario: chest amplitude must be positive");
            if (!(chest->base_path_length_m > 0)) fail("scenario: chest base path must be positive");
            if (chest->attenuation < 0) fail("scenario: chest attenuation must be >= 0");
            if (chest->incidence_cos < -1.0 || chest->incidence_cos > 1.0)
                fail("scenario: chest incidence_cos must lie in [-1, 1]");
            double prev_end = 0.0;
            for (const auto& [s, e] : chest->apnea_intervals) {
                if (!(s < e)) fail("scenario: apnea interval start must precede end");
                if (s < 0 || e > duration_s) fail("scenario: apnea interval outside the trace");
                if (s < prev_end) fail("scenario: apnea intervals overlap or are unordered");
                prev_end = e;
            }
        }
    }
};

// ---- Scenario file format ---------------------------------------------------
//
//   duration_s = 60
//   sample_rate_hz = 100
//   carrier_hz = 5.68e9
//   seed = 7
//   label = bedroom baseline
//   noise_snr_db = 10
//   phase_offset = per-packet-random
//   static_path = length_m=2.0 attenuation=1.0
//   reflector = start=1.5,2.0 end=3.5,2.0 speed_mps=0.4 attenuation=0.5 tx=0,0 rx=4,0
//   chest = rate_bpm=12 amp_m=0.005 base_m=2.6 attenuation=0.3 incidence_cos=0.5
//   apnea = 18.75 43.75
//
// '#' lines are comments. Repeated keys build lists; apnea lines attach to the
// chest entry.

namespace scenario_detail {

inline std::pair<double, double> parse_xy(const std::string& s, const std::string& where) {
    const auto parts = io_detail::split(s, ',');
    if (parts.size() != 2) fail(where + ": expected 'x,y', got '" + s + "'");
    return {io_detail::parse_double(parts[0], where), io_detail::parse_double(parts[1], where)};
}

// Tokenize "k1=v1 k2=v2 ..." fields of a structured entry.
inline std::vector<std::pair<std::string, std::string>> parse_fields(const std::string& s,
                                                                     const std::string& where) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) fail(where + ": expected key=value, got '" + tok + "'");
        out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return out;
}

}  // namespace scenario_detail

inline Scenario read_scenario(const std::string& path) {
    const std::vector<std::string> lines = io_detail::read_lines(path);
    Scenario s;
    bool have_duration = false;
    std::vector<std::pair<double, double>> apneas;

    for (std::size_t i = 0; i < lines.size(); i++) {
        const std::string line = io_detail::trim(lines[i]);
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path + " line " + std::to_string(i + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(where + ": expected 'key = value'");
        const std::string key = io_detail::trim(line.substr(0, eq));
        const std::string val = io_detail::trim(line.substr(eq + 1));

        if (key == "duration_s") {
            s.duration_s = io_detail::parse_double(val, where);
            have_duration = true;
        } else if (key == "sample_rate_hz") {
            s.sample_rate_hz = io_detail::parse_double(val, where);
        } else if (key == "carrier_hz") {
            s.carrier_hz = io_detail::parse_double(val, where);
        } else if (key == "seed") {
            s.seed = io_detail::parse_u64(val, where);
        } else if (key == "label") {
            s.label = val;
        } else if (key == "noise_snr_db") {
            s.noise_snr_db = io_detail::parse_double(val, where);
        } else if (key == "phase_offset") {
            if (val == "none")
                s.phase_offset = PhaseOffsetMode::none;
            else if (val == "per-packet-random")
                s.phase_offset = PhaseOffsetMode::per_packet_random;
            else
                fail(where + ": phase_offset must be 'none' or 'per-packet-random'");
        } else if (key == "static_path") {
            StaticPath p;
            for (const auto& [k, v] : scenario_detail::parse_fields(val, where)) {
                if (k == "length_m")
                    p.length_m = io_detail::parse_double(v, where);
                else if (k == "attenuation")
                    p.attenuation = io_detail::parse_double(v, where);
                else
                    fail(where + ": unknown static_path field '" + k + "'");
            }
            s.static_paths.push_back(p);
        } else if (key == "reflector") {
            MovingReflector r;
            for (const auto& [k, v] : scenario_detail::parse_fields(val, where)) {
                if (k == "start")
                    std::tie(r.start_x, r.start_y) = scenario_detail::parse_xy(v, where);
                else if (k == "end")
                    std::tie(r.end_x, r.end_y) = scenario_detail::parse_xy(v, where);
                else if (k == "speed_mps")
                    r.speed_mps = io_detail::parse_double(v, where);
                else if (k == "attenuation")
                    r.attenuation = io_detail::parse_double(v, where);
                else if (k == "tx")
                    std::tie(r.tx_x, r.tx_y) = scenario_detail::parse_xy(v, where);
                else if (k == "rx")
                    std::tie(r.rx_x, r.rx_y) = scenario_detail::parse_xy(v, where);
                else
                    fail(where + ": unknown reflector field '" + k + "'");
            }
            s.reflectors.push_back(r);
        } else if (key == "chest") {
            ChestModel c;
            for (const auto& [k, v] : scenario_detail::parse_fields(val, where)) {
                if (k == "rate_bpm")
                    c.rate_bpm = io_detail::parse_double(v, where);
                else if (k == "amp_m")
                    c.displacement_amp_m = io_detail::parse_double(v, where);
                else if (k == "base_m")
                    c.base_path_length_m = io_detail::parse_double(v, where);
                else if (k == "attenuation")
                    c.attenuation = io_detail::parse_double(v, where);
                else if (k == "incidence_cos")
                    c.incidence_cos = io_detail::parse_double(v, where);
                else
                    fail(where + ": unknown chest field '" + k + "'");
            }
            s.chest = c;
        } else if (key == "apnea") {
            std::istringstream iss(val);
            double a = 0, b = 0;
            if (!(iss >> a >> b)) fail(where + ": apnea needs 'start_s end_s'");
            apneas.emplace_back(a, b);
        } else {
            fail(where + ": unknown key '" + key + "'");
        }
    }
    if (!have_duration) fail(path + ": missing duration_s");
    if (!apneas.empty()) {
        if (!s.chest) fail(path + ": apnea lines require a chest entry");
        s.chest->apnea_intervals = std::move(apneas);
    }
    s.validate();
    return s;
}

inline void write_scenario(const std::string& path, const Scenario& s) {
    s.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "duration_s = " << fmt_g17(s.duration_s) << "\n";
    out << "sample_rate_hz = " << fmt_g17(s.sample_rate_hz) << "\n";
    out << "carrier_hz = " << fmt_g17(s.carrier_hz) << "\n";
    out << "seed = " << s.seed << "\n";
    if (!s.label.empty()) out << "label = " << s.label << "\n";
    if (s.noise_snr_db) out << "noise_snr_db = " << fmt_g17(*s.noise_snr_db) << "\n";
    out << "phase_offset = "
        << (s.phase_offset == PhaseOffsetMode::none ? "none" : "per-packet-random") << "\n";
    for (const StaticPath& p : s.static_paths)
        out << "static_path = length_m=" << fmt_g17(p.length_m)
            << " attenuation=" << fmt_g17(p.attenuation) << "\n";
    for (const MovingReflector& r : s.reflectors)
        out << "reflector = start=" << fmt_g17(r.start_x) << ',' << fmt_g17(r.start_y)
            << " end=" << fmt_g17(r.end_x) << ',' << fmt_g17(r.end_y)
            << " speed_mps=" << fmt_g17(r.speed_mps) << " attenuation=" << fmt_g17(r.attenuation)
            << " tx=" << fmt_g17(r.tx_x) << ',' << fmt_g17(r.tx_y) << " rx=" << fmt_g17(r.rx_x)
            << ',' << fmt_g17(r.rx_y) << "\n";
    if (s.chest) {
        out << "chest = rate_bpm=" << fmt_g17(s.chest->rate_bpm)
            << " amp_m=" << fmt_g17(s.chest->displacement_amp_m)
            << " base_m=" << fmt_g17(s.chest->base_path_length_m)
            << " attenuation=" << fmt_g17(s.chest->attenuation)
            << " incidence_cos=" << fmt_g17(s.chest->incidence_cos) << "\n";
        for (const auto& [a, b] : s.chest->apnea_intervals)
            out << "apnea = " << fmt_g17(a) << ' ' << fmt_g17(b) << "\n";
    }
    if (!out) fail("write failed: " + path);
}

}  // namespace wisense
