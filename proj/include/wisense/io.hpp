#pragma once

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/common.hpp"

namespace wisense {

// %.17g: shortest decimal form that round-trips an IEEE double exactly.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace io_detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t p = s.find(sep, start);
        if (p == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, p - start));
        start = p + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    if (t.empty()) fail(where + ": empty number");
    errno = 0;
    char* endp = nullptr;
    const double v = std::strtod(t.c_str(), &endp);
    if (endp != t.c_str() + t.size() || errno == ERANGE)
        fail(where + ": bad number '" + t + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        fail(where + ": bad unsigned integer '" + t + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& where) {
    const std::string t = trim(s);
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        fail(where + ": bad integer '" + t + "'");
    return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace io_detail

// ---- CSI trace CSV ---------------------------------------------------------
//
//   # sample_rate_hz = 100
//   # carrier_hz = 5280000000
//   # label = whatever
//   t_us,rx,sc,re,im
//   0,0,0,<re>,<im>
//
// One row per (frame, antenna, subcarrier), grouped by frame in timestamp
// order. Values are written with enough digits to round-trip exactly.

inline void write_trace(const std::string& path, const CsiTrace& trace) {
    trace.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "# sample_rate_hz = " << fmt_g17(trace.sample_rate_hz) << "\n";
    out << "# carrier_hz = " << fmt_g17(trace.carrier_hz) << "\n";
    out << "# label = " << trace.label << "\n";
    out << "t_us,rx,sc,re,im\n";
    for (const CsiFrame& f : trace.frames) {
        for (int a = 0; a < f.antennas; a++) {
            for (int sc = 0; sc < kSubcarrierCount; sc++) {
                const auto& v = f.at(a, sc);
                out << f.t_us << ',' << a << ',' << sc << ',' << fmt_g17(v.real()) << ','
                    << fmt_g17(v.imag()) << "\n";
            }
        }
    }
    if (!out) fail("write failed: " + path);
}

inline CsiTrace read_trace(const std::string& path) {
    const std::vector<std::string> lines = io_detail::read_lines(path);
    CsiTrace trace;
    bool have_rate = false, have_carrier = false;
    std::size_t i = 0;

    for (; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        if (t[0] != '#') break;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) continue;  // free-form comment
        const std::string key = io_detail::trim(t.substr(1, eq - 1));
        const std::string val = io_detail::trim(t.substr(eq + 1));
        const std::string where = path + " line " + std::to_string(i + 1);
        if (key == "sample_rate_hz") {
            trace.sample_rate_hz = io_detail::parse_double(val, where);
            have_rate = true;
        } else if (key == "carrier_hz") {
            trace.carrier_hz = io_detail::parse_double(val, where);
            have_carrier = true;
        } else if (key == "label") {
            trace.label = val;
        }
    }
    if (!have_rate) fail(path + ": missing '# sample_rate_hz = ...' header");
    if (!have_carrier) fail(path + ": missing '# carrier_hz = ...' header");
    if (i >= lines.size() || io_detail::trim(lines[i]) != "t_us,rx,sc,re,im")
        fail(path + " line " + std::to_string(i + 1) + ": expected header 't_us,rx,sc,re,im'");
    i++;

    // Collect rows frame by frame; a timestamp change closes the frame.
    struct Cell {
        int rx, sc;
        double re, im;
        std::size_t line;
    };
    std::uint64_t cur_t = 0;
    std::vector<Cell> cur;
    bool open = false;
    int antennas = -1;
    std::size_t frame_index = 0;

    auto close_frame = [&]() {
        if (cur.empty()) return;
        int max_rx = 0;
        for (const Cell& c : cur) max_rx = std::max(max_rx, c.rx);
        const int r = max_rx + 1;
        const std::string fr = "frame " + std::to_string(frame_index);
        if (r != 2 && r != 3)
            fail(path + ": " + fr + ": antenna count " + std::to_string(r) + " (expected 2 or 3)");
        if (antennas == -1) antennas = r;
        if (r != antennas) fail(path + ": " + fr + ": antenna count changed");
        CsiFrame f;
        f.t_us = cur_t;
        f.antennas = r;
        f.h.assign(static_cast<std::size_t>(r) * kSubcarrierCount, {0.0, 0.0});
        std::vector<char> seen(static_cast<std::size_t>(r) * kSubcarrierCount, 0);
        for (const Cell& c : cur) {
            const std::size_t idx =
                static_cast<std::size_t>(c.rx) * kSubcarrierCount + static_cast<std::size_t>(c.sc);
            if (seen[idx])
                fail(path + " line " + std::to_string(c.line) + ": " + fr + ": duplicate cell rx=" +
                     std::to_string(c.rx) + " sc=" + std::to_string(c.sc));
            seen[idx] = 1;
            f.h[idx] = {c.re, c.im};
        }
        for (int a = 0; a < r; a++) {
            int count = 0;
            for (int sc = 0; sc < kSubcarrierCount; sc++)
                count += seen[static_cast<std::size_t>(a) * kSubcarrierCount + sc];
            if (count != kSubcarrierCount)
                fail(path + ": " + fr + ": antenna " + std::to_string(a) + " has " +
                     std::to_string(count) + " subcarrier rows (expected 30)");
        }
        trace.frames.push_back(std::move(f));
        frame_index++;
        cur.clear();
    };

    for (; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        const std::string where = path + " line " + std::to_string(i + 1);
        const std::vector<std::string> cols = io_detail::split(t, ',');
        if (cols.size() != 5) fail(where + ": expected 5 columns, got " + std::to_string(cols.size()));
        Cell c;
        const std::uint64_t ts = io_detail::parse_u64(cols[0], where);
        c.rx = io_detail::parse_int(cols[1], where);
        c.sc = io_detail::parse_int(cols[2], where);
        c.re = io_detail::parse_double(cols[3], where);
        c.im = io_detail::parse_double(cols[4], where);
        c.line = i + 1;
        if (c.rx < 0 || c.rx > 2) fail(where + ": antenna " + std::to_string(c.rx) + " out of range");
        if (c.sc < 0 || c.sc >= kSubcarrierCount)
            fail(where + ": subcarrier " + std::to_string(c.sc) + " out of range");
        if (!open) {
            cur_t = ts;
            open = true;
        } else if (ts != cur_t) {
            if (ts < cur_t) fail(where + ": timestamps decrease");
            close_frame();
            cur_t = ts;
        }
        cur.push_back(c);
    }
    close_frame();
    if (trace.frames.empty()) fail(path + ": no frames");
    trace.validate();
    return trace;
}

// ---- PGM figures ------------------------------------------------------------

inline void write_pgm(const std::string& path, const PoseFigure& fig) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "P5\n" << kFigureCols << " " << kFigureRows << "\n255\n";
    std::vector<unsigned char> bytes(fig.px.size());
    for (std::size_t i = 0; i < fig.px.size(); i++) {
        const double v = std::min(1.0, std::max(0.0, fig.px[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("write failed: " + path);
}

inline PoseFigure read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5") fail(path + ": not a binary PGM (P5)");
    if (w != kFigureCols || h != kFigureRows)
        fail(path + ": expected " + std::to_string(kFigureCols) + "x" + std::to_string(kFigureRows) +
             ", got " + std::to_string(w) + "x" + std::to_string(h));
    if (maxval != 255) fail(path + ": expected maxval 255");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) fail(path + ": truncated pixel data");
    PoseFigure fig;
    for (std::size_t i = 0; i < bytes.size(); i++) fig.px[i] = bytes[i] / 255.0;
    return fig;
}

// ---- Scalar time series CSV (ground-truth displacement, breathing curves) --

inline void write_curve(const std::string& path, const std::vector<double>& t_s,
                        const std::vector<double>& value) {
    if (t_s.size() != value.size()) fail("write_curve: length mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "t_s,value\n";
    for (std::size_t i = 0; i < t_s.size(); i++)
        out << fmt_g17(t_s[i]) << ',' << fmt_g17(value[i]) << "\n";
    if (!out) fail("write failed: " + path);
}

inline void read_curve(const std::string& path, std::vector<double>& t_s,
                       std::vector<double>& value) {
    const std::vector<std::string> lines = io_detail::read_lines(path);
    if (lines.empty() || io_detail::trim(lines[0]) != "t_s,value")
        fail(path + ": expected header 't_s,value'");
    t_s.clear();
    value.clear();
    for (std::size_t i = 1; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        const std::string where = path + " line " + std::to_string(i + 1);
        const std::vector<std::string> cols = io_detail::split(t, ',');
        if (cols.size() != 2) fail(where + ": expected 2 columns");
        t_s.push_back(io_detail::parse_double(cols[0], where));
        value.push_back(io_detail::parse_double(cols[1], where));
    }
    if (t_s.empty()) fail(path + ": no samples");
}

}  // namespace wisense
