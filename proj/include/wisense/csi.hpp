#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "wisense/common.hpp"

namespace wisense {

inline constexpr int kSubcarrierCount = 30;
inline constexpr int kFigureRows = 120;
inline constexpr int kFigureCols = 160;

// One CSI packet: complex channel estimates for every (antenna, subcarrier)
// cell, antenna-major.
struct CsiFrame {
    std::uint64_t t_us = 0;
    int antennas = 0;
    std::vector<std::complex<double>> h;

    std::complex<double>& at(int antenna, int sc) {
        return h[static_cast<std::size_t>(antenna) * kSubcarrierCount +
                 static_cast<std::size_t>(sc)];
    }
    const std::complex<double>& at(int antenna, int sc) const {
        return h[static_cast<std::size_t>(antenna) * kSubcarrierCount +
                 static_cast<std::size_t>(sc)];
    }
};

struct CsiTrace {
    double sample_rate_hz = 0.0;
    double carrier_hz = 0.0;
    std::string label;
    std::vector<CsiFrame> frames;

    double duration_s() const {
        return sample_rate_hz > 0 ? static_cast<double>(frames.size()) / sample_rate_hz : 0.0;
    }

    // Structural checks shared by the reader and the simulator. Frame indices
    // in messages are zero-based.
    void validate() const {
        if (!(sample_rate_hz > 0)) fail("trace: sample_rate_hz must be positive");
        if (!(carrier_hz > 0)) fail("trace: carrier_hz must be positive");
        if (frames.empty()) fail("trace: no frames");
        const int r = frames.front().antennas;
        if (r != 2 && r != 3) fail("trace: antenna count must be 2 or 3");
        const double nominal_us = 1.0e6 / sample_rate_hz;
        for (std::size_t i = 0; i < frames.size(); i++) {
            const CsiFrame& f = frames[i];
            if (f.antennas != r)
                fail("trace: frame " + std::to_string(i) + ": antenna count changed");
            if (f.h.size() != static_cast<std::size_t>(r) * kSubcarrierCount)
                fail("trace: frame " + std::to_string(i) + ": wrong cell count");
            for (const auto& v : f.h)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    fail("trace: frame " + std::to_string(i) + ": non-finite value");
            if (i > 0) {
                if (f.t_us <= frames[i - 1].t_us)
                    fail("trace: frame " + std::to_string(i) + ": timestamps not increasing");
                const double gap = static_cast<double>(f.t_us - frames[i - 1].t_us);
                if (std::abs(gap - nominal_us) > 0.1 * nominal_us)
                    fail("trace: frame " + std::to_string(i) + ": spacing " +
                         std::to_string(gap) + " us deviates more than 10% from nominal");
            }
        }
    }
};

// |h| for every cell of a frame, antenna-major (same layout as CsiFrame::h).
inline std::vector<double> amplitude(const CsiFrame& f) {
    std::vector<double> a(f.h.size());
    for (std::size_t i = 0; i < f.h.size(); i++) a[i] = std::abs(f.h[i]);
    return a;
}

// Mean over subcarriers of the per-subcarrier sample variance (n-1 divisor)
// of amplitude across the frame window [begin, end). The motion-sensitivity
// score used for antenna selection.
inline double antenna_variance(const CsiTrace& trace, int antenna, std::size_t begin,
                               std::size_t end) {
    if (begin >= end || end > trace.frames.size()) fail("antenna_variance: empty or bad window");
    if (antenna < 0 || antenna >= trace.frames.front().antennas)
        fail("antenna_variance: antenna index out of range");
    const std::size_t n = end - begin;
    if (n == 1) return 0.0;
    double total = 0.0;
    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        double mean = 0.0;
        for (std::size_t i = begin; i < end; i++) mean += std::abs(trace.frames[i].at(antenna, sc));
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = begin; i < end; i++) {
            const double d = std::abs(trace.frames[i].at(antenna, sc)) - mean;
            ss += d * d;
        }
        total += ss / static_cast<double>(n - 1);
    }
    return total / kSubcarrierCount;
}

// Grayscale pose figure, row-major, values in [0, 1].
struct PoseFigure {
    std::vector<double> px;

    PoseFigure() : px(static_cast<std::size_t>(kFigureRows) * kFigureCols, 0.0) {}

    double& at(int r, int c) {
        return px[static_cast<std::size_t>(r) * kFigureCols + static_cast<std::size_t>(c)];
    }
    double at(int r, int c) const {
        return px[static_cast<std::size_t>(r) * kFigureCols + static_cast<std::size_t>(c)];
    }
};

}  // namespace wisense
