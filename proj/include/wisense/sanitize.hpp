#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/common.hpp"

namespace wisense {

// Role assignment after ranking antennas by amplitude variance (descending,
// ties to the lower index): the most motion-sensitive antenna becomes the
// conjugation reference, the runner-up is kept as the "first" antenna, the
// least sensitive one is dropped.
struct AntennaSelection {
    int reference = 0;
    int first = 1;
    int discarded = 2;
    std::array<double, 3> variance{};
};

inline AntennaSelection select_antennas(const CsiTrace& trace, std::size_t begin, std::size_t end) {
    if (begin >= end || end > trace.frames.size()) fail("select_antennas: empty or bad window");
    if (trace.frames.front().antennas != 3)
        fail("select_antennas: need 3 antennas, got " +
             std::to_string(trace.frames.front().antennas));
    AntennaSelection sel;
    for (int a = 0; a < 3; a++)
        sel.variance[static_cast<std::size_t>(a)] = antenna_variance(trace, a, begin, end);
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return sel.variance[static_cast<std::size_t>(x)] > sel.variance[static_cast<std::size_t>(y)];
    });
    sel.reference = order[0];
    sel.first = order[1];
    sel.discarded = order[2];
    return sel;
}

struct PowerAdjust {
    double delta = 0.0;  // added to the first antenna's amplitudes
    double gamma = 0.0;  // subtracted from the reference antenna's amplitudes
};

// gamma is the reference antenna's amplitude floor over the window, which
// keeps the reduced amplitudes nonnegative; the first antenna's boost is a
// thousandfold of it so the boosted-static cross term dominates the product.
inline PowerAdjust power_adjust(const std::vector<double>& amp_first,
                                const std::vector<double>& amp_ref) {
    if (amp_first.empty() || amp_ref.empty()) fail("power_adjust: empty amplitude window");
    if (amp_first.size() != amp_ref.size()) fail("power_adjust: amplitude windows differ in size");
    double gamma = amp_ref[0];
    for (double v : amp_ref) {
        if (!(v >= 0)) fail("power_adjust: amplitudes must be nonnegative");
        gamma = std::min(gamma, v);
    }
    return {1000.0 * gamma, gamma};
}

// Everything downstream consumers need from one sanitized window, all arrays
// subcarrier-major: index = sc * frame_count + (frame - begin).
struct SanitizedStreams {
    std::size_t begin = 0, end = 0;  // frame window [begin, end)
    int reference = 0, first = 0;
    double delta = 0.0, gamma = 0.0;
    std::vector<std::complex<double>> cm;  // mean-removed conjugate product
    std::vector<double> rel_phase;         // arg(cm), in (-pi, pi]
    std::vector<double> amp_first;         // raw amplitudes, first antenna
    std::vector<double> amp_ref;           // raw amplitudes, reference antenna

    std::size_t frame_count() const { return end - begin; }
};

// Mean-removed entries below this fraction of the window's raw product scale
// are numerical dust from the subtraction, not signal; they are snapped to
// zero so purely static input yields an exactly zero product (and zero phase).
inline constexpr double kCmResidualClamp = 1e-12;

// Conjugate multiplication of the two retained antennas with the amplitude
// adjustment applied first: the first antenna's amplitude is raised by delta
// and the reference antenna's lowered by gamma, phases untouched. The packet
// phase offset is common to both antennas and cancels in the product. The
// per-subcarrier time mean then strips the static-by-static term.
inline SanitizedStreams conjugate_multiply(const CsiTrace& trace, const AntennaSelection& sel,
                                           std::size_t begin, std::size_t end) {
    if (begin >= end || end > trace.frames.size()) fail("conjugate_multiply: empty or bad window");
    const std::size_t n = end - begin;
    if (n < 2) fail("conjugate_multiply: window must span at least 2 frames");

    SanitizedStreams out;
    out.begin = begin;
    out.end = end;
    out.reference = sel.reference;
    out.first = sel.first;
    const std::size_t cells = static_cast<std::size_t>(kSubcarrierCount) * n;
    out.amp_first.resize(cells);
    out.amp_ref.resize(cells);
    out.cm.resize(cells);
    out.rel_phase.resize(cells);

    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        for (std::size_t i = begin; i < end; i++) {
            const std::size_t idx = static_cast<std::size_t>(sc) * n + (i - begin);
            out.amp_first[idx] = std::abs(trace.frames[i].at(sel.first, sc));
            out.amp_ref[idx] = std::abs(trace.frames[i].at(sel.reference, sc));
        }
    }
    const PowerAdjust adj = power_adjust(out.amp_first, out.amp_ref);
    out.delta = adj.delta;
    out.gamma = adj.gamma;

    for (int sc = 0; sc < kSubcarrierCount; sc++) {
        const std::size_t row = static_cast<std::size_t>(sc) * n;
        double scale = 0.0;
        for (std::size_t i = begin; i < end; i++) {
            const std::size_t idx = row + (i - begin);
            const std::complex<double> h1 = trace.frames[i].at(sel.first, sc);
            const std::complex<double> h2 = trace.frames[i].at(sel.reference, sc);
            const double a1 = out.amp_first[idx];
            const double a2 = out.amp_ref[idx];
            // (|h| + delta) * h / |h| keeps the phase; a zero cell stays zero.
            const std::complex<double> h1_adj = a1 > 0 ? h1 * ((a1 + adj.delta) / a1)
                                                       : std::complex<double>(adj.delta, 0.0);
            const std::complex<double> h2_adj =
                a2 > 0 ? h2 * ((a2 - adj.gamma) / a2) : std::complex<double>(0.0, 0.0);
            out.cm[idx] = h1_adj * std::conj(h2_adj);
            scale += std::abs(out.cm[idx]);
        }
        scale /= static_cast<double>(n);

        std::complex<double> mean(0.0, 0.0);
        for (std::size_t i = 0; i < n; i++) mean += out.cm[row + i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; i++) {
            std::complex<double>& z = out.cm[row + i];
            z -= mean;
            if (std::abs(z) <= kCmResidualClamp * scale) z = {0.0, 0.0};
            double ph = (z == std::complex<double>(0.0, 0.0)) ? 0.0 : std::atan2(z.imag(), z.real());
            if (ph <= -kPi) ph = kPi;  // fold atan2's -pi onto +pi
            out.rel_phase[row + i] = ph;
        }
    }
    return out;
}

}  // namespace wisense
