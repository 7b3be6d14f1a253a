#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "wisense/common.hpp"

namespace wisense {

// Daubechies-4 scaling filter (8 taps, orthonormal, sums to sqrt(2)).
inline constexpr std::array<double, 8> kDb4Scaling = {
    0.23037781330885523,   0.7148465705525415,   0.6308807679295904,
    -0.02798376941698385,  -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945,  -0.010597401784997278,
};

// Quadrature mirror: h[k] = (-1)^k * g[7-k].
inline double db4_wavelet_tap(int k) {
    const double s = (k % 2 == 0) ? 1.0 : -1.0;
    return s * kDb4Scaling[static_cast<std::size_t>(7 - k)];
}

// One analysis level with periodic extension:
//   approx[n] = sum_k g[k] * x[(2n + k) mod N]
//   detail[n] = sum_k h[k] * x[(2n + k) mod N]
// Odd-length input is first extended by repeating its last sample, the usual
// periodization fixup, so every level halves cleanly.
inline void dwt_db4(const std::vector<double>& x, std::vector<double>& approx,
                    std::vector<double>& detail) {
    if (x.size() < 2) fail("dwt_db4: need at least 2 samples");
    std::vector<double> ext;
    const std::vector<double>* src = &x;
    if (x.size() % 2 != 0) {
        ext = x;
        ext.push_back(x.back());
        src = &ext;
    }
    const std::size_t n = src->size();
    const std::size_t half = n / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t m = 0; m < half; m++) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < 8; k++) {
            const double v = (*src)[(2 * m + static_cast<std::size_t>(k)) % n];
            a += kDb4Scaling[static_cast<std::size_t>(k)] * v;
            d += db4_wavelet_tap(k) * v;
        }
        approx[m] = a;
        detail[m] = d;
    }
}

// Transpose of the analysis step (orthogonal, so also its inverse); result is
// truncated to out_len, which may be one less than 2 * approx.size() when the
// forward pass padded an odd input.
inline std::vector<double> idwt_db4(const std::vector<double>& approx,
                                    const std::vector<double>& detail, std::size_t out_len) {
    if (approx.size() != detail.size()) fail("idwt_db4: approx/detail size mismatch");
    if (approx.empty()) fail("idwt_db4: empty input");
    const std::size_t n = 2 * approx.size();
    if (out_len != n && out_len + 1 != n) fail("idwt_db4: bad output length");
    std::vector<double> y(n, 0.0);
    for (std::size_t m = 0; m < approx.size(); m++) {
        for (int k = 0; k < 8; k++) {
            const std::size_t pos = (2 * m + static_cast<std::size_t>(k)) % n;
            y[pos] += kDb4Scaling[static_cast<std::size_t>(k)] * approx[m] +
                      db4_wavelet_tap(k) * detail[m];
        }
    }
    y.resize(out_len);
    return y;
}

// Multi-level approximation: decompose `levels` deep, drop every detail band,
// reconstruct. Acts as a lowpass with cutoff near fs / 2^(levels+1).
inline std::vector<double> wavelet_lowpass(const std::vector<double>& x, int levels) {
    if (levels < 1) fail("wavelet_lowpass: levels must be >= 1");
    if (x.size() < (static_cast<std::size_t>(1) << levels))
        fail("wavelet_lowpass: series shorter than 2^levels");
    std::vector<std::size_t> lens;
    std::vector<double> cur = x;
    for (int l = 0; l < levels; l++) {
        lens.push_back(cur.size());
        std::vector<double> a, d;
        dwt_db4(cur, a, d);
        cur = std::move(a);
    }
    for (int l = levels - 1; l >= 0; l--) {
        const std::vector<double> zeros(cur.size(), 0.0);
        cur = idwt_db4(cur, zeros, lens[static_cast<std::size_t>(l)]);
    }
    return cur;
}

}  // namespace wisense
