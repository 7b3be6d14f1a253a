#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include "wisense/common.hpp"

namespace wisense {

using cdouble = std::complex<double>;

namespace fft_detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void radix2(std::vector<cdouble>& a, bool invert) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; i++) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (invert ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; k++) {
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (invert) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

// Bluestein chirp tables for one transform length, cached because the
// respiration path evaluates many equal-length series.
struct Chirp {
    std::size_t m = 0;                // padded power-of-two length
    std::vector<cdouble> w;           // exp(-i*pi*k^2/n), k = 0..n-1
    std::vector<cdouble> fb;          // FFT of the conjugate chirp kernel
};

inline const Chirp& chirp_for(std::size_t n) {
    static std::map<std::size_t, Chirp> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Chirp c;
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    c.m = m;
    c.w.resize(n);
    for (std::size_t k = 0; k < n; k++) {
        // k^2 mod 2n keeps the angle argument small without changing the value
        const std::uint64_t q = (static_cast<std::uint64_t>(k) * k) % (2 * n);
        const double ang = -kPi * static_cast<double>(q) / static_cast<double>(n);
        c.w[k] = cdouble(std::cos(ang), std::sin(ang));
    }
    std::vector<cdouble> b(m, cdouble(0.0, 0.0));
    b[0] = std::conj(c.w[0]);
    for (std::size_t k = 1; k < n; k++) {
        b[k] = std::conj(c.w[k]);
        b[m - k] = std::conj(c.w[k]);
    }
    radix2(b, false);
    c.fb = std::move(b);
    return cache.emplace(n, std::move(c)).first->second;
}

inline std::vector<cdouble> bluestein(const std::vector<cdouble>& x) {
    const std::size_t n = x.size();
    const Chirp& c = chirp_for(n);
    std::vector<cdouble> a(c.m, cdouble(0.0, 0.0));
    for (std::size_t k = 0; k < n; k++) a[k] = x[k] * c.w[k];
    radix2(a, false);
    for (std::size_t k = 0; k < c.m; k++) a[k] *= c.fb[k];
    radix2(a, true);
    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; k++) out[k] = a[k] * c.w[k];
    return out;
}

}  // namespace fft_detail

inline std::vector<cdouble> fft(std::vector<cdouble> x) {
    if (x.empty()) fail("fft: empty input");
    if (x.size() == 1) return x;
    if (fft_detail::is_pow2(x.size())) {
        fft_detail::radix2(x, false);
        return x;
    }
    return fft_detail::bluestein(x);
}

inline std::vector<cdouble> ifft(std::vector<cdouble> x) {
    if (x.empty()) fail("ifft: empty input");
    for (auto& v : x) v = std::conj(v);
    x = fft(std::move(x));
    const double inv = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v = std::conj(v) * inv;
    return x;
}

// |X_k|^2 for k = 0..n-1 of a real series.
inline std::vector<double> power_spectrum(const std::vector<double>& x) {
    std::vector<cdouble> c(x.size());
    for (std::size_t i = 0; i < x.size(); i++) c[i] = cdouble(x[i], 0.0);
    c = fft(std::move(c));
    std::vector<double> p(c.size());
    for (std::size_t i = 0; i < c.size(); i++) p[i] = std::norm(c[i]);
    return p;
}

}  // namespace wisense
