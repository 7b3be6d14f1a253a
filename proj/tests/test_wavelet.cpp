#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wisense/rng.hpp"
#include "wisense/wavelet.hpp"

using namespace wisense;

namespace {

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; i += 2) {
        double g0 = 0.0, g1 = 0.0;
        rng::gauss_pair(rng::key(seed, 21, i), g0, g1);
        x[i] = g0;
        if (i + 1 < n) x[i + 1] = g1;
    }
    return x;
}

double energy(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

}  // namespace

TEST_CASE("db4 filter bank is orthonormal", "[wavelet]") {
    double sum = 0.0, sq = 0.0, shift2 = 0.0;
    for (int k = 0; k < 8; k++) {
        sum += kDb4Scaling[static_cast<std::size_t>(k)];
        sq += kDb4Scaling[static_cast<std::size_t>(k)] * kDb4Scaling[static_cast<std::size_t>(k)];
        if (k + 2 < 8)
            shift2 += kDb4Scaling[static_cast<std::size_t>(k)] *
                      kDb4Scaling[static_cast<std::size_t>(k + 2)];
    }
    REQUIRE(std::abs(sum - std::sqrt(2.0)) < 1e-12);
    REQUIRE(std::abs(sq - 1.0) < 1e-12);
    REQUIRE(std::abs(shift2) < 1e-12);
    // wavelet taps are orthogonal to scaling taps at even shifts
    double cross = 0.0;
    for (int k = 0; k < 8; k++)
        cross += kDb4Scaling[static_cast<std::size_t>(k)] * db4_wavelet_tap(k);
    REQUIRE(std::abs(cross) < 1e-12);
}

TEST_CASE("single-level transform preserves energy on even lengths", "[wavelet]") {
    for (std::size_t n : {64u, 128u, 250u, 1000u}) {
        const std::vector<double> x = random_series(n, n);
        std::vector<double> a, d;
        dwt_db4(x, a, d);
        REQUIRE(std::abs(energy(a) + energy(d) - energy(x)) < 1e-9 * (1.0 + energy(x)));
    }
}

TEST_CASE("constant input has zero detail coefficients", "[wavelet]") {
    std::vector<double> x(128, 3.25);
    std::vector<double> a, d;
    dwt_db4(x, a, d);
    for (double v : d) REQUIRE(std::abs(v) < 1e-12);
    for (double v : a) REQUIRE(std::abs(v - 3.25 * std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("inverse transform reconstructs the input", "[wavelet]") {
    for (std::size_t n : {64u, 200u, 1024u}) {
        const std::vector<double> x = random_series(n, 3 * n);
        std::vector<double> a, d;
        dwt_db4(x, a, d);
        const std::vector<double> back = idwt_db4(a, d, n);
        REQUIRE(back.size() == n);
        for (std::size_t i = 0; i < n; i++) REQUIRE(std::abs(back[i] - x[i]) < 1e-10);
    }
}

TEST_CASE("lowpass keeps a slow sinusoid and removes fast noise", "[wavelet]") {
    const std::size_t n = 4096;
    const double fs = 100.0;
    std::vector<double> clean(n), noisy(n);
    for (std::size_t i = 0; i < n; i++) {
        const double t = static_cast<double>(i) / fs;
        clean[i] = std::sin(2.0 * kPi * 0.25 * t);
        double g0 = 0.0, g1 = 0.0;
        rng::gauss_pair(rng::key(5, 22, i), g0, g1);
        noisy[i] = clean[i] + 0.3 * g0;
    }
    const std::vector<double> den = wavelet_lowpass(noisy, 6);
    REQUIRE(den.size() == n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; i++) err += (den[i] - clean[i]) * (den[i] - clean[i]);
    // residual well under the injected noise power (0.09 * n)
    REQUIRE(err < 0.02 * static_cast<double>(n));
}

TEST_CASE("lowpass is linear and norm-nonincreasing", "[wavelet]") {
    const std::size_t n = 512;
    const std::vector<double> x = random_series(n, 17);
    const std::vector<double> y = random_series(n, 18);
    const std::vector<double> lx = wavelet_lowpass(x, 4);
    const std::vector<double> ly = wavelet_lowpass(y, 4);
    std::vector<double> xy(n);
    for (std::size_t i = 0; i < n; i++) xy[i] = 2.0 * x[i] - 3.0 * y[i];
    const std::vector<double> lxy = wavelet_lowpass(xy, 4);
    for (std::size_t i = 0; i < n; i++)
        REQUIRE(std::abs(lxy[i] - (2.0 * lx[i] - 3.0 * ly[i])) < 1e-9);
    REQUIRE(energy(lx) <= energy(x) + 1e-9);
}
