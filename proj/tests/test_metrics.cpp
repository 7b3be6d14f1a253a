#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wisense/metrics.hpp"
#include "wisense/rng.hpp"

using namespace wisense;

TEST_CASE("bce matches hand-computed values and clamps extremes", "[metrics]") {
    PoseFigure pred, truth;
    for (double& v : pred.px) v = 0.5;
    for (double& v : truth.px) v = 1.0;
    REQUIRE(bce_loss(pred, truth) == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    for (double& v : truth.px) v = 0.5;
    REQUIRE(bce_loss(pred, truth) == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    // a confidently-wrong saturated prediction costs -log(eps), not infinity
    for (double& v : pred.px) v = 0.0;
    for (double& v : truth.px) v = 1.0;
    REQUIRE(bce_loss(pred, truth) == Catch::Approx(-std::log(kBceEpsilon)).epsilon(1e-12));

    // and a perfect saturated prediction costs -log(1 - eps), almost zero
    for (double& v : pred.px) v = 1.0;
    REQUIRE(bce_loss(pred, truth) == Catch::Approx(-std::log(1.0 - kBceEpsilon)).epsilon(1e-9));
}

TEST_CASE("bce gradient matches finite differences on interior values", "[metrics]") {
    PoseFigure pred, truth;
    for (std::size_t i = 0; i < pred.px.size(); i++) {
        pred.px[i] = 0.05 + 0.9 * rng::uniform01(rng::key(1, 70, i));
        truth.px[i] = rng::uniform01(rng::key(2, 70, i));
    }
    const std::vector<double> g = bce_loss_grad(pred, truth);
    const double h = 1e-7;
    for (std::size_t i = 0; i < pred.px.size(); i += 997) {
        PoseFigure up = pred, dn = pred;
        up.px[i] += h;
        dn.px[i] -= h;
        const double fd = (bce_loss(up, truth) - bce_loss(dn, truth)) / (2 * h);
        REQUIRE(g[i] == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("gradient is zero where the clamp is active", "[metrics]") {
    PoseFigure pred, truth;
    for (double& v : truth.px) v = 1.0;
    pred.px[0] = 0.0;
    pred.px[1] = 1.0;
    pred.px[2] = 0.5;
    const std::vector<double> g = bce_loss_grad(pred, truth);
    REQUIRE(g[0] == 0.0);
    REQUIRE(g[1] == 0.0);
    REQUIRE(g[2] != 0.0);
}

TEST_CASE("figure distance is the root of the differing-pixel count", "[metrics]") {
    PoseFigure a, b;
    REQUIRE(figure_distance(a, b) == 0.0);
    for (int i = 0; i < 900; i++) b.px[static_cast<std::size_t>(i)] = 1.0;
    REQUIRE(figure_distance(a, b) == Catch::Approx(30.0));
    // values on the same side of 0.5 do not count
    PoseFigure c = a, d = a;
    c.px[0] = 0.2;
    d.px[0] = 0.4;
    REQUIRE(figure_distance(c, d) == 0.0);
}

TEST_CASE("pcs thresholds are inclusive", "[metrics]") {
    PoseFigure a, b;
    for (int i = 0; i < 900; i++) b.px[static_cast<std::size_t>(i)] = 1.0;  // distance 30
    REQUIRE(pcs(a, b, 30.0));
    REQUIRE_FALSE(pcs(a, b, 25.0));
    REQUIRE(pcs(a, a, 0.0));
}

TEST_CASE("pcs suite reports the passing share and mean distance", "[metrics]") {
    std::vector<PoseFigure> preds(4), truths(4);
    // distances: 0, 10 (100 px), 20 (400 px), 40 (1600 px)
    const int counts[4] = {0, 100, 400, 1600};
    for (std::size_t s = 0; s < 4; s++)
        for (int i = 0; i < counts[s]; i++) preds[s].px[static_cast<std::size_t>(i)] = 1.0;
    const PcsResult r30 = pcs_suite(preds, truths, 30.0);
    REQUIRE(r30.percent == Catch::Approx(75.0));
    REQUIRE(r30.mean_distance == Catch::Approx((0.0 + 10.0 + 20.0 + 40.0) / 4.0));
    const PcsResult r50 = pcs_suite(preds, truths, 50.0);
    REQUIRE(r50.percent == Catch::Approx(100.0));
}

TEST_CASE("pcs is monotone in the threshold", "[metrics]") {
    std::vector<PoseFigure> preds(10), truths(10);
    for (std::size_t s = 0; s < 10; s++)
        for (std::size_t i = 0; i < preds[s].px.size(); i++)
            preds[s].px[i] = rng::uniform01(rng::key(s, 71, i)) < 0.004 ? 1.0 : 0.0;
    double prev = -1.0;
    for (double psi : {25.0, 30.0, 40.0, 50.0}) {
        const double cur = pcs_suite(preds, truths, psi).percent;
        REQUIRE(cur >= prev);
        prev = cur;
    }
}
