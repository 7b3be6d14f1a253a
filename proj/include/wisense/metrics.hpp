#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/csi.hpp"

namespace wisense {

inline constexpr double kBceEpsilon = 1e-7;

// Mean per-pixel binary cross entropy; predictions are clamped to
// [eps, 1 - eps] before the logs. Compensated summation keeps the result
// steady under tiny per-pixel shifts (finite-difference probes sit right at
// the cancellation floor of a 19200-term naive sum).
inline double bce_loss(const PoseFigure& pred, const PoseFigure& truth) {
    if (pred.px.size() != truth.px.size()) fail("bce_loss: figure sizes differ");
    double acc = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < pred.px.size(); i++) {
        const double p = std::min(std::max(pred.px[i], kBceEpsilon), 1.0 - kBceEpsilon);
        const double s = truth.px[i];
        const double term = s * std::log(p) + (1.0 - s) * std::log(1.0 - p) - carry;
        const double next = acc + term;
        carry = (next - acc) - term;
        acc = next;
    }
    return -acc / static_cast<double>(pred.px.size());
}

// d(bce_loss)/d(prediction). Zero where the clamp is active, since the clamped
// value no longer responds to the raw prediction there.
inline std::vector<double> bce_loss_grad(const PoseFigure& pred, const PoseFigure& truth) {
    if (pred.px.size() != truth.px.size()) fail("bce_loss_grad: figure sizes differ");
    const double inv_n = 1.0 / static_cast<double>(pred.px.size());
    std::vector<double> g(pred.px.size());
    for (std::size_t i = 0; i < pred.px.size(); i++) {
        const double raw = pred.px[i];
        if (raw < kBceEpsilon || raw > 1.0 - kBceEpsilon) {
            g[i] = 0.0;
            continue;
        }
        const double s = truth.px[i];
        g[i] = (-s / raw + (1.0 - s) / (1.0 - raw)) * inv_n;
    }
    return g;
}

// Euclidean distance between the two figures binarized at 0.5:
// sqrt(number of differing pixels).
inline double figure_distance(const PoseFigure& a, const PoseFigure& b) {
    if (a.px.size() != b.px.size()) fail("figure_distance: figure sizes differ");
    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.px.size(); i++)
        if ((a.px[i] > 0.5) != (b.px[i] > 0.5)) differing++;
    return std::sqrt(static_cast<double>(differing));
}

// A prediction counts as correct when its binarized distance to the ground
// truth is at most psi (inclusive).
inline bool pcs(const PoseFigure& pred, const PoseFigure& truth, double psi) {
    return figure_distance(pred, truth) <= psi;
}

struct PcsResult {
    double percent = 0.0;
    double mean_distance = 0.0;
};

inline PcsResult pcs_suite(const std::vector<PoseFigure>& preds,
                           const std::vector<PoseFigure>& truths, double psi) {
    if (preds.size() != truths.size()) fail("pcs_suite: prediction/truth counts differ");
    if (preds.empty()) fail("pcs_suite: empty suite");
    std::size_t passes = 0;
    double dist_sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); i++) {
        const double d = figure_distance(preds[i], truths[i]);
        dist_sum += d;
        if (d <= psi) passes++;
    }
    PcsResult r;
    r.percent = 100.0 * static_cast<double>(passes) / static_cast<double>(preds.size());
    r.mean_distance = dist_sum / static_cast<double>(preds.size());
    return r;
}

}  // namespace wisense
