#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <vector>

#include "wisense/csi_map.hpp"
#include "wisense/metrics.hpp"
#include "wisense/net.hpp"
#include "wisense/rng.hpp"

namespace wisense {

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 1e-3;
    int batch_size = 16;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs <= 0) fail("TrainConfig: epochs must be positive");
        if (learning_rate < 0.0) fail("TrainConfig: learning rate must be non-negative");
        if (batch_size <= 0) fail("TrainConfig: batch size must be positive");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            fail("TrainConfig: moment coefficients must lie in [0, 1)");
        if (adam_eps <= 0.0) fail("TrainConfig: adam_eps must be positive");
    }
};

struct TrainSample {
    NetInput input;
    PoseFigure target;
};

struct TrainResult {
    NetParams params;
    std::vector<double> epoch_loss;  // mean over samples, evaluated before each update
};

// One Adam update for a single parameter; t is the 1-based step count.
inline double adam_step_scalar(double theta, double grad, double& m, double& v, long long t,
                               const TrainConfig& cfg) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    const double mhat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
    return theta - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
}

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long long t = 0;

    explicit AdamState(const NetParams& p) {
        m.reserve(p.t.size());
        v.reserve(p.t.size());
        for (const ParamTensor& pt : p.t) {
            m.emplace_back(pt.v.size(), 0.0);
            v.emplace_back(pt.v.size(), 0.0);
        }
    }
};

inline void adam_apply(NetParams& p, const NetParams& grads, AdamState& st,
                       const TrainConfig& cfg) {
    st.t++;
    for (std::size_t ti = 0; ti < p.t.size(); ti++) {
        std::vector<double>& theta = p.t[ti].v;
        const std::vector<double>& g = grads.t[ti].v;
        std::vector<double>& m = st.m[ti];
        std::vector<double>& v = st.v[ti];
        for (std::size_t i = 0; i < theta.size(); i++)
            theta[i] = adam_step_scalar(theta[i], g[i], m[i], v[i], st.t, cfg);
    }
}

namespace train_detail {

inline std::uint64_t fold_bits(std::uint64_t h, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; i++) {
        std::uint64_t bits;
        std::memcpy(&bits, p + i, 8);
        h = rng::mix(h ^ bits);
    }
    return h;
}

// Content digest of a sample; the epoch shuffle keys off this rather than the
// dataset position, so reordering the dataset cannot change the training run.
inline std::uint64_t sample_digest(const TrainSample& s) {
    std::uint64_t h = 0x77697365u;
    h = fold_bits(h, s.input.v.data(), s.input.v.size());
    h = fold_bits(h, s.target.px.data(), s.target.px.size());
    return h;
}

inline std::vector<std::size_t> epoch_order(const std::vector<std::uint64_t>& digests,
                                            std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(digests.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::uint64_t> keys(digests.size());
    for (std::size_t i = 0; i < digests.size(); i++)
        keys[i] = rng::key(seed, rng::kStreamShuffle, static_cast<std::uint64_t>(epoch), digests[i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return digests[a] < digests[b];
    });
    return order;
}

}  // namespace train_detail

// Gradient of the mean BCE loss over a batch, averaged over batch members.
// Returns mean loss; gradients accumulate into `grads` (caller zeroes them).
// The cross-entropy gradient is taken at the output logits, (prediction -
// target) / pixels, so saturated pixels keep a full-strength pull back toward
// their targets.
inline double batch_gradients(const NetParams& p, const std::vector<TrainSample>& dataset,
                              const std::vector<std::size_t>& idx, NetParams& grads) {
    double loss_sum = 0.0;
    const double inv_b = 1.0 / static_cast<double>(idx.size());
    for (std::size_t i : idx) {
        const ForwardPass fp = forward(p, dataset[i].input);
        const PoseFigure pred = figure_of(fp);
        const PoseFigure& target = dataset[i].target;
        loss_sum += bce_loss(pred, target);
        std::vector<double> d(pred.px.size());
        const double scale = inv_b / static_cast<double>(pred.px.size());
        for (std::size_t j = 0; j < d.size(); j++) d[j] = (pred.px[j] - target.px[j]) * scale;
        backward_logits(p, fp, d, grads);
    }
    return loss_sum * inv_b;
}

inline TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& cfg,
                         const NetConfig& net_cfg = NetConfig{}) {
    cfg.validate();
    if (dataset.empty()) fail("train: empty dataset");

    TrainResult result;
    result.params = init_params(net_cfg, cfg.seed);
    AdamState adam(result.params);
    NetParams grads = make_zero_params(net_cfg);

    std::vector<std::uint64_t> digests(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); i++)
        digests[i] = train_detail::sample_digest(dataset[i]);

    for (int epoch = 0; epoch < cfg.epochs; epoch++) {
        const std::vector<std::size_t> order = train_detail::epoch_order(digests, cfg.seed, epoch);
        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t take =
                std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - pos);
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                                 order.begin() +
                                                     static_cast<std::ptrdiff_t>(pos + take));
            for (ParamTensor& g : grads.t) std::fill(g.v.begin(), g.v.end(), 0.0);
            const double mean_loss = batch_gradients(result.params, dataset, batch, grads);
            epoch_loss += mean_loss * static_cast<double>(take);
            adam_apply(result.params, grads, adam, cfg);
            pos += take;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

}  // namespace wisense
