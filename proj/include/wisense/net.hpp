#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/csi.hpp"
#include "wisense/csi_map.hpp"
#include "wisense/rng.hpp"
#include "wisense/tensor.hpp"

namespace wisense {

// Encoder-decoder network that turns a 30x20x4 input patch into a 120x160
// grayscale pose figure. Strided 3x3 / pointwise 1x1 convolution pairs shrink
// the input to 4x3, an SE block re-weights the 128 feature channels, a dense
// layer lifts to an 8x10x128 grid, and the decoder alternates nearest-neighbor
// resizes with stride-1 convolutions up to 120x160x1 (sigmoid output).
//
// Channel widths are configurable so gradient checks can run on a small net;
// defaults reproduce the full model.

struct NetConfig {
    int c1 = 8;    // encoder widths after layers 1-2
    int c2 = 32;   // after layers 3-4
    int c3 = 128;  // after layers 5-6 (SE block channels)
    int se_reduction = 16;
    int fc_channels = 128;  // channels of the 8x10 dense-layer output grid
    int d1 = 64;            // decoder widths after layers 1-2
    int d2 = 32;            // after layers 3-4
    int d3 = 8;             // after layers 5-6 (final layer always outputs 1)

    void validate() const {
        if (c1 <= 0 || c2 <= 0 || c3 <= 0 || fc_channels <= 0 || d1 <= 0 || d2 <= 0 || d3 <= 0)
            fail("NetConfig: channel widths must be positive");
        if (se_reduction <= 0 || c3 % se_reduction != 0)
            fail("NetConfig: se_reduction must divide c3");
    }

    int fc_in() const { return 4 * 3 * c3; }
    int fc_out() const { return 8 * 10 * fc_channels; }
};

// ---- parameter tensors ---------------------------------------------------------

struct ParamTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> v;

    std::size_t size() const { return v.size(); }
};

enum ParamIndex : int {
    kEnc1W = 0, kEnc1B, kEnc2W, kEnc2B, kEnc3W, kEnc3B,
    kEnc4W, kEnc4B, kEnc5W, kEnc5B, kEnc6W, kEnc6B,
    kSeW1, kSeB1, kSeW2, kSeB2,
    kFcW, kFcB,
    kDec1W, kDec1B, kDec2W, kDec2B, kDec3W, kDec3B, kDec4W, kDec4B,
    kDec5W, kDec5B, kDec6W, kDec6B, kDec7W, kDec7B,
    kParamTensorCount
};

struct NetParams {
    NetConfig config;
    std::vector<ParamTensor> t;  // kParamTensorCount entries, ParamIndex order

    ParamTensor& operator[](int i) { return t[static_cast<std::size_t>(i)]; }
    const ParamTensor& operator[](int i) const { return t[static_cast<std::size_t>(i)]; }

    std::size_t total_parameters() const {
        std::size_t n = 0;
        for (const auto& p : t) n += p.size();
        return n;
    }
};

namespace net_detail {

// Conv weights are stored (kh, kw, cin, cout) with cout fastest; flattening the
// first three axes gives the K x cout matrix used by the im2col product.
inline ParamTensor make_conv_w(const std::string& name, int k, int cin, int cout) {
    ParamTensor p;
    p.name = name;
    p.shape = {k, k, cin, cout};
    p.v.assign(static_cast<std::size_t>(k) * k * cin * cout, 0.0);
    return p;
}

inline ParamTensor make_vec(const std::string& name, int n) {
    ParamTensor p;
    p.name = name;
    p.shape = {n};
    p.v.assign(static_cast<std::size_t>(n), 0.0);
    return p;
}

inline ParamTensor make_mat(const std::string& name, int rows, int cols) {
    ParamTensor p;
    p.name = name;
    p.shape = {rows, cols};
    p.v.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    return p;
}

}  // namespace net_detail

inline NetParams make_zero_params(const NetConfig& cfg) {
    cfg.validate();
    using namespace net_detail;
    const int r = cfg.c3 / cfg.se_reduction;
    NetParams p;
    p.config = cfg;
    p.t.reserve(kParamTensorCount);
    p.t.push_back(make_conv_w("enc1_w", 3, 4, cfg.c1));
    p.t.push_back(make_vec("enc1_b", cfg.c1));
    p.t.push_back(make_conv_w("enc2_w", 1, cfg.c1, cfg.c1));
    p.t.push_back(make_vec("enc2_b", cfg.c1));
    p.t.push_back(make_conv_w("enc3_w", 3, cfg.c1, cfg.c2));
    p.t.push_back(make_vec("enc3_b", cfg.c2));
    p.t.push_back(make_conv_w("enc4_w", 1, cfg.c2, cfg.c2));
    p.t.push_back(make_vec("enc4_b", cfg.c2));
    p.t.push_back(make_conv_w("enc5_w", 3, cfg.c2, cfg.c3));
    p.t.push_back(make_vec("enc5_b", cfg.c3));
    p.t.push_back(make_conv_w("enc6_w", 1, cfg.c3, cfg.c3));
    p.t.push_back(make_vec("enc6_b", cfg.c3));
    p.t.push_back(make_mat("se_w1", cfg.c3, r));
    p.t.push_back(make_vec("se_b1", r));
    p.t.push_back(make_mat("se_w2", r, cfg.c3));
    p.t.push_back(make_vec("se_b2", cfg.c3));
    p.t.push_back(make_mat("fc_w", cfg.fc_in(), cfg.fc_out()));
    p.t.push_back(make_vec("fc_b", cfg.fc_out()));
    p.t.push_back(make_conv_w("dec1_w", 1, cfg.fc_channels, cfg.d1));
    p.t.push_back(make_vec("dec1_b", cfg.d1));
    p.t.push_back(make_conv_w("dec2_w", 1, cfg.d1, cfg.d1));
    p.t.push_back(make_vec("dec2_b", cfg.d1));
    p.t.push_back(make_conv_w("dec3_w", 3, cfg.d1, cfg.d2));
    p.t.push_back(make_vec("dec3_b", cfg.d2));
    p.t.push_back(make_conv_w("dec4_w", 3, cfg.d2, cfg.d2));
    p.t.push_back(make_vec("dec4_b", cfg.d2));
    p.t.push_back(make_conv_w("dec5_w", 3, cfg.d2, cfg.d3));
    p.t.push_back(make_vec("dec5_b", cfg.d3));
    p.t.push_back(make_conv_w("dec6_w", 3, cfg.d3, cfg.d3));
    p.t.push_back(make_vec("dec6_b", cfg.d3));
    p.t.push_back(make_conv_w("dec7_w", 3, cfg.d3, 1));
    p.t.push_back(make_vec("dec7_b", 1));
    return p;
}

// Uniform fan-in-scaled initialization for kernels and matrices; biases zero.
// Every element draws from its own counter key, so init is order-independent.
inline NetParams init_params(const NetConfig& cfg, std::uint64_t seed) {
    NetParams p = make_zero_params(cfg);
    for (int ti = 0; ti < kParamTensorCount; ti++) {
        ParamTensor& pt = p[ti];
        if (pt.shape.size() == 1) continue;  // bias
        std::size_t fan_in = 1;
        for (std::size_t d = 0; d + 1 < pt.shape.size(); d++)
            fan_in *= static_cast<std::size_t>(pt.shape[d]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < pt.v.size(); i++) {
            const double u = rng::uniform01(rng::key(seed, rng::kStreamWeights,
                                                     static_cast<std::uint64_t>(ti), i));
            pt.v[i] = limit * (2.0 * u - 1.0);
        }
    }
    return p;
}

// ---- layer plumbing ------------------------------------------------------------

namespace net_detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

struct ConvPlan {
    std::string name;
    int k = 0, stride = 0;
    int in_h = 0, in_w = 0, in_c = 0;
    int out_h = 0, out_w = 0, out_c = 0;
    int pad_top = 0, pad_left = 0;

    int patch_cols() const { return k * k * in_c; }
};

// Minimal padding (extra on the bottom/right when odd) that makes
// floor((in + pad - k)/stride) + 1 equal the requested output size.
inline ConvPlan make_conv_plan(const std::string& name, int in_h, int in_w, int in_c, int out_h,
                               int out_w, int out_c, int k, int stride) {
    ConvPlan c;
    c.name = name;
    c.k = k;
    c.stride = stride;
    c.in_h = in_h;
    c.in_w = in_w;
    c.in_c = in_c;
    c.out_h = out_h;
    c.out_w = out_w;
    c.out_c = out_c;
    const int pad_h = std::max((out_h - 1) * stride + k - in_h, 0);
    const int pad_w = std::max((out_w - 1) * stride + k - in_w, 0);
    if ((in_h + pad_h - k) / stride + 1 != out_h || (in_w + pad_w - k) / stride + 1 != out_w)
        fail(name + ": no padding maps " + std::to_string(in_h) + "x" + std::to_string(in_w) +
             " to " + std::to_string(out_h) + "x" + std::to_string(out_w));
    c.pad_top = pad_h / 2;
    c.pad_left = pad_w / 2;
    return c;
}

inline void check_input(const ConvPlan& c, const Tensor3& x) {
    if (x.h != c.in_h || x.w != c.in_w || x.c != c.in_c)
        fail(c.name + ": expected input " + std::to_string(c.in_h) + "x" + std::to_string(c.in_w) +
             "x" + std::to_string(c.in_c) + ", got " + x.shape_str());
}

// Gather conv patches into a (out_h*out_w) x (k*k*in_c) row-major matrix;
// out-of-bounds taps stay zero.
inline void im2col(const ConvPlan& c, const Tensor3& x, std::vector<double>& patches) {
    const std::size_t K = static_cast<std::size_t>(c.patch_cols());
    patches.assign(static_cast<std::size_t>(c.out_h) * c.out_w * K, 0.0);
    for (int orow = 0; orow < c.out_h; orow++) {
        for (int ocol = 0; ocol < c.out_w; ocol++) {
            const std::size_t row = static_cast<std::size_t>(orow) * c.out_w + ocol;
            double* dst0 = patches.data() + row * K;
            for (int kr = 0; kr < c.k; kr++) {
                const int ir = orow * c.stride - c.pad_top + kr;
                if (ir < 0 || ir >= c.in_h) continue;
                for (int kc = 0; kc < c.k; kc++) {
                    const int ic = ocol * c.stride - c.pad_left + kc;
                    if (ic < 0 || ic >= c.in_w) continue;
                    const double* src = x.v.data() +
                                        (static_cast<std::size_t>(ir) * c.in_w + ic) * c.in_c;
                    std::memcpy(dst0 + (static_cast<std::size_t>(kr) * c.k + kc) * c.in_c, src,
                                sizeof(double) * static_cast<std::size_t>(c.in_c));
                }
            }
        }
    }
}

// y = conv(x, w) + b, no activation. w is the (k,k,cin,cout) tensor.
inline void conv_forward(const ConvPlan& c, const Tensor3& x, const ParamTensor& w,
                         const ParamTensor& b, Tensor3& y) {
    check_input(c, x);
    y.resize(c.out_h, c.out_w, c.out_c);
    std::vector<double> patches;
    im2col(c, x, patches);
    const Eigen::Index rows = static_cast<Eigen::Index>(c.out_h) * c.out_w;
    const Eigen::Index K = c.patch_cols();
    MapConstMat P(patches.data(), rows, K);
    MapConstMat W(w.v.data(), K, c.out_c);
    MapMat Y(y.v.data(), rows, c.out_c);
    Y.noalias() = P * W;
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.v.data(), c.out_c);
}

// Given d(loss)/d(y pre-activation), accumulate dW, db and overwrite dx.
inline void conv_backward(const ConvPlan& c, const Tensor3& x, const ParamTensor& w,
                          const Tensor3& dy, ParamTensor& dw, ParamTensor& db, Tensor3& dx) {
    check_input(c, x);
    std::vector<double> patches;
    im2col(c, x, patches);
    const Eigen::Index rows = static_cast<Eigen::Index>(c.out_h) * c.out_w;
    const Eigen::Index K = c.patch_cols();
    MapConstMat P(patches.data(), rows, K);
    MapConstMat dY(dy.v.data(), rows, c.out_c);
    MapMat dW(dw.v.data(), K, c.out_c);
    dW.noalias() += P.transpose() * dY;
    Eigen::Map<Eigen::RowVectorXd>(db.v.data(), c.out_c) += dY.colwise().sum();

    std::vector<double> dpatches(patches.size());
    MapMat dP(dpatches.data(), rows, K);
    MapConstMat W(w.v.data(), K, c.out_c);
    dP.noalias() = dY * W.transpose();

    dx.resize(c.in_h, c.in_w, c.in_c);
    for (int orow = 0; orow < c.out_h; orow++) {
        for (int ocol = 0; ocol < c.out_w; ocol++) {
            const std::size_t row = static_cast<std::size_t>(orow) * c.out_w + ocol;
            const double* src0 = dpatches.data() + row * static_cast<std::size_t>(K);
            for (int kr = 0; kr < c.k; kr++) {
                const int ir = orow * c.stride - c.pad_top + kr;
                if (ir < 0 || ir >= c.in_h) continue;
                for (int kc = 0; kc < c.k; kc++) {
                    const int ic = ocol * c.stride - c.pad_left + kc;
                    if (ic < 0 || ic >= c.in_w) continue;
                    double* dst = dx.v.data() + (static_cast<std::size_t>(ir) * c.in_w + ic) * c.in_c;
                    const double* src = src0 + (static_cast<std::size_t>(kr) * c.k + kc) * c.in_c;
                    for (int ch = 0; ch < c.in_c; ch++) dst[ch] += src[ch];
                }
            }
        }
    }
}

inline void relu_inplace(Tensor3& t) {
    for (double& x : t.v) x = x > 0.0 ? x : 0.0;
}

// d(pre) = d(post) masked by post > 0 (post-activation values are stored).
inline void relu_backward_inplace(const Tensor3& post, Tensor3& d) {
    for (std::size_t i = 0; i < d.v.size(); i++)
        if (!(post.v[i] > 0.0)) d.v[i] = 0.0;
}

// Nearest-neighbor resize; source index = floor(dst * in / out) per axis.
inline void resize_nearest(const Tensor3& src, int out_h, int out_w, Tensor3& dst) {
    dst.resize(out_h, out_w, src.c);
    for (int r = 0; r < out_h; r++) {
        const int sr = static_cast<int>(static_cast<long long>(r) * src.h / out_h);
        for (int col = 0; col < out_w; col++) {
            const int scol = static_cast<int>(static_cast<long long>(col) * src.w / out_w);
            std::memcpy(&dst.at(r, col, 0), &src.at(sr, scol, 0),
                        sizeof(double) * static_cast<std::size_t>(src.c));
        }
    }
}

inline void resize_nearest_backward(const Tensor3& ddst, int in_h, int in_w, Tensor3& dsrc) {
    dsrc.resize(in_h, in_w, ddst.c);
    for (int r = 0; r < ddst.h; r++) {
        const int sr = static_cast<int>(static_cast<long long>(r) * in_h / ddst.h);
        for (int col = 0; col < ddst.w; col++) {
            const int scol = static_cast<int>(static_cast<long long>(col) * in_w / ddst.w);
            double* dst = &dsrc.at(sr, scol, 0);
            const double* src = &ddst.at(r, col, 0);
            for (int ch = 0; ch < ddst.c; ch++) dst[ch] += src[ch];
        }
    }
}

struct LayerPlans {
    ConvPlan enc[6];
    ConvPlan dec[7];
    // decoder layers whose input is resized to the layer's output size first
    bool dec_resize[7] = {true, false, true, false, true, false, true};
};

inline LayerPlans make_plans(const NetConfig& cfg) {
    LayerPlans p;
    p.enc[0] = make_conv_plan("encoder layer1", 30, 20, 4, 15, 10, cfg.c1, 3, 2);
    p.enc[1] = make_conv_plan("encoder layer2", 15, 10, cfg.c1, 15, 10, cfg.c1, 1, 1);
    p.enc[2] = make_conv_plan("encoder layer3", 15, 10, cfg.c1, 8, 5, cfg.c2, 3, 2);
    p.enc[3] = make_conv_plan("encoder layer4", 8, 5, cfg.c2, 8, 5, cfg.c2, 1, 1);
    p.enc[4] = make_conv_plan("encoder layer5", 8, 5, cfg.c2, 4, 3, cfg.c3, 3, 2);
    p.enc[5] = make_conv_plan("encoder layer6", 4, 3, cfg.c3, 4, 3, cfg.c3, 1, 1);
    p.dec[0] = make_conv_plan("decoder layer1", 15, 20, cfg.fc_channels, 15, 20, cfg.d1, 1, 1);
    p.dec[1] = make_conv_plan("decoder layer2", 15, 20, cfg.d1, 15, 20, cfg.d1, 1, 1);
    p.dec[2] = make_conv_plan("decoder layer3", 30, 40, cfg.d1, 30, 40, cfg.d2, 3, 1);
    p.dec[3] = make_conv_plan("decoder layer4", 30, 40, cfg.d2, 30, 40, cfg.d2, 3, 1);
    p.dec[4] = make_conv_plan("decoder layer5", 60, 80, cfg.d2, 60, 80, cfg.d3, 3, 1);
    p.dec[5] = make_conv_plan("decoder layer6", 60, 80, cfg.d3, 60, 80, cfg.d3, 3, 1);
    p.dec[6] = make_conv_plan("decoder layer7", 120, 160, cfg.d3, 120, 160, 1, 3, 1);
    return p;
}

}  // namespace net_detail

struct LayerShape {
    std::string name;
    int h = 0, w = 0, c = 0;
};

inline std::vector<LayerShape> layer_shapes(const NetConfig& cfg) {
    const net_detail::LayerPlans p = net_detail::make_plans(cfg);
    std::vector<LayerShape> s;
    for (int i = 0; i < 6; i++)
        s.push_back({p.enc[i].name, p.enc[i].out_h, p.enc[i].out_w, p.enc[i].out_c});
    s.push_back({"encoder FC", 8, 10, cfg.fc_channels});
    for (int i = 0; i < 7; i++)
        s.push_back({p.dec[i].name, p.dec[i].out_h, p.dec[i].out_w, p.dec[i].out_c});
    return s;
}

// ---- forward pass --------------------------------------------------------------

struct ForwardPass {
    Tensor3 x;                   // 30x20x4 input
    Tensor3 e[6];                // post-ReLU encoder outputs
    std::vector<double> se_s;    // per-channel spatial means
    std::vector<double> se_z1;   // post-ReLU bottleneck
    std::vector<double> se_gate; // sigmoid gates
    Tensor3 se_out;              // gated 4x3xc3
    Tensor3 fc_out;              // post-ReLU 8x10xfc_channels grid
    Tensor3 d_in[7];             // decoder conv inputs (after any resize)
    Tensor3 d_out[7];            // post-activation decoder outputs
};

inline Tensor3 netinput_tensor(const NetInput& in) {
    if (in.v.size() != static_cast<std::size_t>(kSubcarrierCount) * kMapWindow * 4)
        fail("netinput_tensor: expected 30x20x4 values");
    Tensor3 t(kSubcarrierCount, kMapWindow, 4);
    t.v = in.v;
    return t;
}

// Standalone SE block: squeeze (spatial mean per channel), two dense maps with
// ReLU/sigmoid, channel-wise gating. Cache pointers may be null.
inline Tensor3 se_block(const Tensor3& x, const ParamTensor& w1, const ParamTensor& b1,
                        const ParamTensor& w2, const ParamTensor& b2,
                        std::vector<double>* cache_s = nullptr,
                        std::vector<double>* cache_z1 = nullptr,
                        std::vector<double>* cache_gate = nullptr) {
    const int C = x.c;
    const int R = static_cast<int>(b1.v.size());
    if (w1.shape != std::vector<int>{C, R} || w2.shape != std::vector<int>{R, C} ||
        static_cast<int>(b2.v.size()) != C)
        fail("se_block: weight shapes do not match input channels");
    const double inv_hw = 1.0 / (static_cast<double>(x.h) * x.w);
    std::vector<double> s(static_cast<std::size_t>(C), 0.0);
    for (int r = 0; r < x.h; r++)
        for (int col = 0; col < x.w; col++)
            for (int ch = 0; ch < C; ch++) s[static_cast<std::size_t>(ch)] += x.at(r, col, ch);
    for (double& v : s) v *= inv_hw;

    std::vector<double> z1(static_cast<std::size_t>(R));
    for (int j = 0; j < R; j++) {
        double acc = b1.v[static_cast<std::size_t>(j)];
        for (int ch = 0; ch < C; ch++)
            acc += w1.v[static_cast<std::size_t>(ch) * R + j] * s[static_cast<std::size_t>(ch)];
        z1[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> gate(static_cast<std::size_t>(C));
    for (int ch = 0; ch < C; ch++) {
        double acc = b2.v[static_cast<std::size_t>(ch)];
        for (int j = 0; j < R; j++)
            acc += w2.v[static_cast<std::size_t>(j) * C + ch] * z1[static_cast<std::size_t>(j)];
        gate[static_cast<std::size_t>(ch)] = 1.0 / (1.0 + std::exp(-acc));
    }

    Tensor3 y(x.h, x.w, x.c);
    for (int r = 0; r < x.h; r++)
        for (int col = 0; col < x.w; col++)
            for (int ch = 0; ch < C; ch++)
                y.at(r, col, ch) = x.at(r, col, ch) * gate[static_cast<std::size_t>(ch)];
    if (cache_s) *cache_s = std::move(s);
    if (cache_z1) *cache_z1 = std::move(z1);
    if (cache_gate) *cache_gate = std::move(gate);
    return y;
}

namespace net_detail {

inline void encoder_into(const NetParams& p, const Tensor3& x, ForwardPass& fp) {
    const LayerPlans plans = make_plans(p.config);
    fp.x = x;
    const Tensor3* cur = &fp.x;
    for (int i = 0; i < 6; i++) {
        conv_forward(plans.enc[i], *cur, p[kEnc1W + 2 * i], p[kEnc1B + 2 * i], fp.e[i]);
        relu_inplace(fp.e[i]);
        cur = &fp.e[i];
    }
    fp.se_out = se_block(fp.e[5], p[kSeW1], p[kSeB1], p[kSeW2], p[kSeB2], &fp.se_s, &fp.se_z1,
                         &fp.se_gate);

    const NetConfig& cfg = p.config;
    fp.fc_out.resize(8, 10, cfg.fc_channels);
    Eigen::Map<const Eigen::VectorXd> xin(fp.se_out.v.data(),
                                          static_cast<Eigen::Index>(fp.se_out.size()));
    MapConstMat W(p[kFcW].v.data(), cfg.fc_in(), cfg.fc_out());
    Eigen::Map<Eigen::VectorXd> y(fp.fc_out.v.data(), cfg.fc_out());
    y.noalias() = W.transpose() * xin;
    y += Eigen::Map<const Eigen::VectorXd>(p[kFcB].v.data(), cfg.fc_out());
    relu_inplace(fp.fc_out);
}

inline void decoder_into(const NetParams& p, ForwardPass& fp) {
    const LayerPlans plans = make_plans(p.config);
    const Tensor3* cur = &fp.fc_out;
    for (int i = 0; i < 7; i++) {
        const ConvPlan& c = plans.dec[i];
        if (plans.dec_resize[i])
            resize_nearest(*cur, c.out_h, c.out_w, fp.d_in[i]);
        else
            fp.d_in[i] = *cur;
        conv_forward(c, fp.d_in[i], p[kDec1W + 2 * i], p[kDec1B + 2 * i], fp.d_out[i]);
        if (i < 6)
            relu_inplace(fp.d_out[i]);
        else
            for (double& v : fp.d_out[i].v) v = 1.0 / (1.0 + std::exp(-v));
        cur = &fp.d_out[i];
    }
}

}  // namespace net_detail

inline ForwardPass forward(const NetParams& p, const NetInput& in) {
    ForwardPass fp;
    net_detail::encoder_into(p, netinput_tensor(in), fp);
    net_detail::decoder_into(p, fp);
    return fp;
}

// Encoder alone: 30x20x4 -> 8x10xfc_channels feature grid.
inline Tensor3 encoder_forward(const NetParams& p, const NetInput& in) {
    ForwardPass fp;
    net_detail::encoder_into(p, netinput_tensor(in), fp);
    return fp.fc_out;
}

// Decoder alone: feature grid -> pose figure (values in (0,1)).
inline PoseFigure decoder_forward(const NetParams& p, const Tensor3& features) {
    if (features.h != 8 || features.w != 10 || features.c != p.config.fc_channels)
        fail("decoder_forward: expected input 8x10x" + std::to_string(p.config.fc_channels) +
             ", got " + features.shape_str());
    ForwardPass fp;
    fp.fc_out = features;
    net_detail::decoder_into(p, fp);
    PoseFigure fig;
    fig.px = fp.d_out[6].v;
    return fig;
}

inline PoseFigure figure_of(const ForwardPass& fp) {
    PoseFigure fig;
    fig.px = fp.d_out[6].v;
    return fig;
}

inline PoseFigure infer(const NetParams& p, const NetInput& in) {
    return figure_of(forward(p, in));
}

// ---- backward pass -------------------------------------------------------------

// Accumulates parameter gradients into `g` (same shapes as `p`). `d_logit` is
// d(loss)/d(pre-sigmoid activation) of decoder layer 7. Losses on sigmoid
// outputs should fold the sigmoid derivative in here analytically (for cross
// entropy that is prediction - target): routing the raw d(loss)/d(pixel)
// through the sigmoid derivative numerically underflows to zero once pixels
// saturate, which freezes badly-placed pixels instead of correcting them.
inline void backward_logits(const NetParams& p, const ForwardPass& fp,
                            const std::vector<double>& d_logit, NetParams& g) {
    using namespace net_detail;
    const LayerPlans plans = make_plans(p.config);
    const NetConfig& cfg = p.config;
    if (d_logit.size() != fp.d_out[6].size()) fail("backward: output gradient size mismatch");

    Tensor3 d(120, 160, 1);
    d.v = d_logit;

    // decoder chain
    Tensor3 dprev;
    for (int i = 6; i >= 0; i--) {
        conv_backward(plans.dec[i], fp.d_in[i], p[kDec1W + 2 * i], d, g[kDec1W + 2 * i],
                      g[kDec1B + 2 * i], dprev);
        const Tensor3& below = i > 0 ? fp.d_out[i - 1] : fp.fc_out;
        if (plans.dec_resize[i]) {
            Tensor3 dsrc;
            resize_nearest_backward(dprev, below.h, below.w, dsrc);
            d = std::move(dsrc);
        } else {
            d = std::move(dprev);
        }
        if (i > 0) relu_backward_inplace(fp.d_out[i - 1], d);
    }

    // dense layer (d currently holds d(fc_out post-ReLU))
    relu_backward_inplace(fp.fc_out, d);
    {
        Eigen::Map<const Eigen::VectorXd> xin(fp.se_out.v.data(),
                                              static_cast<Eigen::Index>(fp.se_out.size()));
        Eigen::Map<const Eigen::VectorXd> dy(d.v.data(), cfg.fc_out());
        MapMat dW(g[kFcW].v.data(), cfg.fc_in(), cfg.fc_out());
        dW.noalias() += xin * dy.transpose();
        Eigen::Map<Eigen::VectorXd>(g[kFcB].v.data(), cfg.fc_out()) += dy;
        MapConstMat W(p[kFcW].v.data(), cfg.fc_in(), cfg.fc_out());
        Tensor3 dse(4, 3, cfg.c3);
        Eigen::Map<Eigen::VectorXd>(dse.v.data(), cfg.fc_in()).noalias() = W * dy;
        d = std::move(dse);
    }

    // SE block: y = x * gate(x); x = fp.e[5]
    {
        const int C = cfg.c3;
        const int R = C / cfg.se_reduction;
        const Tensor3& x = fp.e[5];
        std::vector<double> dgate(static_cast<std::size_t>(C), 0.0);
        Tensor3 dx(x.h, x.w, x.c);
        for (int r = 0; r < x.h; r++)
            for (int col = 0; col < x.w; col++)
                for (int ch = 0; ch < C; ch++) {
                    const double dy = d.at(r, col, ch);
                    dgate[static_cast<std::size_t>(ch)] += dy * x.at(r, col, ch);
                    dx.at(r, col, ch) = dy * fp.se_gate[static_cast<std::size_t>(ch)];
                }
        std::vector<double> dz2(static_cast<std::size_t>(C));
        for (int ch = 0; ch < C; ch++) {
            const double s = fp.se_gate[static_cast<std::size_t>(ch)];
            dz2[static_cast<std::size_t>(ch)] = dgate[static_cast<std::size_t>(ch)] * s * (1.0 - s);
        }
        std::vector<double> dz1(static_cast<std::size_t>(R), 0.0);
        for (int j = 0; j < R; j++) {
            const double z = fp.se_z1[static_cast<std::size_t>(j)];
            double acc = 0.0;
            for (int ch = 0; ch < C; ch++) {
                g[kSeW2].v[static_cast<std::size_t>(j) * C + ch] +=
                    z * dz2[static_cast<std::size_t>(ch)];
                acc += p[kSeW2].v[static_cast<std::size_t>(j) * C + ch] *
                       dz2[static_cast<std::size_t>(ch)];
            }
            dz1[static_cast<std::size_t>(j)] = z > 0.0 ? acc : 0.0;
        }
        for (int ch = 0; ch < C; ch++) g[kSeB2].v[static_cast<std::size_t>(ch)] +=
            dz2[static_cast<std::size_t>(ch)];
        std::vector<double> ds(static_cast<std::size_t>(C), 0.0);
        for (int ch = 0; ch < C; ch++) {
            double acc = 0.0;
            for (int j = 0; j < R; j++) {
                g[kSeW1].v[static_cast<std::size_t>(ch) * R + j] +=
                    fp.se_s[static_cast<std::size_t>(ch)] * dz1[static_cast<std::size_t>(j)];
                acc += p[kSeW1].v[static_cast<std::size_t>(ch) * R + j] *
                       dz1[static_cast<std::size_t>(j)];
            }
            ds[static_cast<std::size_t>(ch)] = acc;
        }
        for (int j = 0; j < R; j++) g[kSeB1].v[static_cast<std::size_t>(j)] +=
            dz1[static_cast<std::size_t>(j)];
        const double inv_hw = 1.0 / (static_cast<double>(x.h) * x.w);
        for (int r = 0; r < x.h; r++)
            for (int col = 0; col < x.w; col++)
                for (int ch = 0; ch < C; ch++)
                    dx.at(r, col, ch) += ds[static_cast<std::size_t>(ch)] * inv_hw;
        d = std::move(dx);
    }

    // encoder chain
    for (int i = 5; i >= 0; i--) {
        relu_backward_inplace(fp.e[i], d);
        const Tensor3& below = i > 0 ? fp.e[i - 1] : fp.x;
        conv_backward(plans.enc[i], below, p[kEnc1W + 2 * i], d, g[kEnc1W + 2 * i],
                      g[kEnc1B + 2 * i], dprev);
        d = std::move(dprev);
    }
}

// Same, but `d_figure` is d(loss)/d(output pixel); the sigmoid derivative is
// applied numerically. Fine away from saturation; losses that saturate the
// output should use backward_logits with the folded form instead.
inline void backward(const NetParams& p, const ForwardPass& fp,
                     const std::vector<double>& d_figure, NetParams& g) {
    if (d_figure.size() != fp.d_out[6].size()) fail("backward: output gradient size mismatch");
    std::vector<double> d_logit(d_figure.size());
    for (std::size_t i = 0; i < d_logit.size(); i++) {
        const double s = fp.d_out[6].v[i];
        d_logit[i] = d_figure[i] * s * (1.0 - s);
    }
    backward_logits(p, fp, d_logit, g);
}

// ---- checkpoint ----------------------------------------------------------------

namespace net_detail {

inline constexpr char kCheckpointMagic[8] = {'W', 'S', 'N', 'E', 'T', 'C', 'K', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; i++) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) fail(path + ": truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ofstream& out, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; i++) {
        std::uint64_t bits;
        std::memcpy(&bits, p + i, 8);
        unsigned char b[8];
        for (int k = 0; k < 8; k++) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

inline void get_f64(std::ifstream& in, double* p, std::size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) fail(path + ": truncated checkpoint payload");
    for (std::size_t i = 0; i < n; i++) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; k++)
            bits |= static_cast<std::uint64_t>(buf[i * 8 + static_cast<std::size_t>(k)]) << (8 * k);
        std::memcpy(p + i, &bits, 8);
    }
}

}  // namespace net_detail

inline void save_checkpoint(const std::string& path, const NetParams& p) {
    using namespace net_detail;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out.write(kCheckpointMagic, 8);
    put_u32(out, kCheckpointVersion);
    const NetConfig& c = p.config;
    for (int v : {c.c1, c.c2, c.c3, c.se_reduction, c.fc_channels, c.d1, c.d2, c.d3})
        put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(p.t.size()));
    for (const ParamTensor& t : p.t) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (const ParamTensor& t : p.t) put_f64(out, t.v.data(), t.v.size());
    if (!out) fail("write failed: " + path);
}

inline NetParams load_checkpoint(const std::string& path) {
    using namespace net_detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        fail(path + ": not a checkpoint file (bad magic)");
    const std::uint32_t version = get_u32(in, path);
    if (version != kCheckpointVersion)
        fail(path + ": unsupported checkpoint version " + std::to_string(version));
    NetConfig cfg;
    cfg.c1 = static_cast<int>(get_u32(in, path));
    cfg.c2 = static_cast<int>(get_u32(in, path));
    cfg.c3 = static_cast<int>(get_u32(in, path));
    cfg.se_reduction = static_cast<int>(get_u32(in, path));
    cfg.fc_channels = static_cast<int>(get_u32(in, path));
    cfg.d1 = static_cast<int>(get_u32(in, path));
    cfg.d2 = static_cast<int>(get_u32(in, path));
    cfg.d3 = static_cast<int>(get_u32(in, path));
    NetParams p = make_zero_params(cfg);
    const std::uint32_t count = get_u32(in, path);
    if (count != p.t.size())
        fail(path + ": checkpoint holds " + std::to_string(count) + " tensors, expected " +
             std::to_string(p.t.size()));
    for (ParamTensor& t : p.t) {
        const std::uint32_t name_len = get_u32(in, path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in || name != t.name) fail(path + ": tensor name mismatch, expected " + t.name);
        const std::uint32_t nd = get_u32(in, path);
        if (nd != t.shape.size()) fail(path + ": rank mismatch for " + t.name);
        for (int d : t.shape)
            if (get_u32(in, path) != static_cast<std::uint32_t>(d))
                fail(path + ": shape mismatch for " + t.name);
    }
    for (ParamTensor& t : p.t) get_f64(in, t.v.data(), t.v.size(), path);
    return p;
}

}  // namespace wisense
