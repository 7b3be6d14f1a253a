#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wisense/common.hpp"

namespace wisense {

// Dense row-major (height, width, channel) tensor, channel fastest.
struct Tensor3 {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int h_, int w_, int c_) { resize(h_, w_, c_); }

    void resize(int h_, int w_, int c_) {
        if (h_ <= 0 || w_ <= 0 || c_ <= 0) fail("Tensor3: non-positive dimension");
        h = h_;
        w = w_;
        c = c_;
        v.assign(static_cast<std::size_t>(h) * w * c, 0.0);
    }

    std::size_t size() const { return v.size(); }

    double& at(int r, int col, int ch) {
        return v[(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(col)) * c +
                 static_cast<std::size_t>(ch)];
    }
    const double& at(int r, int col, int ch) const {
        return v[(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(col)) * c +
                 static_cast<std::size_t>(ch)];
    }

    bool same_shape(const Tensor3& o) const { return h == o.h && w == o.w && c == o.c; }

    std::string shape_str() const {
        return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
    }
};

}  // namespace wisense
