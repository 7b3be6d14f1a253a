#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "wisense/csi.hpp"
#include "wisense/common.hpp"
#include "wisense/io.hpp"

namespace wisense {

struct Segment {
    double r0 = 0, c0 = 0, r1 = 0, c1 = 0;
};

// Ground-truth pose: a handful of line segments in figure coordinates
// (row 0 at the top). An empty list renders to an all-black figure.
struct SkeletonParams {
    std::vector<Segment> segments;
};

// Five-segment stick figure at a horizontal position controlled by progress
// in [0, 1]; limbs swing through two stride cycles across the walk. All
// coordinates stay well inside the 120x160 canvas.
inline SkeletonParams walker_pose(double progress) {
    if (progress < 0.0) progress = 0.0;
    if (progress > 1.0) progress = 1.0;
    const double col = 24.0 + progress * 112.0;
    const double swing = std::sin(progress * 4.0 * kPi);
    SkeletonParams p;
    p.segments.push_back({42.0, col, 64.0, col});                           // torso
    p.segments.push_back({46.0, col, 58.0, col - 9.0 * swing});             // left arm
    p.segments.push_back({46.0, col, 58.0, col + 9.0 * swing});             // right arm
    p.segments.push_back({64.0, col, 82.0, col - 7.0 * swing});             // left leg
    p.segments.push_back({64.0, col, 82.0, col + 7.0 * swing});             // right leg
    return p;
}

namespace skeleton_detail {

inline double point_segment_distance(double pr, double pc, const Segment& s) {
    const double dr = s.r1 - s.r0;
    const double dc = s.c1 - s.c0;
    const double len2 = dr * dr + dc * dc;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((pr - s.r0) * dr + (pc - s.c0) * dc) / len2;
        t = std::min(1.0, std::max(0.0, t));
    }
    const double qr = s.r0 + t * dr;
    const double qc = s.c0 + t * dc;
    return std::hypot(pr - qr, pc - qc);
}

}  // namespace skeleton_detail

// Rasterize segments with a one-pixel anti-aliased falloff: a pixel's value is
// max over segments of (1 - distance to the segment), clamped at zero. Pixel
// centers sit on integer coordinates.
inline PoseFigure render_skeleton(const SkeletonParams& params) {
    PoseFigure fig;
    for (std::size_t i = 0; i < params.segments.size(); i++) {
        const Segment& s = params.segments[i];
        for (double v : {s.r0, s.r1})
            if (v < 0 || v > kFigureRows - 1)
                fail("render_skeleton: segment " + std::to_string(i) + " row out of bounds");
        for (double v : {s.c0, s.c1})
            if (v < 0 || v > kFigureCols - 1)
                fail("render_skeleton: segment " + std::to_string(i) + " column out of bounds");
        const int r_lo = std::max(0, static_cast<int>(std::floor(std::min(s.r0, s.r1))) - 1);
        const int r_hi = std::min(kFigureRows - 1, static_cast<int>(std::ceil(std::max(s.r0, s.r1))) + 1);
        const int c_lo = std::max(0, static_cast<int>(std::floor(std::min(s.c0, s.c1))) - 1);
        const int c_hi = std::min(kFigureCols - 1, static_cast<int>(std::ceil(std::max(s.c0, s.c1))) + 1);
        for (int r = r_lo; r <= r_hi; r++) {
            for (int c = c_lo; c <= c_hi; c++) {
                const double d = skeleton_detail::point_segment_distance(r, c, s);
                const double cov = 1.0 - d;
                if (cov > fig.at(r, c)) fig.at(r, c) = cov;
            }
        }
    }
    for (double& v : fig.px)
        if (v < 0.0) v = 0.0;
    return fig;
}

// ---- per-frame skeleton CSV --------------------------------------------------
//
//   # frames = N
//   frame,segment,r0,c0,r1,c1

inline void write_skeleton_csv(const std::string& path, const std::vector<SkeletonParams>& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "# frames = " << frames.size() << "\n";
    out << "frame,segment,r0,c0,r1,c1\n";
    for (std::size_t f = 0; f < frames.size(); f++) {
        const auto& segs = frames[f].segments;
        for (std::size_t s = 0; s < segs.size(); s++) {
            out << f << ',' << s << ',' << fmt_g17(segs[s].r0) << ',' << fmt_g17(segs[s].c0) << ','
                << fmt_g17(segs[s].r1) << ',' << fmt_g17(segs[s].c1) << "\n";
        }
    }
    if (!out) fail("write failed: " + path);
}

inline std::vector<SkeletonParams> read_skeleton_csv(const std::string& path) {
    const std::vector<std::string> lines = io_detail::read_lines(path);
    std::size_t n_frames = 0;
    std::size_t i = 0;
    bool have_count = false;
    for (; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::size_t eq = t.find('=');
            if (eq != std::string::npos &&
                io_detail::trim(t.substr(1, eq - 1)) == "frames") {
                n_frames = io_detail::parse_u64(io_detail::trim(t.substr(eq + 1)),
                                                path + " line " + std::to_string(i + 1));
                have_count = true;
            }
            continue;
        }
        break;
    }
    if (!have_count) fail(path + ": missing '# frames = N' header");
    if (i >= lines.size() || io_detail::trim(lines[i]) != "frame,segment,r0,c0,r1,c1")
        fail(path + " line " + std::to_string(i + 1) + ": expected header 'frame,segment,r0,c0,r1,c1'");
    std::vector<SkeletonParams> frames(n_frames);
    for (i++; i < lines.size(); i++) {
        const std::string t = io_detail::trim(lines[i]);
        if (t.empty()) continue;
        const std::string where = path + " line " + std::to_string(i + 1);
        const auto cols = io_detail::split(t, ',');
        if (cols.size() != 6) fail(where + ": expected 6 columns");
        const std::uint64_t f = io_detail::parse_u64(cols[0], where);
        if (f >= n_frames) fail(where + ": frame index out of range");
        Segment s;
        s.r0 = io_detail::parse_double(cols[2], where);
        s.c0 = io_detail::parse_double(cols[3], where);
        s.r1 = io_detail::parse_double(cols[4], where);
        s.c1 = io_detail::parse_double(cols[5], where);
        frames[f].segments.push_back(s);
    }
    return frames;
}

}  // namespace wisense
