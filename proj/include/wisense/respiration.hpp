#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "wisense/common.hpp"
#include "wisense/fft.hpp"
#include "wisense/sanitize.hpp"
#include "wisense/wavelet.hpp"

namespace wisense {

inline constexpr double kMadScale = 1.4826;  // makes MAD a consistent sigma estimate
inline constexpr double kBreathMinHz = 10.0 / 60.0;
inline constexpr double kBreathMaxHz = 37.0 / 60.0;
// Refractory between accepted peaks: the inter-peak interval of the fastest
// in-band breather.
inline constexpr double kPeakSpacingS = 60.0 / 37.0;
inline constexpr double kPeakMedianWindowS = 30.0;
inline constexpr double kPeakProminenceFraction = 0.3;
inline constexpr double kApneaWindowS = 10.0;

struct StreamSource {
    bool amplitude = true;  // false: relative phase
    int subcarrier = 0;
};

struct RespirationCurve {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    StreamSource source;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

// ---- Hampel filter -------------------------------------------------------------

namespace resp_detail {

inline double sorted_median(const std::vector<double>& s) {
    const std::size_t m = s.size();
    return m % 2 == 1 ? s[m / 2] : (s[m / 2 - 1] + s[m / 2]) / 2.0;
}

// Median absolute deviation of a sorted window. |s_j - med| forms two runs
// that ascend away from the median's position, so the k-th smallest deviation
// comes from a two-way merge instead of sorting; values are the same doubles a
// sort-based computation yields.
inline double sorted_mad(const std::vector<double>& s, double med) {
    const std::size_t m = s.size();
    std::size_t li = static_cast<std::size_t>(
        std::lower_bound(s.begin(), s.end(), med) - s.begin());  // next left is s[li-1]
    std::size_t ri = li;
    const double inf = std::numeric_limits<double>::infinity();
    auto next = [&]() {
        const double dl = li > 0 ? med - s[li - 1] : inf;
        const double dr = ri < m ? s[ri] - med : inf;
        if (dl <= dr) {
            li--;
            return dl;
        }
        ri++;
        return dr;
    };
    if (m % 2 == 1) {
        double d = 0.0;
        for (std::size_t k = 0; k <= m / 2; k++) d = next();
        return d;
    }
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t k = 0; k < m / 2 + 1; k++) {
        d1 = d2;
        d2 = next();
    }
    return (d1 + d2) / 2.0;
}

inline void sorted_insert(std::vector<double>& s, double x) {
    s.insert(std::upper_bound(s.begin(), s.end(), x), x);
}

inline void sorted_erase(std::vector<double>& s, double x) {
    s.erase(std::lower_bound(s.begin(), s.end(), x));
}

}  // namespace resp_detail

// Centered rolling window of total width 2*window+1, truncated at the edges.
// A sample is replaced by the window median when it deviates from it by more
// than threshold * 1.4826 * MAD.
inline std::vector<double> hampel(const std::vector<double>& x, int window, double threshold) {
    if (x.empty()) fail("hampel: empty series");
    if (window < 1) fail("hampel: window must be >= 1");
    if (threshold < 0.0) fail("hampel: threshold must be >= 0");
    const std::size_t n = x.size();
    const std::size_t w = static_cast<std::size_t>(window);
    std::vector<double> out = x;
    std::vector<double> win;
    win.reserve(2 * w + 2);
    std::size_t lo = 0, hi = 0;  // current window is x[lo, hi)
    for (std::size_t j = 0; j < std::min(n, w + 1); j++) resp_detail::sorted_insert(win, x[j]);
    hi = std::min(n, w + 1);
    for (std::size_t i = 0; i < n; i++) {
        const std::size_t want_lo = i > w ? i - w : 0;
        const std::size_t want_hi = std::min(n, i + w + 1);
        while (hi < want_hi) resp_detail::sorted_insert(win, x[hi++]);
        while (lo < want_lo) resp_detail::sorted_erase(win, x[lo++]);
        const double med = resp_detail::sorted_median(win);
        const double mad = resp_detail::sorted_mad(win, med);
        if (std::abs(x[i] - med) > threshold * kMadScale * mad) out[i] = med;
    }
    return out;
}

// Subtract the slow quasi-static component (wide low-threshold Hampel acts as
// a rolling-median tracker), then knock out residual spikes.
inline std::vector<double> remove_static(const std::vector<double>& x) {
    if (x.size() <= 200) fail("remove_static: need more than 200 samples");
    const std::vector<double> trend = hampel(x, 100, 0.01);
    std::vector<double> dynamic(x.size());
    for (std::size_t i = 0; i < x.size(); i++) dynamic[i] = x[i] - trend[i];
    return hampel(dynamic, 20, 3.0);
}

// ---- RNR stream selection ------------------------------------------------------

struct RnrResult {
    double value = 0.0;
    double peak_freq_hz = 0.0;
};

// Fraction of one-sided spectral power concentrated at the strongest breathing
// bin (plus its two neighbors) within 10-37 breaths/minute.
inline RnrResult rnr(const std::vector<double>& x, double sample_rate_hz) {
    if (x.size() < 256) fail("rnr: need at least 256 samples");
    if (sample_rate_hz <= 0.0) fail("rnr: sample rate must be positive");
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<cdouble> buf(n);
    for (std::size_t i = 0; i < n; i++) buf[i] = cdouble(x[i] - mean, 0.0);
    buf = fft(std::move(buf));

    const std::size_t half = n / 2;
    double total = 0.0;
    std::size_t peak = 0;
    double peak_power = -1.0;
    const double tol = 1e-12;
    for (std::size_t k = 1; k <= half; k++) {
        const double p = std::norm(buf[k]);
        total += p;
        const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
        if (f >= kBreathMinHz - tol && f <= kBreathMaxHz + tol && p > peak_power) {
            peak_power = p;
            peak = k;
        }
    }
    if (peak == 0)
        fail("rnr: no spectral bins inside the breathing band at this length/rate");
    if (total <= 0.0) fail("rnr: series has no spectral power (constant input)");
    double resp = 0.0;
    for (std::size_t k = peak - 1; k <= peak + 1; k++)
        if (k >= 1 && k <= half) resp += std::norm(buf[k]);
    RnrResult r;
    r.value = resp / total;
    r.peak_freq_hz = static_cast<double>(peak) * sample_rate_hz / static_cast<double>(n);
    return r;
}

struct SelectedStream {
    RespirationCurve curve;  // static-removed, not yet denoised
    double rnr_value = 0.0;
    double peak_freq_hz = 0.0;
};

// Rank all 60 candidate streams (30 reference-antenna amplitudes, 30 relative
// phases) by RNR after static removal; ties prefer amplitude, then the lower
// subcarrier. Constant candidates rank below everything.
inline SelectedStream select_stream(const SanitizedStreams& s, double sample_rate_hz) {
    const std::size_t n = s.frame_count();
    if (n < 256) fail("select_stream: need at least 256 frames");
    SelectedStream best;
    double best_value = -1.0;
    std::vector<double> series(n);
    for (int pass = 0; pass < 2; pass++) {
        const bool amplitude = pass == 0;
        const std::vector<double>& src = amplitude ? s.amp_ref : s.rel_phase;
        for (int sc = 0; sc < kSubcarrierCount; sc++) {
            for (std::size_t t = 0; t < n; t++)
                series[t] = src[static_cast<std::size_t>(sc) * n + t];
            std::vector<double> dynamic = remove_static(series);
            const bool constant =
                std::all_of(dynamic.begin(), dynamic.end(),
                            [&](double v) { return v == dynamic.front(); });
            RnrResult r;
            if (!constant) r = rnr(dynamic, sample_rate_hz);
            const double value = constant ? -1.0 : r.value;
            if (value > best_value) {
                best_value = value;
                best.curve.samples = std::move(dynamic);
                best.curve.sample_rate_hz = sample_rate_hz;
                best.curve.source.amplitude = amplitude;
                best.curve.source.subcarrier = sc;
                best.rnr_value = constant ? 0.0 : r.value;
                best.peak_freq_hz = r.peak_freq_hz;
            }
        }
    }
    if (best.curve.samples.empty()) {
        // every candidate constant: fall back to the first amplitude stream
        best.curve.samples.assign(n, 0.0);
        for (std::size_t t = 0; t < n; t++) best.curve.samples[t] = s.amp_ref[t];
        best.curve.samples = remove_static(best.curve.samples);
        best.curve.sample_rate_hz = sample_rate_hz;
        best.curve.source = StreamSource{true, 0};
    }
    return best;
}

// Keep only the 6-level db4 approximation: passband roughly
// [0, sample_rate/2^7], which covers 10-37 bpm at 100 Hz.
inline RespirationCurve wavelet_denoise(const RespirationCurve& in) {
    if (in.samples.size() < 64) fail("wavelet_denoise: need at least 64 samples");
    RespirationCurve out = in;
    out.samples = wavelet_lowpass(in.samples, 6);
    return out;
}

// ---- peak and apnea detection --------------------------------------------------

namespace resp_detail {

struct Candidate {
    std::size_t index = 0;
    double prominence = 0.0;
};

// Strict local maxima; a flat run bounded by lower samples on both sides
// counts once, at the middle of the run.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) j++;
            if (j + 1 < n && x[j + 1] < x[i]) {
                out.push_back((i + j) / 2);
                i = j + 1;
                continue;
            }
            i = j + 1;
            continue;
        }
        i++;
    }
    return out;
}

// Topographic prominence: walk out on each side until a higher sample or the
// edge, take the minimum over that stretch, and measure against the higher of
// the two side minima.
inline double prominence_at(const std::vector<double>& x, std::size_t p) {
    const double h = x[p];
    double left_min = h;
    for (std::size_t i = p; i-- > 0;) {
        if (x[i] > h) break;
        left_min = std::min(left_min, x[i]);
    }
    double right_min = h;
    for (std::size_t i = p + 1; i < x.size(); i++) {
        if (x[i] > h) break;
        right_min = std::min(right_min, x[i]);
    }
    return h - std::max(left_min, right_min);
}

}  // namespace resp_detail

// Walk candidates in time order; accept a candidate when its prominence
// reaches min_amp_fraction times the median prominence of the peaks already
// accepted in the trailing 30 s, and it is at least the refractory spacing
// after the last accepted peak. While no accepted peak lies inside the
// trailing window (start of trace, or after a long silent stretch) the gate
// falls back to the strongest candidate anywhere in the curve; otherwise a
// small noise wiggle arriving before the first real peak would seed the
// history at ripple scale and the threshold would never recover.
inline std::vector<std::size_t> detect_peaks(const RespirationCurve& curve,
                                             double min_amp_fraction = kPeakProminenceFraction) {
    if (curve.sample_rate_hz <= 0.0) fail("detect_peaks: sample rate must be positive");
    const std::vector<double>& x = curve.samples;
    const double fs = curve.sample_rate_hz;
    std::vector<resp_detail::Candidate> cands;
    double max_prom = 0.0;
    for (std::size_t idx : resp_detail::local_maxima(x)) {
        cands.push_back({idx, resp_detail::prominence_at(x, idx)});
        max_prom = std::max(max_prom, cands.back().prominence);
    }

    // The refractory is held in whole samples: a breather at exactly the
    // band-edge rate has on-grid inter-peak gaps equal to the refractory up to
    // sample rounding, and comparing time quotients in floating point would
    // drop such peaks on a one-ulp coin flip.
    const auto min_gap_samples =
        static_cast<std::size_t>(std::llround(kPeakSpacingS * fs));
    std::vector<std::size_t> accepted;
    std::vector<double> accepted_prom;
    std::vector<double> window_proms;
    for (const auto& c : cands) {
        const double t = static_cast<double>(c.index) / fs;
        if (!accepted.empty() && c.index - accepted.back() < min_gap_samples) continue;
        window_proms.clear();
        for (std::size_t k = accepted.size(); k-- > 0;) {
            const double tk = static_cast<double>(accepted[k]) / fs;
            if (tk <= t - kPeakMedianWindowS) break;
            window_proms.push_back(accepted_prom[k]);
        }
        double reference = max_prom;
        if (!window_proms.empty()) {
            std::sort(window_proms.begin(), window_proms.end());
            reference = resp_detail::sorted_median(window_proms);
        }
        if (c.prominence < min_amp_fraction * reference) continue;
        accepted.push_back(c.index);
        accepted_prom.push_back(c.prominence);
    }
    return accepted;
}

struct ApneaReport {
    std::vector<std::size_t> peak_indices;
    std::vector<std::pair<double, double>> apnea_intervals;  // (start_s, end_s)
    double window_s = kApneaWindowS;
};

// A gap of more than window_s between consecutive peaks (trace edges count as
// boundaries) is an apnea; the interval is trimmed half a window off each
// bounding peak and clipped to the gap.
inline ApneaReport detect_apnea(const std::vector<std::size_t>& peaks, double sample_rate_hz,
                                double duration_s, double window_s = kApneaWindowS) {
    if (sample_rate_hz <= 0.0 || duration_s <= 0.0)
        fail("detect_apnea: rate and duration must be positive");
    if (window_s <= 0.0) fail("detect_apnea: window must be positive");
    ApneaReport rep;
    rep.peak_indices = peaks;
    rep.window_s = window_s;

    std::vector<double> bounds;
    bounds.push_back(0.0);
    for (std::size_t idx : peaks) {
        const double t = static_cast<double>(idx) / sample_rate_hz;
        if (!bounds.empty() && t < bounds.back())
            fail("detect_apnea: peak indices must be sorted");
        bounds.push_back(t);
    }
    bounds.push_back(duration_s);

    for (std::size_t i = 0; i + 1 < bounds.size(); i++) {
        const double a = bounds[i], b = bounds[i + 1];
        if (b - a <= window_s) continue;
        double start = std::max(a + window_s * 0.5, a);
        double end = std::min(b - window_s * 0.5, b);
        if (end <= start) continue;
        if (!rep.apnea_intervals.empty() && start <= rep.apnea_intervals.back().second) {
            rep.apnea_intervals.back().second = end;
        } else {
            rep.apnea_intervals.emplace_back(start, end);
        }
    }
    return rep;
}

// ---- evaluation ----------------------------------------------------------------

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail("pearson: length mismatch");
    if (a.size() < 2) fail("pearson: need at least 2 samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); i++) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); i++) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) fail("pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

// ---- end-to-end ----------------------------------------------------------------

struct BreatheResult {
    SelectedStream selected;
    RespirationCurve denoised;
    std::vector<std::size_t> peaks;
    ApneaReport apnea;
    double rate_bpm = 0.0;
};

inline BreatheResult breathe(const SanitizedStreams& streams, double sample_rate_hz) {
    BreatheResult r;
    r.selected = select_stream(streams, sample_rate_hz);
    r.denoised = wavelet_denoise(r.selected.curve);
    r.peaks = detect_peaks(r.denoised);
    const double duration = r.denoised.duration_s();
    r.apnea = detect_apnea(r.peaks, sample_rate_hz, duration);
    r.rate_bpm = static_cast<double>(r.peaks.size()) * 60.0 / duration;
    return r;
}

}  // namespace wisense
