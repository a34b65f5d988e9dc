#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "afp/errors.hpp"
#include "afp/peaks.hpp"
#include "afp/spectrogram.hpp"

namespace afp {

// --- pixel distances -----------------------------------------------------------

inline void require_same_shape(const Spectrogram& a, const Spectrogram& b, const char* what) {
    if (!a.same_shape(b)) throw InvalidInput(std::string(what) + ": shape mismatch");
}

// (sum |a-b|^p)^(1/p), p in {1, 2}
inline double lp_distance(const Spectrogram& a, const Spectrogram& b, int p) {
    require_same_shape(a, b, "lp_distance");
    if (p != 1 && p != 2) throw InvalidInput("lp_distance: p must be 1 or 2");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = std::abs(a.values[i] - b.values[i]);
        acc += (p == 1) ? d : d * d;
    }
    return (p == 1) ? acc : std::sqrt(acc);
}

// mean of |a-b|^p per pixel (p=1: mean absolute error, p=2: mean squared error)
inline double mean_lp(const Spectrogram& a, const Spectrogram& b, int p) {
    require_same_shape(a, b, "mean_lp");
    if (p != 1 && p != 2) throw InvalidInput("mean_lp: p must be 1 or 2");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = std::abs(a.values[i] - b.values[i]);
        acc += (p == 1) ? d : d * d;
    }
    return acc / static_cast<double>(a.values.size());
}

// --- PSNR ------------------------------------------------------------------------

enum class PsnrMode {
    standard_mse,      // 10*log10(MAX^2 / MSE)
    paper_literal_l1,  // 10*log10(MAX^2 / mean absolute error)
};

struct PsnrResult {
    double db = 0.0;
    bool infinite = false;  // identical inputs
};

inline double psnr_from_mse(double max_value, double mse) {
    return 10.0 * std::log10(max_value * max_value / mse);
}

inline PsnrResult psnr(const Spectrogram& a, const Spectrogram& b, double max_value,
                       PsnrMode mode = PsnrMode::standard_mse) {
    require_same_shape(a, b, "psnr");
    if (!(max_value > 0.0)) throw InvalidInput("psnr: max value must be positive");
    const double err = mean_lp(a, b, mode == PsnrMode::standard_mse ? 2 : 1);
    if (err == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {psnr_from_mse(max_value, err), false};
}

// --- SSIM / DSSIM ------------------------------------------------------------------

struct SsimParams {
    int window = 11;
    bool gaussian = true;   // false: uniform window
    double sigma = 1.5;
    double dynamic_range = 1.0;  // L
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

// Standard stabilizers C1=(0.01 L)^2, C2=(0.03 L)^2, C3=C2/2.
inline SsimParams make_ssim_params(double dynamic_range, int window = 11, bool gaussian = true,
                                   double sigma = 1.5) {
    if (!(dynamic_range > 0.0)) throw InvalidInput("ssim: dynamic range must be positive");
    if (window < 1) throw InvalidInput("ssim: window must be positive");
    SsimParams p;
    p.window = window;
    p.gaussian = gaussian;
    p.sigma = sigma;
    p.dynamic_range = dynamic_range;
    p.c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    p.c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    p.c3 = p.c2 / 2.0;
    return p;
}

// Mean over sliding windows of luminance * contrast * structure:
//   l = (2 ux uy + C1) / (ux^2 + uy^2 + C1)
//   c = (2 sx sy + C2) / (sx^2 + sy^2 + C2)
//   s = (sxy + C3) / (sx sy + C3)
inline double ssim(const Spectrogram& a, const Spectrogram& b, const SsimParams& p) {
    require_same_shape(a, b, "ssim");
    if (p.c1 <= 0.0 || p.c2 <= 0.0 || p.c3 <= 0.0)
        throw InvalidInput("ssim: stabilizers must be positive (use make_ssim_params)");
    const int win = p.window;
    if (win > a.frames || win > a.bins) throw InvalidInput("ssim: window larger than input");

    std::vector<double> weights(static_cast<std::size_t>(win) * win, 1.0);
    if (p.gaussian) {
        const double half = (win - 1) / 2.0;
        for (int i = 0; i < win; ++i)
            for (int j = 0; j < win; ++j) {
                const double di = i - half, dj = j - half;
                weights[static_cast<std::size_t>(i) * win + j] =
                    std::exp(-(di * di + dj * dj) / (2.0 * p.sigma * p.sigma));
            }
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double& w : weights) w /= wsum;

    double total = 0.0;
    std::int64_t n_windows = 0;
    for (int t = 0; t + win <= a.frames; ++t) {
        for (int f = 0; f + win <= a.bins; ++f) {
            double mx = 0.0, my = 0.0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double w = weights[static_cast<std::size_t>(i) * win + j];
                    mx += w * a.at(t + i, f + j);
                    my += w * b.at(t + i, f + j);
                }
            double vx = 0.0, vy = 0.0, cov = 0.0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double w = weights[static_cast<std::size_t>(i) * win + j];
                    const double dxv = a.at(t + i, f + j) - mx;
                    const double dyv = b.at(t + i, f + j) - my;
                    vx += w * dxv * dxv;
                    vy += w * dyv * dyv;
                    cov += w * dxv * dyv;
                }
            const double sx = std::sqrt(std::max(0.0, vx));
            const double sy = std::sqrt(std::max(0.0, vy));
            const double l = (2.0 * mx * my + p.c1) / (mx * mx + my * my + p.c1);
            const double c = (2.0 * sx * sy + p.c2) / (vx + vy + p.c2);
            const double s = (cov + p.c3) / (sx * sy + p.c3);
            total += l * c * s;
            ++n_windows;
        }
    }
    return total / static_cast<double>(n_windows);
}

inline double dssim(const Spectrogram& a, const Spectrogram& b, const SsimParams& p) {
    return (1.0 - ssim(a, b, p)) / 2.0;
}

// --- tolerance-window peak metrics ---------------------------------------------------

struct PeakMetricReport {
    std::int64_t tp = 0;  // predicted peaks with a reference peak in the window
    std::int64_t fp = 0;
    std::int64_t fn = 0;  // reference peaks with no predicted peak in the window
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Precision and recall with a +/- tol cell tolerance (tol=1: the 3x3 window).
// The two sides are counted independently: a predicted peak is a true
// positive if any reference peak falls in its window; a reference peak is
// missed if no predicted peak falls in its window. Both masks empty scores
// 1.0 across the board; one-sided empties score 0.
inline PeakMetricReport peak_prf(const PeakMask& pred, const PeakMask& ref, int tol = 1) {
    if (pred.frames != ref.frames || pred.bins != ref.bins)
        throw InvalidInput("peak_prf: shape mismatch");
    if (tol < 0) throw InvalidInput("peak_prf: tolerance must be >= 0");

    auto any_in_window = [&](const PeakMask& m, int t, int f) {
        const int t0 = std::max(0, t - tol), t1 = std::min(m.frames - 1, t + tol);
        const int f0 = std::max(0, f - tol), f1 = std::min(m.bins - 1, f + tol);
        for (int tt = t0; tt <= t1; ++tt)
            for (int ff = f0; ff <= f1; ++ff)
                if (m.at(tt, ff)) return true;
        return false;
    };

    std::int64_t n_pred = 0, n_ref = 0, tp_pred = 0, tp_ref = 0;
    for (int t = 0; t < pred.frames; ++t)
        for (int f = 0; f < pred.bins; ++f) {
            if (pred.at(t, f)) {
                ++n_pred;
                if (any_in_window(ref, t, f)) ++tp_pred;
            }
            if (ref.at(t, f)) {
                ++n_ref;
                if (any_in_window(pred, t, f)) ++tp_ref;
            }
        }

    PeakMetricReport r;
    r.tp = tp_pred;
    r.fp = n_pred - tp_pred;
    r.fn = n_ref - tp_ref;
    if (n_pred == 0 && n_ref == 0) {
        r.precision = r.recall = r.f1 = 1.0;
        return r;
    }
    r.precision = n_pred > 0 ? static_cast<double>(tp_pred) / static_cast<double>(n_pred) : 0.0;
    r.recall = n_ref > 0 ? static_cast<double>(tp_ref) / static_cast<double>(n_ref) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

// --- continuous Tversky family ----------------------------------------------------

struct TverskyParams {
    double alpha = 0.7;
    double beta = 0.3;
    double gamma = 0.75;
};

inline void validate(const TverskyParams& p) {
    if (p.alpha < 0.0 || p.beta < 0.0) throw InvalidInput("tversky: alpha, beta must be >= 0");
    if (std::abs(p.alpha + p.beta - 1.0) > 1e-12) throw InvalidInput("tversky: alpha + beta must be 1");
    if (!(p.gamma > 0.0)) throw InvalidInput("tversky: gamma must be positive");
}

struct TverskyComponents {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
};

// Continuous TP/FP/FN over sparse magnitude maps: a pixel counts as positive
// when strictly non-zero. TP value = gt*pred, FP value = pred, FN value = gt;
// true negatives carry no value.
inline TverskyComponents tversky_components(const Spectrogram& pred, const Spectrogram& gt) {
    require_same_shape(pred, gt, "tversky_components");
    TverskyComponents c;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double p = pred.values[i], g = gt.values[i];
        if (p < 0.0 || g < 0.0) throw InvalidInput("tversky_components: negative values");
        if (p > 0.0 && g > 0.0) c.tp += g * p;
        else if (p > 0.0) c.fp += p;
        else if (g > 0.0) c.fn += g;
    }
    return c;
}

// TI = TP / (TP + alpha*FP + beta*FN); all-zero components define TI = 1.
inline double tversky_index(const TverskyComponents& c, const TverskyParams& p) {
    validate(p);
    const double denom = c.tp + p.alpha * c.fp + p.beta * c.fn;
    if (denom <= 0.0) return (c.tp == 0.0 && c.fp == 0.0 && c.fn == 0.0) ? 1.0 : 0.0;
    return c.tp / denom;
}

inline double tversky_loss(const TverskyComponents& c, const TverskyParams& p) {
    return 1.0 - tversky_index(c, p);
}

// FTL = (1 - TI)^gamma; gamma = 1 reduces to the plain Tversky loss.
inline double focal_tversky_loss(const TverskyComponents& c, const TverskyParams& p) {
    return std::pow(1.0 - tversky_index(c, p), p.gamma);
}

// --- forward feature distance over pipeline stages ------------------------------------

enum class FeatureLossBase { l1, focal_tversky };

// Runs the peak pipeline up to `stage` on both spectrograms and returns the
// chosen base distance between the two stage outputs. Stage 3 compares
// magnitude-at-peak maps. Forward values only.
inline double drfl_distance(const Spectrogram& pred, const Spectrogram& clean, int stage,
                            FeatureLossBase base, const PipelineConfig& cfg,
                            const TverskyParams& tversky = {}) {
    require_same_shape(pred, clean, "drfl_distance");
    if (stage < 1 || stage > 3) throw InvalidInput("drfl_distance: stage must be 1, 2 or 3");

    auto feature = [&](const Spectrogram& s) -> Spectrogram {
        Spectrogram f1 = stage1_salience(s, cfg.stage);
        if (stage == 1) return f1;
        Spectrogram f2 = stage2_octave_energy(f1, cfg.stage, cfg.bins_per_octave);
        if (stage == 2) return f2;
        PeakPickingParams picking = cfg.picking;
        if (!(picking.silence_threshold > 0.0))
            picking.silence_threshold = cfg.silence_rel * f2.max_value();
        return magnitude_map(stage3_extract_peaks(f2, picking), s.sample_rate_hz, s.hop_samples);
    };

    const Spectrogram fp = feature(pred);
    const Spectrogram fc = feature(clean);
    if (base == FeatureLossBase::l1) return lp_distance(fp, fc, 1);
    return focal_tversky_loss(tversky_components(fp, fc), tversky);
}

}  // namespace afp
