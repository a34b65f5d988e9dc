#pragma once

#include <cmath>
#include <vector>

#include "afp/errors.hpp"
#include "afp/spectrogram.hpp"
#include "afp/waveform.hpp"

namespace afp {

// Geometry of the constant-Q filterbank. Center frequencies follow
// f_c(k) = f_min * 2^(k / bins_per_octave).
struct CqtParams {
    double f_min_hz = 65.41;     // C2
    int bins_per_octave = 24;
    int n_bins = 117;
    int hop_samples = 64;
    int sample_rate_hz = 5512;
};

inline double cqt_center_frequency(const CqtParams& p, int k) {
    if (k < 0 || k >= p.n_bins) throw RangeError("cqt: bin index out of range");
    return p.f_min_hz * std::pow(2.0, static_cast<double>(k) / p.bins_per_octave);
}

inline void validate(const CqtParams& p) {
    if (p.f_min_hz <= 0.0) throw InvalidInput("cqt: f_min must be positive");
    if (p.bins_per_octave < 1 || p.n_bins < 1) throw InvalidInput("cqt: bins must be positive");
    if (p.hop_samples < 1) throw InvalidInput("cqt: hop must be >= 1");
    if (p.sample_rate_hz <= 0) throw InvalidInput("cqt: sample rate must be positive");
    const double top = p.f_min_hz * std::pow(2.0, static_cast<double>(p.n_bins - 1) / p.bins_per_octave);
    if (!(top < p.sample_rate_hz / 2.0))
        throw InvalidInput("cqt: highest center frequency reaches Nyquist");
}

// Precomputed direct-form filterbank: one Hann-windowed complex exponential
// per bin, length ceil(Q * fs / f_c(k)) with Q = 1 / (2^(1/beta) - 1).
// Kernels are anchored to the frame center, so shifting the input by one hop
// shifts the output by exactly one frame. Magnitudes are scaled by 2/sum(w):
// a unit-amplitude sinusoid at a bin's center frequency reads close to 1.
class CqtKernel {
public:
    explicit CqtKernel(const CqtParams& params) : params_(params) {
        validate(params);
        const double q = 1.0 / (std::pow(2.0, 1.0 / params.bins_per_octave) - 1.0);
        filters_.resize(static_cast<std::size_t>(params.n_bins));
        for (int k = 0; k < params.n_bins; ++k) {
            const double fc = cqt_center_frequency(params, k);
            // length >= 4 keeps the window sum positive for extreme geometries
            const int len = std::max(4, static_cast<int>(std::ceil(q * params.sample_rate_hz / fc)));
            BinFilter& bf = filters_[k];
            bf.half = len / 2;
            bf.re.resize(static_cast<std::size_t>(len));
            bf.im.resize(static_cast<std::size_t>(len));
            double wsum = 0.0;
            for (int m = 0; m < len; ++m) {
                const double w =
                    0.5 - 0.5 * std::cos(2.0 * 3.141592653589793238462643383279502884 * m / (len - 1));
                const double phase = -2.0 * 3.141592653589793238462643383279502884 * fc *
                                     (m - bf.half) / params.sample_rate_hz;
                bf.re[m] = w * std::cos(phase);
                bf.im[m] = w * std::sin(phase);
                wsum += w;
            }
            bf.norm = 2.0 / wsum;
        }
        // longest analysis window (lowest bin) bounds the shortest legal input
        min_input_samples_ = static_cast<int>(filters_.front().re.size());
    }

    const CqtParams& params() const { return params_; }
    int min_input_samples() const { return min_input_samples_; }

    Spectrogram apply(const Waveform& w) const {
        if (w.sample_rate_hz != params_.sample_rate_hz)
            throw InvalidInput("cqt: waveform sample rate does not match params");
        const int n = static_cast<int>(w.samples.size());
        if (n < min_input_samples_)
            throw InvalidInput("cqt: input shorter than the longest analysis window");

        const int n_frames = (n + params_.hop_samples - 1) / params_.hop_samples;
        Spectrogram out(n_frames, params_.n_bins, params_.sample_rate_hz, params_.hop_samples);
        out.source_id = "";
        const double* x = w.samples.data();
        for (int t = 0; t < n_frames; ++t) {
            const int center = t * params_.hop_samples;
            for (int k = 0; k < params_.n_bins; ++k) {
                const BinFilter& bf = filters_[k];
                const int len = static_cast<int>(bf.re.size());
                const int start = center - bf.half;
                const int m_lo = std::max(0, -start);
                const int m_hi = std::min(len, n - start);  // edges: zero padding
                double acc_re = 0.0, acc_im = 0.0;
                const double* xs = x + start;
                for (int m = m_lo; m < m_hi; ++m) {
                    acc_re += xs[m] * bf.re[m];
                    acc_im += xs[m] * bf.im[m];
                }
                out.at(t, k) = std::sqrt(acc_re * acc_re + acc_im * acc_im) * bf.norm;
            }
        }
        return out;
    }

private:
    struct BinFilter {
        int half = 0;
        std::vector<double> re, im;
        double norm = 1.0;
    };

    CqtParams params_;
    std::vector<BinFilter> filters_;
    int min_input_samples_ = 0;
};

inline Spectrogram compute_cqt(const Waveform& w, const CqtParams& params) {
    return CqtKernel(params).apply(w);
}

}  // namespace afp
