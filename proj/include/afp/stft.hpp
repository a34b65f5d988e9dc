#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "afp/errors.hpp"
#include "afp/fft.hpp"
#include "afp/spectrogram.hpp"
#include "afp/waveform.hpp"

namespace afp {

enum class WindowKind { hann, rectangular };

struct StftParams {
    int window_len = 1024;
    int hop_samples = 256;
    WindowKind window_kind = WindowKind::hann;
    int sample_rate_hz = 0;
};

inline void validate(const StftParams& p) {
    if (p.window_len <= 0 || p.hop_samples <= 0)
        throw InvalidInput("stft: window and hop must be positive");
    if (p.hop_samples > p.window_len) throw InvalidInput("stft: hop must not exceed window length");
}

// Periodic Hann, the usual analysis-window convention.
inline std::vector<double> make_window(WindowKind kind, int len) {
    std::vector<double> w(static_cast<std::size_t>(len), 1.0);
    if (kind == WindowKind::hann) {
        for (int n = 0; n < len; ++n)
            w[n] = 0.5 - 0.5 * std::cos(2.0 * 3.141592653589793238462643383279502884 * n / len);
    }
    return w;
}

// Raw (unnormalized) DFT magnitudes of the first window_len/2 + 1 bins, one
// row per frame. Frames start at multiples of hop; the last partial window
// is dropped.
inline Spectrogram compute_stft_magnitude(const Waveform& w, const StftParams& p) {
    validate(p);
    const int n = p.window_len;
    if (static_cast<int>(w.samples.size()) < n)
        throw InvalidInput("stft: input shorter than one window");

    const int n_frames = 1 + (static_cast<int>(w.samples.size()) - n) / p.hop_samples;
    const int n_bins = n / 2 + 1;
    const std::vector<double> window = make_window(p.window_kind, n);
    const bool pow2 = (n & (n - 1)) == 0;

    Spectrogram out(n_frames, n_bins, w.sample_rate_hz, p.hop_samples);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
    for (int t = 0; t < n_frames; ++t) {
        const double* x = w.samples.data() + static_cast<std::size_t>(t) * p.hop_samples;
        if (pow2) {
            for (int i = 0; i < n; ++i) buf[i] = x[i] * window[i];
            fft_inplace(buf);
            for (int k = 0; k < n_bins; ++k) out.at(t, k) = std::abs(buf[k]);
        } else {
            for (int k = 0; k < n_bins; ++k) {
                std::complex<double> acc(0.0, 0.0);
                const double step = -2.0 * 3.141592653589793238462643383279502884 * k / n;
                for (int i = 0; i < n; ++i)
                    acc += x[i] * window[i] * std::complex<double>(std::cos(step * i), std::sin(step * i));
                out.at(t, k) = std::abs(acc);
            }
        }
    }
    return out;
}

}  // namespace afp
