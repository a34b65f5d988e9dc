#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "afp/errors.hpp"
#include "afp/waveform.hpp"

namespace afp {

namespace detail {

inline double bessel_i0(double x) {
    // power series, converges quickly for the arguments used here
    double sum = 1.0, term = 1.0;
    const double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

inline double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = 3.141592653589793238462643383279502884 * x;
    return std::sin(px) / px;
}

}  // namespace detail

// Windowed-sinc resampler: Kaiser window (beta 8), 64 taps at the lower of
// the two rates, cutoff at 0.9x the narrower Nyquist. The impulse response is
// tabulated once per call (64 points per source sample, linear interpolation)
// and each output sample is normalized by its own coefficient sum so DC
// passes through exactly.
inline Waveform resample(const Waveform& w, int target_rate_hz) {
    if (target_rate_hz <= 0) throw InvalidInput("resample: target rate must be positive");
    if (w.sample_rate_hz <= 0) throw InvalidInput("resample: source rate must be positive");
    if (target_rate_hz == w.sample_rate_hz) return w;

    const double ratio = static_cast<double>(w.sample_rate_hz) / target_rate_hz;
    const double cutoff = 0.9 * std::min(1.0, 1.0 / ratio);  // relative to source Nyquist
    const double half_width = 32.0 * std::max(1.0, ratio);   // in source samples
    const double kaiser_beta = 8.0;
    const double i0_beta = detail::bessel_i0(kaiser_beta);

    // h(|u|) sampled on a fine grid over [0, half_width]
    const int steps_per_sample = 64;
    const std::size_t table_len = static_cast<std::size_t>(half_width * steps_per_sample) + 2;
    std::vector<double> table(table_len, 0.0);
    for (std::size_t i = 0; i + 1 < table_len; ++i) {
        const double u = static_cast<double>(i) / steps_per_sample;
        const double frac = u / half_width;
        if (frac > 1.0) break;
        const double win =
            detail::bessel_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) / i0_beta;
        table[i] = cutoff * detail::sinc(cutoff * u) * win;
    }
    auto h_at = [&](double u) {
        const double pos = std::abs(u) * steps_per_sample;
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= table_len) return 0.0;
        const double f = pos - static_cast<double>(i);
        return table[i] * (1.0 - f) + table[i + 1] * f;
    };

    const std::int64_t n_in = static_cast<std::int64_t>(w.samples.size());
    const std::int64_t n_out = static_cast<std::int64_t>(
        std::llround(static_cast<double>(n_in) * target_rate_hz / w.sample_rate_hz));

    Waveform out;
    out.sample_rate_hz = target_rate_hz;
    out.samples.resize(static_cast<std::size_t>(std::max<std::int64_t>(0, n_out)));

    for (std::int64_t n = 0; n < n_out; ++n) {
        const double t = static_cast<double>(n) * ratio;
        const std::int64_t j_lo =
            std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t - half_width)));
        const std::int64_t j_hi =
            std::min<std::int64_t>(n_in - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
        double acc = 0.0, norm = 0.0;
        for (std::int64_t j = j_lo; j <= j_hi; ++j) {
            const double c = h_at(t - static_cast<double>(j));
            acc += c * w.samples[static_cast<std::size_t>(j)];
            norm += c;
        }
        out.samples[static_cast<std::size_t>(n)] = (norm != 0.0) ? acc / norm : 0.0;
    }
    return out;
}

}  // namespace afp
