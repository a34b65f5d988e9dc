#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "afp/errors.hpp"

namespace afp {

// A mono waveform. Samples are nominally in [-1, 1]; intermediate
// processing may exceed that range, hard limits are applied only where
// documented (gain clipping, PCM export).
struct Waveform {
    std::vector<double> samples;
    int sample_rate_hz = 0;

    Waveform() = default;
    Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate_hz(rate) {}

    std::size_t size() const { return samples.size(); }
    double duration_seconds() const {
        return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

inline void validate(const Waveform& w) {
    if (w.sample_rate_hz <= 0) throw InvalidInput("waveform: sample rate must be positive");
    for (double s : w.samples)
        if (!std::isfinite(s)) throw InvalidInput("waveform: non-finite sample");
}

inline double rms(const Waveform& w) {
    if (w.samples.empty()) return 0.0;
    double acc = 0.0;
    for (double s : w.samples) acc += s * s;
    return std::sqrt(acc / static_cast<double>(w.samples.size()));
}

inline double peak_abs(const Waveform& w) {
    double p = 0.0;
    for (double s : w.samples) p = std::max(p, std::abs(s));
    return p;
}

// Measured signal-to-noise ratio in dB between a signal and the noise that
// was added to it: 10·log10(rms(x)² / rms(y - x)²).
inline double measured_snr_db(const Waveform& clean, const Waveform& noisy) {
    if (clean.size() != noisy.size()) throw InvalidInput("measured_snr_db: length mismatch");
    double ps = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double n = noisy.samples[i] - clean.samples[i];
        ps += clean.samples[i] * clean.samples[i];
        pn += n * n;
    }
    if (ps <= 0.0) throw InvalidInput("measured_snr_db: silent signal");
    if (pn <= 0.0) throw InvalidInput("measured_snr_db: zero noise");
    return 10.0 * std::log10(ps / pn);
}

}  // namespace afp
