#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "afp/augment.hpp"
#include "afp/rng.hpp"
#include "afp/waveform.hpp"

namespace afp {

// Deterministic synthetic audio: stand-in tracks, colored noise and
// exponential-decay impulse responses for tests and desk-scale benchmarks
// where no real corpora are configured.

// A pseudo-musical track: a random walk over a pentatonic scale, each note a
// harmonic stack with a percussive envelope, plus a soft noise floor so the
// signal is never exactly silent.
inline Waveform synth_track(std::uint64_t seed, double duration_s, int rate) {
    Rng rng(derive_stream(0x7261636bULL /* "rack" */, seed));
    const std::size_t n = static_cast<std::size_t>(duration_s * rate);
    Waveform w;
    w.sample_rate_hz = rate;
    w.samples.assign(n, 0.0);

    // pentatonic degrees over a random root in ~[82, 220] Hz
    const double root = 82.0 * std::pow(2.0, rng.uniform(0.0, 1.4));
    const int degrees[5] = {0, 2, 4, 7, 9};
    int degree = static_cast<int>(rng.below(5));
    int octave = static_cast<int>(rng.below(3));

    std::size_t pos = 0;
    while (pos < n) {
        const std::size_t note_len =
            static_cast<std::size_t>(rng.uniform(0.18, 0.45) * rate);
        // random walk keeps consecutive notes related but tracks distinct
        degree = (degree + static_cast<int>(rng.below(5)) - 2 + 10) % 5;
        if (rng.uniform() < 0.2) octave = static_cast<int>(rng.below(3));
        const double f0 = root * std::pow(2.0, octave + degrees[degree] / 12.0);
        const double amp = rng.uniform(0.25, 0.5);
        const int n_harm = 2 + static_cast<int>(rng.below(3));
        const double phase0 = rng.uniform(0.0, 6.283185307179586);

        const std::size_t end = std::min(n, pos + note_len);
        for (std::size_t i = pos; i < end; ++i) {
            const double t = static_cast<double>(i - pos) / rate;
            const double env = std::exp(-4.0 * t) * std::min(1.0, t * 200.0);
            double s = 0.0;
            for (int h = 1; h <= n_harm; ++h)
                s += std::sin(6.283185307179586 * f0 * h * t + phase0 * h) / h;
            w.samples[i] += amp * env * s / 1.8;
        }
        pos = end;
    }
    for (std::size_t i = 0; i < n; ++i) w.samples[i] += 0.002 * rng.normal();
    for (double& s : w.samples) s = std::clamp(s, -1.0, 1.0);
    return w;
}

enum class NoiseColor { white, pink, brown };

inline Waveform synth_noise(std::uint64_t seed, NoiseColor color, double duration_s, int rate,
                            double target_rms = 0.1) {
    Rng rng(derive_stream(0x6e6f697aULL /* "noiz" */, seed));
    const std::size_t n = static_cast<std::size_t>(duration_s * rate);
    Waveform w;
    w.sample_rate_hz = rate;
    w.samples.resize(n);

    if (color == NoiseColor::white) {
        for (double& s : w.samples) s = rng.normal();
    } else if (color == NoiseColor::pink) {
        // Paul Kellet's three-pole economy approximation
        double b0 = 0.0, b1 = 0.0, b2 = 0.0;
        for (double& s : w.samples) {
            const double white = rng.normal();
            b0 = 0.99765 * b0 + white * 0.0990460;
            b1 = 0.96300 * b1 + white * 0.2965164;
            b2 = 0.57000 * b2 + white * 1.0526913;
            s = b0 + b1 + b2 + white * 0.1848;
        }
    } else {
        double acc = 0.0;
        for (double& s : w.samples) {
            acc = 0.995 * acc + rng.normal();
            s = acc;
        }
    }
    const double r = rms(w);
    if (r > 0.0)
        for (double& s : w.samples) s *= target_rms / r;
    return w;
}

// Impulse response with a unit direct path, a few discrete early reflections
// and an exponentially decaying noise tail.
inline Waveform synth_ir(std::uint64_t seed, int rate) {
    Rng rng(derive_stream(0x69725f73ULL /* "ir_s" */, seed));
    const double tail_s = rng.uniform(0.08, 0.4);
    const std::size_t n = static_cast<std::size_t>((tail_s + 0.05) * rate);
    Waveform h;
    h.sample_rate_hz = rate;
    h.samples.assign(n, 0.0);
    h.samples[0] = 1.0;
    const int n_refl = 2 + static_cast<int>(rng.below(4));
    for (int i = 0; i < n_refl; ++i) {
        const std::size_t d = 1 + static_cast<std::size_t>(rng.below(n / 4));
        h.samples[d] += rng.uniform(0.1, 0.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    const double tau = tail_s * rate / 3.0;
    for (std::size_t i = 1; i < n; ++i)
        h.samples[i] += 0.15 * rng.normal() * std::exp(-static_cast<double>(i) / tau);
    return h;
}

inline std::shared_ptr<AudioCorpus> make_synth_noise_corpus(std::uint64_t seed, int n_items,
                                                            double duration_s, int rate) {
    auto corpus = std::make_shared<AudioCorpus>();
    corpus->name = "synth-noise";
    for (int i = 0; i < n_items; ++i) {
        const auto color = static_cast<NoiseColor>(i % 3);
        corpus->items.push_back(synth_noise(derive_stream(seed, static_cast<std::uint64_t>(i)),
                                            color, duration_s, rate));
    }
    return corpus;
}

inline std::shared_ptr<AudioCorpus> make_synth_ir_corpus(std::uint64_t seed, int n_items, int rate) {
    auto corpus = std::make_shared<AudioCorpus>();
    corpus->name = "synth-ir";
    for (int i = 0; i < n_items; ++i)
        corpus->items.push_back(synth_ir(derive_stream(seed, static_cast<std::uint64_t>(i)), rate));
    return corpus;
}

}  // namespace afp
