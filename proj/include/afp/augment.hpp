#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/fft.hpp"
#include "afp/rng.hpp"
#include "afp/waveform.hpp"

namespace afp {

// --- elementary transforms ----------------------------------------------------

// Full linear convolution with a room (or speaker) impulse response,
// truncated to the input length and peak-normalized back to the input peak
// so reverberation does not double as a loudness change.
inline Waveform convolve_ir(const Waveform& x, const Waveform& h) {
    if (x.sample_rate_hz != h.sample_rate_hz)
        throw InvalidInput("convolve_ir: sample rate mismatch");
    if (h.samples.empty()) throw InvalidInput("convolve_ir: empty impulse response");
    std::vector<double> full = fft_convolve(x.samples, h.samples);
    full.resize(x.samples.size());
    Waveform out{std::move(full), x.sample_rate_hz};
    const double in_peak = peak_abs(x);
    const double out_peak = peak_abs(out);
    if (in_peak > 0.0 && out_peak > 0.0) {
        const double s = in_peak / out_peak;
        for (double& v : out.samples) v *= s;
    }
    return out;
}

// Mixes noise into the signal at an exact signal-to-noise ratio:
// y = x + g*n with 10*log10(rms(x)^2 / rms(g*n)^2) == snr_db. The noise is
// cropped at a random offset when longer than the signal.
inline Waveform add_noise_at_snr(const Waveform& x, const Waveform& n, double snr_db, Rng& rng) {
    if (!std::isfinite(snr_db)) throw InvalidInput("add_noise_at_snr: non-finite target");
    if (n.samples.size() < x.samples.size())
        throw InvalidInput("add_noise_at_snr: noise shorter than signal");
    const double x_rms = rms(x);
    if (x_rms <= 0.0) throw InvalidInput("add_noise_at_snr: silent signal, SNR undefined");

    const std::size_t slack = n.samples.size() - x.samples.size();
    const std::size_t offset = slack > 0 ? static_cast<std::size_t>(rng.below(slack + 1)) : 0;
    double n_energy = 0.0;
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        const double v = n.samples[offset + i];
        n_energy += v * v;
    }
    const double n_rms = std::sqrt(n_energy / static_cast<double>(x.samples.size()));
    if (n_rms <= 0.0) throw InvalidInput("add_noise_at_snr: silent noise crop");

    const double gain = x_rms / (n_rms * std::pow(10.0, snr_db / 20.0));
    Waveform out = x;
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        out.samples[i] += gain * n.samples[offset + i];
    return out;
}

// Gain in dB followed by a hard clip to [-1, 1].
inline Waveform apply_gain(const Waveform& x, double gain_db) {
    if (!std::isfinite(gain_db)) throw InvalidInput("apply_gain: non-finite gain");
    const double g = std::pow(10.0, gain_db / 20.0);
    Waveform out = x;
    for (double& v : out.samples) v = std::clamp(v * g, -1.0, 1.0);
    return out;
}

// Zeroes exactly floor(fraction * len) distinct samples, chosen uniformly
// (Floyd's sampling, so the draw count is fixed by the fraction alone).
inline Waveform sample_dropout(const Waveform& x, double fraction, Rng& rng) {
    if (fraction < 0.0 || fraction > 1.0) throw InvalidInput("sample_dropout: fraction out of range");
    const std::size_t n = x.samples.size();
    const std::size_t k = static_cast<std::size_t>(fraction * static_cast<double>(n));
    Waveform out = x;
    if (k == 0) return out;
    std::set<std::size_t> chosen;
    for (std::size_t j = n - k; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    for (std::size_t i : chosen) out.samples[i] = 0.0;
    return out;
}

enum class FilterKind { lowpass, highpass };

// Single-pole filter from the bilinear transform with frequency prewarping,
// so the -3 dB point lands on the cutoff. Coefficients, with
// K = tan(pi * fc / fs):
//   lowpass   b0 = b1 = K/(K+1),  a1 = (K-1)/(K+1)
//   highpass  b0 = 1/(K+1), b1 = -b0, same a1
inline Waveform first_order_filter(const Waveform& x, FilterKind kind, double cutoff_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < x.sample_rate_hz / 2.0))
        throw RangeError("first_order_filter: cutoff must be in (0, Nyquist)");
    const double k = std::tan(3.141592653589793238462643383279502884 * cutoff_hz / x.sample_rate_hz);
    const double a1 = (k - 1.0) / (k + 1.0);
    double b0, b1;
    if (kind == FilterKind::lowpass) {
        b0 = k / (k + 1.0);
        b1 = b0;
    } else {
        b0 = 1.0 / (k + 1.0);
        b1 = -b0;
    }
    Waveform out = x;
    double x1 = 0.0, y1 = 0.0;
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        const double y = b0 * x.samples[i] + b1 * x1 - a1 * y1;
        x1 = x.samples[i];
        y1 = y;
        out.samples[i] = y;
    }
    return out;
}

// --- pipeline specification -----------------------------------------------------

enum class TransformKind {
    speaker_filter,    // first-order highpass, cutoff drawn from [lo, hi] Hz
    ir_convolve,       // impulse response drawn from the IR corpus
    background_noise,  // additive noise at an SNR drawn from [lo, hi] dB
    gain,              // gain drawn from [lo, hi] dB, then clipped
    sample_dropout,    // zeroed fraction drawn from [lo, hi]
    device_lowpass,    // first-order lowpass, cutoff from [lo, hi] Hz
    device_highpass,   // first-order highpass, cutoff from [lo, hi] Hz
};

inline const char* to_string(TransformKind k) {
    switch (k) {
        case TransformKind::speaker_filter: return "speaker_filter";
        case TransformKind::ir_convolve: return "ir_convolve";
        case TransformKind::background_noise: return "background_noise";
        case TransformKind::gain: return "gain";
        case TransformKind::sample_dropout: return "sample_dropout";
        case TransformKind::device_lowpass: return "device_lowpass";
        case TransformKind::device_highpass: return "device_highpass";
    }
    return "?";
}

struct TransformSpec {
    TransformKind kind = TransformKind::background_noise;
    double probability = 1.0;
    double lo = 0.0;  // meaning depends on kind, see TransformKind
    double hi = 0.0;
};

struct AudioCorpus {
    std::string name;
    std::vector<Waveform> items;
};

// Ordered list of probabilistic transforms plus the corpora and master seed.
// The physical order speaker -> room -> background noise -> device chain is an
// invariant of the spec, not a choice left to callers.
struct AugmentationSpec {
    std::string name;
    std::vector<TransformSpec> transforms;
    std::uint64_t seed = 0;
    std::shared_ptr<const AudioCorpus> noise_corpus;
    std::shared_ptr<const AudioCorpus> ir_corpus;
};

namespace detail {

inline int transform_rank(TransformKind k) {
    switch (k) {
        case TransformKind::speaker_filter: return 0;
        case TransformKind::ir_convolve: return 1;
        case TransformKind::background_noise: return 2;
        case TransformKind::gain: return 3;
        case TransformKind::sample_dropout: return 4;
        case TransformKind::device_lowpass: return 5;
        case TransformKind::device_highpass: return 5;
    }
    return 99;
}

}  // namespace detail

inline void validate(const AugmentationSpec& spec) {
    int prev_rank = -1;
    for (const TransformSpec& t : spec.transforms) {
        if (t.probability < 0.0 || t.probability > 1.0)
            throw ConfigError("augment: probability out of [0, 1] in " + spec.name);
        if (!std::isfinite(t.lo) || !std::isfinite(t.hi) || t.lo > t.hi)
            throw ConfigError("augment: bad parameter range in " + spec.name);
        const int rank = detail::transform_rank(t.kind);
        if (rank < prev_rank)
            throw ConfigError("augment: transforms out of physical order in " + spec.name);
        prev_rank = rank;
        if (t.probability > 0.0) {
            if (t.kind == TransformKind::ir_convolve && (!spec.ir_corpus || spec.ir_corpus->items.empty()))
                throw ConfigError("augment: IR corpus missing for " + spec.name);
            if (t.kind == TransformKind::background_noise &&
                (!spec.noise_corpus || spec.noise_corpus->items.empty()))
                throw ConfigError("augment: noise corpus missing for " + spec.name);
        }
    }
}

struct AppliedTransform {
    TransformKind kind;
    double value = 0.0;    // sampled cutoff / SNR / gain / fraction
    int corpus_item = -1;  // index into the corpus for IR / noise draws
};

struct AugmentResult {
    Waveform audio;
    std::vector<AppliedTransform> log;
};

namespace detail {

// Tiles a corpus item up to at least want samples so random cropping applies.
inline Waveform tile_to(const Waveform& n, std::size_t want) {
    if (n.samples.size() >= want) return n;
    Waveform out;
    out.sample_rate_hz = n.sample_rate_hz;
    out.samples.reserve(want);
    while (out.samples.size() < want)
        out.samples.insert(out.samples.end(), n.samples.begin(), n.samples.end());
    return out;
}

}  // namespace detail

// Applies the spec in order; each transform fires with its probability using
// the stream derived from (spec.seed, item_seed). Identical (spec, item_seed)
// pairs give bit-identical audio and logs.
inline AugmentResult augment(const Waveform& x, const AugmentationSpec& spec,
                             std::uint64_t item_seed) {
    validate(spec);
    Rng rng = Rng::for_item(spec.seed, item_seed);
    AugmentResult res{x, {}};
    for (const TransformSpec& t : spec.transforms) {
        if (rng.uniform() >= t.probability) continue;
        AppliedTransform entry{t.kind, 0.0, -1};
        switch (t.kind) {
            case TransformKind::speaker_filter: {
                entry.value = rng.uniform(t.lo, t.hi);
                res.audio = first_order_filter(res.audio, FilterKind::highpass, entry.value);
                break;
            }
            case TransformKind::ir_convolve: {
                entry.corpus_item = static_cast<int>(rng.below(spec.ir_corpus->items.size()));
                const Waveform& ir = spec.ir_corpus->items[static_cast<std::size_t>(entry.corpus_item)];
                if (ir.sample_rate_hz != res.audio.sample_rate_hz)
                    throw ConfigError("augment: IR corpus sample rate mismatch");
                res.audio = convolve_ir(res.audio, ir);
                break;
            }
            case TransformKind::background_noise: {
                entry.value = rng.uniform(t.lo, t.hi);
                entry.corpus_item = static_cast<int>(rng.below(spec.noise_corpus->items.size()));
                const Waveform& noise =
                    spec.noise_corpus->items[static_cast<std::size_t>(entry.corpus_item)];
                if (noise.sample_rate_hz != res.audio.sample_rate_hz)
                    throw ConfigError("augment: noise corpus sample rate mismatch");
                res.audio = add_noise_at_snr(res.audio, detail::tile_to(noise, res.audio.samples.size()),
                                             entry.value, rng);
                break;
            }
            case TransformKind::gain: {
                entry.value = rng.uniform(t.lo, t.hi);
                res.audio = apply_gain(res.audio, entry.value);
                break;
            }
            case TransformKind::sample_dropout: {
                entry.value = rng.uniform(t.lo, t.hi);
                res.audio = sample_dropout(res.audio, entry.value, rng);
                break;
            }
            case TransformKind::device_lowpass: {
                entry.value = rng.uniform(t.lo, t.hi);
                res.audio = first_order_filter(res.audio, FilterKind::lowpass, entry.value);
                break;
            }
            case TransformKind::device_highpass: {
                entry.value = rng.uniform(t.lo, t.hi);
                res.audio = first_order_filter(res.audio, FilterKind::highpass, entry.value);
                break;
            }
        }
        res.log.push_back(entry);
    }
    return res;
}

// --- built-in pipelines ----------------------------------------------------------
// Background-noise SNR tiers: hard uses the training range [-10, -5] dB;
// the light [5, 10] and medium [0, 5] tiers are defaults chosen so the three
// conditions degrade monotonically.

inline AugmentationSpec make_pipeline(const std::string& name,
                                      std::shared_ptr<const AudioCorpus> noise,
                                      std::shared_ptr<const AudioCorpus> ir) {
    using TK = TransformKind;
    AugmentationSpec s;
    s.name = name;
    s.noise_corpus = std::move(noise);
    s.ir_corpus = std::move(ir);

    const TransformSpec speaker{TK::speaker_filter, 1.0, 20.0, 150.0};
    const TransformSpec reverb{TK::ir_convolve, 1.0, 0.0, 0.0};
    const TransformSpec bn_light{TK::background_noise, 1.0, 5.0, 10.0};
    const TransformSpec bn_medium{TK::background_noise, 1.0, 0.0, 5.0};
    const TransformSpec bn_hard{TK::background_noise, 1.0, -10.0, -5.0};

    if (name == "none") {
        // empty transform list: noisy output == clean input
    } else if (name == "bn_light") {
        s.transforms = {bn_light};
    } else if (name == "bn_medium") {
        s.transforms = {bn_medium};
    } else if (name == "bn_hard") {
        s.transforms = {bn_hard};
    } else if (name == "reverb_only") {
        s.transforms = {reverb};
    } else if (name == "reverb_bn") {
        s.transforms = {reverb, bn_hard};
    } else if (name == "complete_light") {
        s.transforms = {speaker, reverb, bn_light,
                        {TK::gain, 1.0, -2.0, 2.0},
                        {TK::sample_dropout, 1.0, 0.0, 0.002},
                        {TK::device_lowpass, 1.0, 8000.0, 16000.0},
                        {TK::device_highpass, 1.0, 20.0, 100.0}};
    } else if (name == "complete_hard" || name == "train_hard") {
        s.transforms = {speaker, reverb, bn_hard,
                        {TK::gain, 1.0, -5.0, 5.0},
                        {TK::sample_dropout, 1.0, 0.0, 0.01},
                        {TK::device_lowpass, 1.0, 4000.0, 16000.0},
                        {TK::device_highpass, 1.0, 50.0, 300.0}};
    } else {
        throw ConfigError("augment: unknown pipeline " + name);
    }
    return s;
}

inline std::vector<std::string> builtin_pipeline_names() {
    return {"bn_light", "bn_medium", "bn_hard",      "reverb_only",
            "reverb_bn", "complete_light", "complete_hard", "train_hard"};
}

inline std::vector<AugmentationSpec> builtin_pipelines(std::shared_ptr<const AudioCorpus> noise,
                                                       std::shared_ptr<const AudioCorpus> ir) {
    std::vector<AugmentationSpec> out;
    for (const std::string& name : builtin_pipeline_names())
        out.push_back(make_pipeline(name, noise, ir));
    return out;
}

}  // namespace afp
