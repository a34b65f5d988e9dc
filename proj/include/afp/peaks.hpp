#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/spectrogram.hpp"

namespace afp {

struct Peak {
    int t = 0;
    int f = 0;
    double mag = 0.0;
};

inline bool operator==(const Peak& a, const Peak& b) {
    return a.t == b.t && a.f == b.f && a.mag == b.mag;
}

// Sparse constellation: peak coordinates plus the shape of the spectrogram
// they were extracted from. Kept sorted by (t, f); no duplicate coordinates.
struct PeakSet {
    std::vector<Peak> peaks;
    int frames = 0;
    int bins = 0;

    std::size_t size() const { return peaks.size(); }
};

struct PeakMask {
    int frames = 0;
    int bins = 0;
    std::vector<std::uint8_t> mask;  // frames * bins, row-major

    PeakMask() = default;
    PeakMask(int t, int f) : frames(t), bins(f), mask(static_cast<std::size_t>(t) * f, 0) {}

    std::uint8_t at(int t, int f) const { return mask[static_cast<std::size_t>(t) * bins + f]; }
    void set(int t, int f, std::uint8_t v) { mask[static_cast<std::size_t>(t) * bins + f] = v; }
};

struct PeakPickingParams {
    int tau = 3;                     // time half-window, frames
    int rho = 3;                     // frequency half-window, bins
    double silence_threshold = 0.0;  // peaks must be strictly above this
};

struct StageParams {
    int salience_time = 31;    // local-mean window, frames
    int salience_freq = 13;    // local-mean window, bins
    double octave_c = 1.0;     // keep cells >= mean + c*stddev; -inf keeps all
    int density_cap = 3;       // max peaks per (time slab x octave band) cell
    int time_slab_frames = 86; // ~1 s at 5512 Hz / hop 64
};

inline void validate(const PeakPickingParams& p) {
    if (p.tau < 1 || p.rho < 1) throw InvalidInput("peaks: tau and rho must be >= 1");
    if (p.silence_threshold < 0.0) throw InvalidInput("peaks: silence threshold must be >= 0");
}

inline void validate(const StageParams& p) {
    if (p.salience_time < 1 || p.salience_freq < 1)
        throw InvalidInput("peaks: salience window must be positive");
    if (p.density_cap < 1) throw InvalidInput("peaks: density cap must be >= 1");
    if (p.time_slab_frames < 1) throw InvalidInput("peaks: time slab must be positive");
}

// Stage 1 (salience): subtract the local mean (truncated windows at the
// borders) and clamp at zero. Implemented with a summed-area table.
inline Spectrogram stage1_salience(const Spectrogram& s, const StageParams& p) {
    validate(p);
    if (p.salience_time > s.frames || p.salience_freq > s.bins)
        throw InvalidInput("stage1: salience window larger than spectrogram");

    const int T = s.frames, F = s.bins;
    std::vector<double> integral(static_cast<std::size_t>(T + 1) * (F + 1), 0.0);
    auto I = [&](int t, int f) -> double& {
        return integral[static_cast<std::size_t>(t) * (F + 1) + f];
    };
    for (int t = 1; t <= T; ++t)
        for (int f = 1; f <= F; ++f)
            I(t, f) = s.at(t - 1, f - 1) + I(t - 1, f) + I(t, f - 1) - I(t - 1, f - 1);

    const int ht = p.salience_time / 2, hf = p.salience_freq / 2;
    Spectrogram out(T, F, s.sample_rate_hz, s.hop_samples);
    out.source_id = s.source_id;
    for (int t = 0; t < T; ++t) {
        const int t0 = std::max(0, t - ht), t1 = std::min(T - 1, t + ht);
        for (int f = 0; f < F; ++f) {
            const int f0 = std::max(0, f - hf), f1 = std::min(F - 1, f + hf);
            const double sum = I(t1 + 1, f1 + 1) - I(t0, f1 + 1) - I(t1 + 1, f0) + I(t0, f0);
            const double mean = sum / (static_cast<double>(t1 - t0 + 1) * (f1 - f0 + 1));
            out.at(t, f) = std::max(0.0, s.at(t, f) - mean);
        }
    }
    return out;
}

// Stage 2 (octave energy): within each octave band (bins_per_octave
// consecutive bins, last band possibly partial) and each time slab, keep only
// cells at least mean + c*stddev of that cell's population, zero the rest.
// A non-finite negative c disables the threshold.
inline Spectrogram stage2_octave_energy(const Spectrogram& s, const StageParams& p,
                                        int bins_per_octave) {
    validate(p);
    if (bins_per_octave < 1) throw InvalidInput("stage2: bins_per_octave must be >= 1");
    if (s.bins < bins_per_octave)
        throw InvalidInput("stage2: fewer frequency bins than one octave band");

    Spectrogram out(s.frames, s.bins, s.sample_rate_hz, s.hop_samples);
    out.source_id = s.source_id;
    if (std::isinf(p.octave_c) && p.octave_c < 0) {
        out.values = s.values;
        return out;
    }

    for (int t0 = 0; t0 < s.frames; t0 += p.time_slab_frames) {
        const int t1 = std::min(s.frames, t0 + p.time_slab_frames);
        for (int f0 = 0; f0 < s.bins; f0 += bins_per_octave) {
            const int f1 = std::min(s.bins, f0 + bins_per_octave);
            double sum = 0.0, sum2 = 0.0;
            const double count = static_cast<double>(t1 - t0) * (f1 - f0);
            for (int t = t0; t < t1; ++t)
                for (int f = f0; f < f1; ++f) {
                    const double v = s.at(t, f);
                    sum += v;
                    sum2 += v * v;
                }
            const double mean = sum / count;
            const double var = std::max(0.0, sum2 / count - mean * mean);
            const double threshold = mean + p.octave_c * std::sqrt(var);
            for (int t = t0; t < t1; ++t)
                for (int f = f0; f < f1; ++f)
                    out.at(t, f) = (s.at(t, f) >= threshold) ? s.at(t, f) : 0.0;
        }
    }
    return out;
}

// Stage 3 (peak extraction): (t0, f0) is a peak iff its magnitude is >= every
// cell of its (2*tau+1) x (2*rho+1) neighborhood (truncated at the borders),
// strictly above the silence threshold, and no equal-valued cell of that
// neighborhood precedes it lexicographically (tie-break so flat plateaus do
// not turn into all-peaks).
inline PeakSet stage3_extract_peaks(const Spectrogram& s, const PeakPickingParams& p) {
    validate(p);
    if (s.frames < 2 * p.tau + 1 || s.bins < 2 * p.rho + 1)
        throw InvalidInput("stage3: spectrogram smaller than one neighborhood");

    PeakSet out;
    out.frames = s.frames;
    out.bins = s.bins;
    for (int t = 0; t < s.frames; ++t) {
        const int t0 = std::max(0, t - p.tau), t1 = std::min(s.frames - 1, t + p.tau);
        for (int f = 0; f < s.bins; ++f) {
            const double v = s.at(t, f);
            if (!(v > p.silence_threshold)) continue;
            const int f0 = std::max(0, f - p.rho), f1 = std::min(s.bins - 1, f + p.rho);
            bool is_peak = true;
            for (int tt = t0; tt <= t1 && is_peak; ++tt)
                for (int ff = f0; ff <= f1; ++ff) {
                    const double u = s.at(tt, ff);
                    if (u > v || (u == v && (tt < t || (tt == t && ff < f)))) {
                        is_peak = false;
                        break;
                    }
                }
            if (is_peak) out.peaks.push_back({t, f, v});
        }
    }
    return out;
}

// Stage 4 (density filter): per (time slab x octave band) cell keep the
// density_cap strongest peaks; equal magnitudes resolved toward the
// lexicographically smaller coordinate.
inline PeakSet stage4_filter_peaks(const PeakSet& ps, const StageParams& p, int bins_per_octave) {
    validate(p);
    if (bins_per_octave < 1) throw InvalidInput("stage4: bins_per_octave must be >= 1");

    std::map<std::pair<int, int>, std::vector<Peak>> cells;
    for (const Peak& pk : ps.peaks)
        cells[{pk.t / p.time_slab_frames, pk.f / bins_per_octave}].push_back(pk);

    PeakSet out;
    out.frames = ps.frames;
    out.bins = ps.bins;
    for (auto& [cell, peaks] : cells) {
        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
            if (a.mag != b.mag) return a.mag > b.mag;
            return std::pair(a.t, a.f) < std::pair(b.t, b.f);
        });
        const std::size_t keep = std::min<std::size_t>(peaks.size(), static_cast<std::size_t>(p.density_cap));
        out.peaks.insert(out.peaks.end(), peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    std::sort(out.peaks.begin(), out.peaks.end(), [](const Peak& a, const Peak& b) {
        return std::pair(a.t, a.f) < std::pair(b.t, b.f);
    });
    return out;
}

inline PeakMask mask_from_peaks(const PeakSet& ps) {
    PeakMask m(ps.frames, ps.bins);
    for (const Peak& p : ps.peaks) m.set(p.t, p.f, 1);
    return m;
}

// Peaks-with-magnitude as a spectrogram (everything else zero). Used both to
// serialize masks through the SPG1 container and as the stage-3 feature for
// spectrogram-valued distances.
inline Spectrogram magnitude_map(const PeakSet& ps, double sample_rate_hz = 0.0, int hop = 0) {
    Spectrogram s(ps.frames, ps.bins, sample_rate_hz, hop);
    for (const Peak& p : ps.peaks) s.at(p.t, p.f) = p.mag;
    return s;
}

inline Spectrogram mask_to_spectrogram(const PeakMask& m) {
    Spectrogram s(m.frames, m.bins);
    for (std::size_t i = 0; i < m.mask.size(); ++i) s.values[i] = m.mask[i] ? 1.0 : 0.0;
    return s;
}

inline PeakMask mask_from_spectrogram(const Spectrogram& s) {
    PeakMask m(s.frames, s.bins);
    for (std::size_t i = 0; i < s.values.size(); ++i) m.mask[i] = s.values[i] > 0.0 ? 1 : 0;
    return m;
}

// --- full pipeline -----------------------------------------------------------

struct PipelineConfig {
    StageParams stage;
    PeakPickingParams picking;
    int bins_per_octave = 24;
    // silence threshold for stage 3: picking.silence_threshold if > 0,
    // otherwise silence_rel * max(stage-2 output)
    double silence_rel = 1e-6;
};

struct PipelineOutputs {
    Spectrogram stage1;
    Spectrogram stage2;
    PeakSet stage3;
    PeakSet final;
};

inline PipelineOutputs run_pipeline(const Spectrogram& s, const PipelineConfig& cfg) {
    PipelineOutputs out;
    out.stage1 = stage1_salience(s, cfg.stage);
    out.stage2 = stage2_octave_energy(out.stage1, cfg.stage, cfg.bins_per_octave);
    PeakPickingParams picking = cfg.picking;
    if (!(picking.silence_threshold > 0.0))
        picking.silence_threshold = cfg.silence_rel * out.stage2.max_value();
    out.stage3 = stage3_extract_peaks(out.stage2, picking);
    out.final = stage4_filter_peaks(out.stage3, cfg.stage, cfg.bins_per_octave);
    return out;
}

// --- CSV interchange ----------------------------------------------------------

inline void write_peaks_csv(const std::string& path, const PeakSet& ps) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("peaks: cannot write " + path);
    out << "t,f,mag\n";
    char line[96];
    for (const Peak& p : ps.peaks) {
        std::snprintf(line, sizeof(line), "%d,%d,%.9g\n", p.t, p.f, p.mag);
        out << line;
    }
}

inline PeakSet read_peaks_csv(const std::string& path, int frames, int bins) {
    std::ifstream in(path);
    if (!in) throw FormatError("peaks: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,f,mag", 0) != 0)
        throw FormatError("peaks: bad header in " + path);
    PeakSet ps;
    ps.frames = frames;
    ps.bins = bins;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Peak p;
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &p.t, &p.f, &p.mag) != 3)
            throw FormatError("peaks: bad row in " + path);
        ps.peaks.push_back(p);
    }
    return ps;
}

}  // namespace afp
