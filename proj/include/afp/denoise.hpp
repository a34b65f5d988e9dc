#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/spectrogram.hpp"

namespace afp {

// Spectrogram-in, spectrogram-out denoisers. Implementations preserve shape
// and non-negativity; they may be shared across threads after construction.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Spectrogram denoise(const Spectrogram& s) const = 0;
    virtual std::string name() const = 0;
};

class IdentityDenoiser final : public Denoiser {
public:
    Spectrogram denoise(const Spectrogram& s) const override { return s; }
    std::string name() const override { return "none"; }
};

namespace detail {

// Per-frequency-bin percentile over time, with linear interpolation between
// order statistics. The noise-floor estimate for stationary noise without
// assuming a silent lead-in.
inline std::vector<double> column_percentile(const Spectrogram& s, double q) {
    std::vector<double> floor_est(static_cast<std::size_t>(s.bins));
    std::vector<double> col(static_cast<std::size_t>(s.frames));
    for (int f = 0; f < s.bins; ++f) {
        for (int t = 0; t < s.frames; ++t) col[static_cast<std::size_t>(t)] = s.at(t, f);
        std::sort(col.begin(), col.end());
        const double pos = q / 100.0 * static_cast<double>(s.frames - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        floor_est[static_cast<std::size_t>(f)] =
            (i + 1 < col.size()) ? col[i] * (1.0 - frac) + col[i + 1] * frac : col[i];
    }
    return floor_est;
}

}  // namespace detail

// out = max(X - lambda * N, floor * X) with N(k) the per-bin percentile floor.
// Defaults favor peak precision: a median floor with strong over-subtraction
// zeroes noise-dominated cells outright. A non-zero floor fraction keeps a
// scaled copy of the noise alive, and local peak picking is scale invariant,
// so for peak-based consumers floor = 0 is the useful setting.
class SpectralSubtractionDenoiser final : public Denoiser {
public:
    SpectralSubtractionDenoiser(double percentile = 50.0, double over_subtract = 2.5,
                                double floor_fraction = 0.0)
        : percentile_(percentile), over_subtract_(over_subtract), floor_(floor_fraction) {
        if (!(percentile_ > 0.0) || !(percentile_ < 100.0))
            throw InvalidInput("specsub: percentile must be in (0, 100)");
        if (over_subtract_ < 1.0) throw InvalidInput("specsub: over-subtraction must be >= 1");
        if (floor_ < 0.0 || floor_ >= 1.0) throw InvalidInput("specsub: floor must be in [0, 1)");
    }

    Spectrogram denoise(const Spectrogram& s) const override {
        const std::vector<double> noise_floor = detail::column_percentile(s, percentile_);
        Spectrogram out = s;
        for (int t = 0; t < s.frames; ++t)
            for (int f = 0; f < s.bins; ++f) {
                const double x = s.at(t, f);
                out.at(t, f) = std::max(x - over_subtract_ * noise_floor[static_cast<std::size_t>(f)],
                                        floor_ * x);
            }
        return out;
    }

    std::string name() const override { return "specsub"; }

private:
    double percentile_;
    double over_subtract_;
    double floor_;
};

// G = max(1 - N(k)^2 / X^2, min_gain) where X > 0, else 0; out = G * X.
class WienerGainDenoiser final : public Denoiser {
public:
    WienerGainDenoiser(double percentile = 50.0, double min_gain = 0.0)
        : percentile_(percentile), min_gain_(min_gain) {
        if (!(percentile_ > 0.0) || !(percentile_ < 100.0))
            throw InvalidInput("wiener: percentile must be in (0, 100)");
        if (min_gain_ < 0.0 || min_gain_ >= 1.0) throw InvalidInput("wiener: min gain must be in [0, 1)");
    }

    Spectrogram denoise(const Spectrogram& s) const override {
        const std::vector<double> noise_floor = detail::column_percentile(s, percentile_);
        Spectrogram out = s;
        for (int t = 0; t < s.frames; ++t)
            for (int f = 0; f < s.bins; ++f) {
                const double x = s.at(t, f);
                if (x <= 0.0) {
                    out.at(t, f) = 0.0;
                    continue;
                }
                const double nf = noise_floor[static_cast<std::size_t>(f)];
                const double g = std::max(1.0 - (nf * nf) / (x * x), min_gain_);
                out.at(t, f) = g * x;
            }
        return out;
    }

    std::string name() const override { return "wiener"; }

private:
    double percentile_;
    double min_gain_;
};

// Serves externally produced spectrograms (e.g. a DL model's output) from a
// directory of SPG1 files keyed by source id.
class FileBackedDenoiser final : public Denoiser {
public:
    explicit FileBackedDenoiser(std::string directory) : dir_(std::move(directory)) {}

    Spectrogram denoise(const Spectrogram& s) const override {
        if (s.source_id.empty()) throw LookupError("file denoiser: input has no source id");
        const std::string path = dir_ + "/" + s.source_id + ".spg1";
        Spectrogram stored;
        try {
            stored = read_spg1(path);
        } catch (const FormatError& e) {
            if (std::string(e.what()).find("cannot open") != std::string::npos)
                throw LookupError("file denoiser: no spectrogram for id " + s.source_id);
            throw;
        }
        if (!stored.same_shape(s))
            throw FormatError("file denoiser: shape mismatch for id " + s.source_id);
        stored.source_id = s.source_id;
        return stored;
    }

    std::string name() const override { return "file:" + dir_; }

private:
    std::string dir_;
};

struct DenoiserOptions {
    double specsub_percentile = 50.0;
    double specsub_over_subtract = 2.5;
    double specsub_floor = 0.0;
    double wiener_percentile = 50.0;
    double wiener_min_gain = 0.0;
};

// Parses the CLI selector: none | specsub | wiener | file:<dir>.
inline std::unique_ptr<Denoiser> make_denoiser(const std::string& selector,
                                               const DenoiserOptions& opt = {}) {
    if (selector == "none" || selector == "identity") return std::make_unique<IdentityDenoiser>();
    if (selector == "specsub")
        return std::make_unique<SpectralSubtractionDenoiser>(
            opt.specsub_percentile, opt.specsub_over_subtract, opt.specsub_floor);
    if (selector == "wiener")
        return std::make_unique<WienerGainDenoiser>(opt.wiener_percentile, opt.wiener_min_gain);
    if (selector.rfind("file:", 0) == 0)
        return std::make_unique<FileBackedDenoiser>(selector.substr(5));
    throw ConfigError("unknown denoiser: " + selector);
}

}  // namespace afp
