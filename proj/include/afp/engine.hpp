#pragma once

#include <memory>
#include <string>
#include <vector>

#include "afp/cqt.hpp"
#include "afp/denoise.hpp"
#include "afp/errors.hpp"
#include "afp/index.hpp"
#include "afp/landmarks.hpp"
#include "afp/peaks.hpp"
#include "afp/resample.hpp"
#include "afp/waveform.hpp"

namespace afp {

struct FingerprintConfig {
    CqtParams cqt;
    PipelineConfig pipeline;
    LandmarkParams landmarks;
    PackSpec pack;
    LandmarkKind landmark_kind = LandmarkKind::quad;
    MatchParams match;
    double min_query_seconds = 3.0;
};

// Aligns the derived knobs (octave bands, coarse quantizer, slab width) with
// the CQT geometry.
inline FingerprintConfig make_default_config(CqtParams cqt = {}) {
    FingerprintConfig cfg;
    cfg.cqt = cqt;
    cfg.pipeline.bins_per_octave = cqt.bins_per_octave;
    cfg.landmarks.coarse_factor = std::max(1, cqt.bins_per_octave / 3);
    cfg.pipeline.stage.time_slab_frames =
        std::max(1, cqt.sample_rate_hz / std::max(1, cqt.hop_samples));
    return cfg;
}

// One fingerprinting chain: resample -> CQT -> peak pipeline -> landmarks ->
// offset voting. Immutable after construction; the same code path serves
// indexing, identification and the benchmark.
class FingerprintEngine {
public:
    explicit FingerprintEngine(FingerprintConfig cfg) : cfg_(cfg), kernel_(cfg.cqt) {}

    const FingerprintConfig& config() const { return cfg_; }

    Spectrogram cqt(const Waveform& w) const {
        const Waveform* in = &w;
        Waveform resampled;
        if (w.sample_rate_hz != cfg_.cqt.sample_rate_hz) {
            resampled = resample(w, cfg_.cqt.sample_rate_hz);
            in = &resampled;
        }
        return kernel_.apply(*in);
    }

    PeakSet final_peaks(const Spectrogram& cqt_mag) const {
        return run_pipeline(cqt_mag, cfg_.pipeline).final;
    }

    std::vector<Landmark> landmarks_for(const Spectrogram& cqt_mag) const {
        const PeakSet peaks = final_peaks(cqt_mag);
        if (cfg_.landmark_kind == LandmarkKind::triplet)
            return to_landmarks(build_triplets(peaks, cfg_.landmarks), cfg_.pack);
        return to_landmarks(build_quads(peaks, cfg_.landmarks), cfg_.pack);
    }

    std::vector<Landmark> landmarks_for(const Waveform& w) const { return landmarks_for(cqt(w)); }

    void add_track(FingerprintIndex& idx, std::uint32_t track_id, const std::string& title,
                   const Waveform& w) const {
        const Spectrogram s = cqt(w);
        TrackInfo info{title, static_cast<std::uint32_t>(s.frames)};
        index_track(idx, track_id, info, landmarks_for(s));
    }

    // Full identification chain; a denoiser, when given, rewrites the
    // spectrogram between the transform and the peak pipeline and nothing
    // else.
    MatchResult identify(const FingerprintIndex& idx, const Waveform& w,
                         const Denoiser* denoiser = nullptr) const {
        if (w.duration_seconds() < cfg_.min_query_seconds)
            throw InvalidInput("identify: query shorter than minimum duration");
        Spectrogram s = cqt(w);
        if (denoiser) s = denoiser->denoise(s);
        return best_match(idx, landmarks_for(s), cfg_.match);
    }

private:
    FingerprintConfig cfg_;
    CqtKernel kernel_;
};

}  // namespace afp
