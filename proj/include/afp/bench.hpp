#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "afp/augment.hpp"
#include "afp/denoise.hpp"
#include "afp/engine.hpp"
#include "afp/metrics.hpp"
#include "afp/synth.hpp"
#include "afp/wav.hpp"

namespace afp {

// Desk-scale benchmark orchestration: segmentation, paired clean/noisy
// spectrogram stores, metric reports and the identification benchmark.
// Everything is a pure function of (config, seed); reports are written with
// fixed field order and formatting so identical runs are byte-identical.

struct ExperimentConfig {
    std::string corpus_dir;
    std::string noise_dir;  // empty: synthetic colored-noise corpus
    std::string ir_dir;     // empty: synthetic exponential-decay IRs
    std::string output_dir = "out";
    std::vector<std::string> pipelines = {"bn_light",  "bn_medium",      "bn_hard",
                                          "reverb_only", "reverb_bn",
                                          "complete_light", "complete_hard"};
    std::string denoiser = "none";
    DenoiserOptions denoiser_options;
    double segment_seconds = 10.0;
    double split_train = 0.8, split_val = 0.1, split_test = 0.1;
    std::string split_filter = "all";  // train | val | test | all
    std::uint64_t seed = 42;
    int jobs = 1;
    int augment_rate_hz = 44100;
    int synth_noise_items = 12;
    int synth_ir_items = 8;
    int queries_per_track = 10;
    FingerprintConfig engine = make_default_config();
};

inline void validate(const ExperimentConfig& cfg) {
    const double total = cfg.split_train + cfg.split_val + cfg.split_test;
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("config: split ratios must sum to 1");
    if (cfg.segment_seconds <= 0.0) throw ConfigError("config: segment length must be positive");
    if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

// --- config json -----------------------------------------------------------------

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("corpus_dir", cfg.corpus_dir);
    get("noise_dir", cfg.noise_dir);
    get("ir_dir", cfg.ir_dir);
    get("output_dir", cfg.output_dir);
    get("pipelines", cfg.pipelines);
    get("denoiser", cfg.denoiser);
    get("segment_seconds", cfg.segment_seconds);
    get("seed", cfg.seed);
    get("jobs", cfg.jobs);
    get("augment_rate_hz", cfg.augment_rate_hz);
    get("queries_per_track", cfg.queries_per_track);
    get("split_filter", cfg.split_filter);
    get("synth_noise_items", cfg.synth_noise_items);
    get("synth_ir_items", cfg.synth_ir_items);
    if (j.contains("split")) {
        cfg.split_train = j.at("split").value("train", cfg.split_train);
        cfg.split_val = j.at("split").value("val", cfg.split_val);
        cfg.split_test = j.at("split").value("test", cfg.split_test);
    }
    if (j.contains("engine")) {
        const auto& e = j.at("engine");
        CqtParams cqt;
        if (e.contains("cqt")) {
            const auto& c = e.at("cqt");
            cqt.f_min_hz = c.value("f_min_hz", cqt.f_min_hz);
            cqt.bins_per_octave = c.value("bins_per_octave", cqt.bins_per_octave);
            cqt.n_bins = c.value("n_bins", cqt.n_bins);
            cqt.hop_samples = c.value("hop_samples", cqt.hop_samples);
            cqt.sample_rate_hz = c.value("sample_rate_hz", cqt.sample_rate_hz);
        }
        cfg.engine = make_default_config(cqt);
        if (e.contains("stage")) {
            const auto& s = e.at("stage");
            auto& st = cfg.engine.pipeline.stage;
            st.salience_time = s.value("salience_time", st.salience_time);
            st.salience_freq = s.value("salience_freq", st.salience_freq);
            st.octave_c = s.value("octave_c", st.octave_c);
            st.density_cap = s.value("density_cap", st.density_cap);
            st.time_slab_frames = s.value("time_slab_frames", st.time_slab_frames);
        }
        if (e.contains("picking")) {
            const auto& s = e.at("picking");
            auto& pk = cfg.engine.pipeline.picking;
            pk.tau = s.value("tau", pk.tau);
            pk.rho = s.value("rho", pk.rho);
            pk.silence_threshold = s.value("silence_threshold", pk.silence_threshold);
        }
        if (e.contains("landmarks")) {
            const auto& s = e.at("landmarks");
            auto& lm = cfg.engine.landmarks;
            lm.dt_min = s.value("dt_min", lm.dt_min);
            lm.dt_max = s.value("dt_max", lm.dt_max);
            lm.df_max = s.value("df_max", lm.df_max);
            lm.fanout = s.value("fanout", lm.fanout);
            lm.coarse_factor = s.value("coarse_factor", lm.coarse_factor);
        }
        if (e.contains("landmark_kind"))
            cfg.engine.landmark_kind =
                e.at("landmark_kind").get<std::string>() == "triplet" ? LandmarkKind::triplet
                                                                      : LandmarkKind::quad;
        cfg.engine.match.min_votes = e.value("min_votes", cfg.engine.match.min_votes);
        cfg.engine.min_query_seconds = e.value("min_query_seconds", cfg.engine.min_query_seconds);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// --- manifest ---------------------------------------------------------------------

struct SegmentEntry {
    std::string id;
    int track_id = 0;
    double start_seconds = 0.0;
    std::uint64_t global_index = 0;
};

struct TrackEntry {
    int id = 0;
    std::string path;
    std::string title;
    std::string split;
    double duration_seconds = 0.0;
    std::vector<SegmentEntry> segments;
};

struct Manifest {
    std::uint64_t seed = 0;
    double segment_seconds = 10.0;
    std::vector<TrackEntry> tracks;

    std::vector<const SegmentEntry*> segments_in(const std::string& split_filter) const {
        std::vector<const SegmentEntry*> out;
        for (const TrackEntry& t : tracks) {
            if (split_filter != "all" && t.split != split_filter) continue;
            for (const SegmentEntry& s : t.segments) out.push_back(&s);
        }
        return out;
    }
    const TrackEntry& track(int id) const { return tracks.at(static_cast<std::size_t>(id)); }
};

namespace detail {

inline std::vector<std::string> list_wavs(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("corpus: not a directory: " + dir);
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".wav" || ext == ".WAV") out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(jobs, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(workers));
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                if (failed.load()) return;
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    failed = true;
                    error = e.what();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failed) throw Error("parallel task failed: " + error);
}

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

// Deterministic segmentation with a track-level split: whole tracks land in
// one split, so no segment leaks across.
inline Manifest cmd_segment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto paths = detail::list_wavs(cfg.corpus_dir);
    if (paths.empty()) throw ConfigError("segment: empty corpus " + cfg.corpus_dir);

    Manifest m;
    m.seed = cfg.seed;
    m.segment_seconds = cfg.segment_seconds;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        TrackEntry t;
        t.id = static_cast<int>(i);
        t.path = paths[i];
        t.title = detail::stem_of(paths[i]);
        const Waveform w = read_wav(paths[i]);
        t.duration_seconds =
            static_cast<double>(w.samples.size()) / std::max(1, w.sample_rate_hz);
        m.tracks.push_back(std::move(t));
    }

    // seeded shuffle, then contiguous train/val/test blocks
    std::vector<std::size_t> order(m.tracks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_stream(cfg.seed, detail::fnv1a("split")));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    const auto n = m.tracks.size();
    const auto n_train = static_cast<std::size_t>(cfg.split_train * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(cfg.split_val * static_cast<double>(n));
    for (std::size_t pos = 0; pos < n; ++pos) {
        const char* split = pos < n_train ? "train" : (pos < n_train + n_val ? "val" : "test");
        m.tracks[order[pos]].split = split;
    }

    std::uint64_t global = 0;
    for (TrackEntry& t : m.tracks) {
        const int count = static_cast<int>(t.duration_seconds / cfg.segment_seconds);
        for (int s = 0; s < count; ++s) {
            SegmentEntry seg;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "t%04d_s%03d", t.id, s);
            seg.id = buf;
            seg.track_id = t.id;
            seg.start_seconds = s * cfg.segment_seconds;
            seg.global_index = global++;
            t.segments.push_back(seg);
        }
    }
    return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
    nlohmann::json j;
    j["seed"] = m.seed;
    j["segment_seconds"] = m.segment_seconds;
    j["tracks"] = nlohmann::json::array();
    for (const TrackEntry& t : m.tracks) {
        nlohmann::json jt;
        jt["id"] = t.id;
        jt["path"] = t.path;
        jt["title"] = t.title;
        jt["split"] = t.split;
        jt["duration_seconds"] = t.duration_seconds;
        jt["segments"] = nlohmann::json::array();
        for (const SegmentEntry& s : t.segments) {
            jt["segments"].push_back({{"id", s.id},
                                      {"start_seconds", s.start_seconds},
                                      {"global_index", s.global_index}});
        }
        j["tracks"].push_back(std::move(jt));
    }
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("manifest: cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("manifest: cannot open " + path);
    nlohmann::json j;
    in >> j;
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.segment_seconds = j.at("segment_seconds").get<double>();
    for (const auto& jt : j.at("tracks")) {
        TrackEntry t;
        t.id = jt.at("id").get<int>();
        t.path = jt.at("path").get<std::string>();
        t.title = jt.at("title").get<std::string>();
        t.split = jt.at("split").get<std::string>();
        t.duration_seconds = jt.at("duration_seconds").get<double>();
        for (const auto& js : jt.at("segments")) {
            SegmentEntry s;
            s.id = js.at("id").get<std::string>();
            s.track_id = t.id;
            s.start_seconds = js.at("start_seconds").get<double>();
            s.global_index = js.at("global_index").get<std::uint64_t>();
            t.segments.push_back(std::move(s));
        }
        m.tracks.push_back(std::move(t));
    }
    return m;
}

// --- corpora ------------------------------------------------------------------------

inline std::shared_ptr<const AudioCorpus> load_or_synth_corpus(const std::string& dir,
                                                               bool is_ir,
                                                               const ExperimentConfig& cfg) {
    if (dir.empty()) {
        const std::uint64_t s = derive_stream(cfg.seed, detail::fnv1a(is_ir ? "ir" : "noise"));
        return is_ir ? make_synth_ir_corpus(s, cfg.synth_ir_items, cfg.augment_rate_hz)
                     : make_synth_noise_corpus(s, cfg.synth_noise_items, 12.0, cfg.augment_rate_hz);
    }
    auto corpus = std::make_shared<AudioCorpus>();
    corpus->name = dir;
    for (const std::string& path : detail::list_wavs(dir)) {
        Waveform w = read_wav(path);
        if (w.sample_rate_hz != cfg.augment_rate_hz) w = resample(w, cfg.augment_rate_hz);
        corpus->items.push_back(std::move(w));
    }
    if (corpus->items.empty()) throw ConfigError("corpus: no wav files in " + dir);
    return corpus;
}

// --- pipeline spec json ----------------------------------------------------------

inline TransformKind transform_kind_from_string(const std::string& s) {
    for (const TransformKind k :
         {TransformKind::speaker_filter, TransformKind::ir_convolve,
          TransformKind::background_noise, TransformKind::gain, TransformKind::sample_dropout,
          TransformKind::device_lowpass, TransformKind::device_highpass})
        if (s == to_string(k)) return k;
    throw ConfigError("augment: unknown transform kind " + s);
}

inline nlohmann::json augment_spec_to_json(const AugmentationSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["seed"] = spec.seed;
    j["transforms"] = nlohmann::json::array();
    for (const TransformSpec& t : spec.transforms)
        j["transforms"].push_back({{"kind", to_string(t.kind)},
                                   {"probability", t.probability},
                                   {"lo", t.lo},
                                   {"hi", t.hi}});
    return j;
}

// Corpora are not part of the serialized form; attach them after loading.
inline AugmentationSpec augment_spec_from_json(const nlohmann::json& j) {
    AugmentationSpec spec;
    spec.name = j.value("name", std::string{});
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& jt : j.at("transforms")) {
        TransformSpec t;
        t.kind = transform_kind_from_string(jt.at("kind").get<std::string>());
        t.probability = jt.value("probability", 1.0);
        t.lo = jt.at("lo").get<double>();
        t.hi = jt.at("hi").get<double>();
        spec.transforms.push_back(t);
    }
    return spec;
}

// A pipeline reference is either a built-in name or a path to a spec JSON
// (anything ending in .json). Custom specs let callers rerun the benchmark
// with their own parameter ranges.
inline AugmentationSpec pipeline_for(const ExperimentConfig& cfg, const std::string& name,
                                     std::shared_ptr<const AudioCorpus> noise,
                                     std::shared_ptr<const AudioCorpus> ir) {
    AugmentationSpec spec;
    if (name.size() > 5 && name.rfind(".json") == name.size() - 5) {
        std::ifstream in(name);
        if (!in) throw ConfigError("augment: cannot open pipeline spec " + name);
        nlohmann::json j;
        in >> j;
        spec = augment_spec_from_json(j);
        if (spec.name.empty()) spec.name = detail::stem_of(name);
        spec.noise_corpus = std::move(noise);
        spec.ir_corpus = std::move(ir);
    } else {
        spec = make_pipeline(name, std::move(noise), std::move(ir));
    }
    spec.seed = derive_stream(cfg.seed, detail::fnv1a(spec.name));
    return spec;
}

// --- paired spectrogram store ----------------------------------------------------------

// JSON-file pipeline references are stored under their file stem.
inline std::string resolved_pipeline_name(const std::string& pipeline) {
    if (pipeline.size() > 5 && pipeline.rfind(".json") == pipeline.size() - 5)
        return detail::stem_of(pipeline);
    return pipeline;
}

inline std::string pairs_dir(const ExperimentConfig& cfg, const std::string& pipeline) {
    return cfg.output_dir + "/pairs/" + resolved_pipeline_name(pipeline);
}

// For each selected segment: slice the track at the augment rate, push the
// slice through the pipeline, then take both sides to the engine rate and
// store their CQTs as an SPG1 pair plus a transform-log line.
inline std::size_t cmd_augment(const ExperimentConfig& cfg, const Manifest& m,
                               const std::string& pipeline_name) {
    validate(cfg);
    auto noise = load_or_synth_corpus(cfg.noise_dir, false, cfg);
    auto ir = load_or_synth_corpus(cfg.ir_dir, true, cfg);
    const AugmentationSpec spec = pipeline_for(cfg, pipeline_name, noise, ir);
    validate(spec);
    const CqtKernel kernel(cfg.engine.cqt);

    const std::string dir = pairs_dir(cfg, pipeline_name);
    std::filesystem::create_directories(dir);
    {
        std::ofstream spec_out(dir + "/pipeline.json", std::ios::trunc);
        spec_out << augment_spec_to_json(spec).dump(2) << "\n";
    }

    std::vector<const TrackEntry*> tracks;
    for (const TrackEntry& t : m.tracks) {
        if (cfg.split_filter != "all" && t.split != cfg.split_filter) continue;
        if (!t.segments.empty()) tracks.push_back(&t);
    }

    std::vector<std::vector<nlohmann::json>> logs(tracks.size());
    std::atomic<std::size_t> n_pairs{0};
    detail::parallel_for(tracks.size(), cfg.jobs, [&](std::size_t ti) {
        const TrackEntry& t = *tracks[ti];
        Waveform audio = read_wav(t.path);
        if (audio.sample_rate_hz != cfg.augment_rate_hz)
            audio = resample(audio, cfg.augment_rate_hz);
        const auto seg_len =
            static_cast<std::size_t>(cfg.segment_seconds * cfg.augment_rate_hz);
        for (const SegmentEntry& seg : t.segments) {
            const auto start = static_cast<std::size_t>(seg.start_seconds * cfg.augment_rate_hz);
            if (start + seg_len > audio.samples.size()) continue;
            Waveform slice;
            slice.sample_rate_hz = cfg.augment_rate_hz;
            slice.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                 audio.samples.begin() + static_cast<std::ptrdiff_t>(start + seg_len));

            const AugmentResult aug = augment(slice, spec, seg.global_index);

            Spectrogram clean = kernel.apply(resample(slice, cfg.engine.cqt.sample_rate_hz));
            Spectrogram noisy = kernel.apply(resample(aug.audio, cfg.engine.cqt.sample_rate_hz));
            clean.source_id = seg.id + ".clean";
            noisy.source_id = seg.id + ".noisy";
            write_spg1(dir + "/" + seg.id + ".clean.spg1", clean);
            write_spg1(dir + "/" + seg.id + ".noisy.spg1", noisy);
            ++n_pairs;

            nlohmann::json entry;
            entry["segment"] = seg.id;
            entry["applied"] = nlohmann::json::array();
            for (const AppliedTransform& a : aug.log) {
                nlohmann::json ja;
                ja["kind"] = to_string(a.kind);
                ja["value"] = a.value;
                if (a.corpus_item >= 0) ja["corpus_item"] = a.corpus_item;
                entry["applied"].push_back(std::move(ja));
            }
            logs[ti].push_back(std::move(entry));
        }
    });

    std::ofstream log_out(dir + "/transforms.jsonl", std::ios::trunc);
    for (const auto& track_logs : logs)
        for (const auto& entry : track_logs) log_out << entry.dump() << "\n";
    return n_pairs.load();
}

// --- evaluation -----------------------------------------------------------------------

struct ReportRow {
    std::string pipeline;
    std::string denoiser;
    std::string stage;   // stage2 | stage3 | final
    std::string metric;
    std::string params;  // the constants the metric was computed with
    double value = 0.0;
    std::size_t n_items = 0;
    std::size_t infinite_items = 0;
};

struct ItemRow {
    std::string pipeline;
    std::string denoiser;
    std::string stage;
    std::string metric;
    std::string segment;
    double value = 0.0;
    bool infinite = false;
};

namespace detail {

struct ItemMetrics {
    std::string segment;
    // stage2
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double l1 = 0.0, l1_mean = 0.0, ssim_v = 0.0, dssim_v = 0.0, ti = 0.0, ftl = 0.0;
    // stage3 / final
    PeakMetricReport s3, fin;
};

inline ItemMetrics evaluate_pair(const Spectrogram& denoised, const PipelineOutputs& clean_out,
                                 const PipelineConfig& pipe_cfg, const TverskyParams& tversky) {
    ItemMetrics im;
    const PipelineOutputs den_out = run_pipeline(denoised, pipe_cfg);

    const Spectrogram& a = den_out.stage2;
    const Spectrogram& b = clean_out.stage2;
    const double max_ref = std::max(b.max_value(), 1e-12);
    const PsnrResult pr = psnr(a, b, max_ref, PsnrMode::standard_mse);
    im.psnr_db = pr.db;
    im.psnr_infinite = pr.infinite;
    im.l1 = lp_distance(a, b, 1);
    im.l1_mean = mean_lp(a, b, 1);
    const int win = std::min({11, a.frames, a.bins});
    im.ssim_v = ssim(a, b, make_ssim_params(max_ref, win));
    im.dssim_v = (1.0 - im.ssim_v) / 2.0;
    const TverskyComponents tc = tversky_components(a, b);
    im.ti = tversky_index(tc, tversky);
    im.ftl = focal_tversky_loss(tc, tversky);

    im.s3 = peak_prf(mask_from_peaks(den_out.stage3), mask_from_peaks(clean_out.stage3), 1);
    im.fin = peak_prf(mask_from_peaks(den_out.final), mask_from_peaks(clean_out.final), 1);
    return im;
}

}  // namespace detail

struct EvaluateResult {
    std::vector<ReportRow> rows;
    std::vector<ItemRow> items;
};

// Metric tables per (pipeline, denoiser). The identity "no model" rows are
// always produced; a configured denoiser adds its own rows next to them.
inline EvaluateResult cmd_evaluate(const ExperimentConfig& cfg, const Manifest& m) {
    validate(cfg);
    const TverskyParams tversky{};  // alpha 0.7, beta 0.3, gamma 0.75

    std::vector<std::pair<std::string, std::unique_ptr<Denoiser>>> denoisers;
    denoisers.emplace_back("none", make_denoiser("none"));
    if (cfg.denoiser != "none" && cfg.denoiser != "identity")
        denoisers.emplace_back(cfg.denoiser, make_denoiser(cfg.denoiser, cfg.denoiser_options));

    EvaluateResult result;
    for (const std::string& pipeline_ref : cfg.pipelines) {
        const std::string pipeline = resolved_pipeline_name(pipeline_ref);
        const std::string dir = pairs_dir(cfg, pipeline);
        if (!std::filesystem::is_directory(dir))
            throw ConfigError("evaluate: missing pair store " + dir + " (run augment first)");

        const auto segs = m.segments_in(cfg.split_filter);
        std::vector<const SegmentEntry*> present;
        for (const SegmentEntry* seg : segs)
            if (std::filesystem::exists(dir + "/" + seg->id + ".clean.spg1")) present.push_back(seg);
        if (present.empty()) throw ConfigError("evaluate: no pairs in " + dir);

        // per segment: run the clean side once, then every denoiser's side
        std::vector<std::vector<detail::ItemMetrics>> metrics(
            denoisers.size(), std::vector<detail::ItemMetrics>(present.size()));
        detail::parallel_for(present.size(), cfg.jobs, [&](std::size_t i) {
            const SegmentEntry& seg = *present[i];
            const Spectrogram clean = read_spg1(dir + "/" + seg.id + ".clean.spg1");
            const Spectrogram noisy = read_spg1(dir + "/" + seg.id + ".noisy.spg1");
            const PipelineOutputs clean_out = run_pipeline(clean, cfg.engine.pipeline);
            for (std::size_t d = 0; d < denoisers.size(); ++d) {
                const Spectrogram denoised = denoisers[d].second->denoise(noisy);
                metrics[d][i] =
                    detail::evaluate_pair(denoised, clean_out, cfg.engine.pipeline, tversky);
                metrics[d][i].segment = seg.id;
            }
        });

        for (std::size_t d = 0; d < denoisers.size(); ++d) {
            const std::string& dname = denoisers[d].first;
            const std::vector<detail::ItemMetrics>& items = metrics[d];

            struct Acc {
                double sum = 0.0;
                std::size_t n = 0, inf = 0;
                void add(double v, bool is_inf = false) {
                    if (is_inf) {
                        ++inf;
                        return;
                    }
                    sum += v;
                    ++n;
                }
                double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
            };
            std::map<std::pair<std::string, std::string>, Acc> acc;  // (stage, metric)
            auto push_item = [&](const std::string& stage, const std::string& metric,
                                 const std::string& seg, double v, bool inf = false) {
                acc[{stage, metric}].add(v, inf);
                result.items.push_back({pipeline, dname, stage, metric, seg, v, inf});
            };
            for (const auto& im : items) {
                push_item("stage2", "psnr_db", im.segment, im.psnr_db, im.psnr_infinite);
                push_item("stage2", "l1", im.segment, im.l1);
                push_item("stage2", "l1_mean", im.segment, im.l1_mean);
                push_item("stage2", "ssim", im.segment, im.ssim_v);
                push_item("stage2", "dssim", im.segment, im.dssim_v);
                push_item("stage2", "tversky_index", im.segment, im.ti);
                push_item("stage2", "focal_tversky_loss", im.segment, im.ftl);
                push_item("stage3", "precision", im.segment, im.s3.precision);
                push_item("stage3", "recall", im.segment, im.s3.recall);
                push_item("stage3", "f1", im.segment, im.s3.f1);
                push_item("final", "precision", im.segment, im.fin.precision);
                push_item("final", "recall", im.segment, im.fin.recall);
                push_item("final", "f1", im.segment, im.fin.f1);
            }
            char tversky_desc[64];
            std::snprintf(tversky_desc, sizeof(tversky_desc), "alpha=%g;beta=%g;gamma=%g",
                          tversky.alpha, tversky.beta, tversky.gamma);
            auto params_for = [&](const std::string& metric) -> std::string {
                if (metric == "psnr_db") return "mode=standard_mse;max=max(clean_stage2)";
                if (metric == "ssim" || metric == "dssim")
                    return "window=gaussian11;sigma=1.5;L=max(clean_stage2)";
                if (metric == "tversky_index" || metric == "focal_tversky_loss")
                    return tversky_desc;
                if (metric == "precision" || metric == "recall" || metric == "f1") return "tol=1";
                return "";
            };
            static const char* stage_order[] = {"stage2", "stage3", "final"};
            static const char* metric_order[] = {"psnr_db", "l1",     "l1_mean",
                                                 "ssim",    "dssim",  "tversky_index",
                                                 "focal_tversky_loss", "precision",
                                                 "recall",  "f1"};
            for (const char* stage : stage_order)
                for (const char* metric : metric_order) {
                    const auto it = acc.find({stage, metric});
                    if (it == acc.end()) continue;
                    result.rows.push_back({pipeline, dname, stage, metric, params_for(metric),
                                           it->second.mean(), it->second.n, it->second.inf});
                }
        }
    }
    return result;
}

inline void write_report(const EvaluateResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/report.csv", std::ios::trunc);
        csv << "pipeline,denoiser,stage,metric,params,value,n_items,infinite_items\n";
        for (const ReportRow& r : result.rows)
            csv << r.pipeline << ',' << r.denoiser << ',' << r.stage << ',' << r.metric << ','
                << r.params << ',' << detail::format_value(r.value) << ',' << r.n_items << ','
                << r.infinite_items << "\n";
    }
    {
        std::ofstream csv(out_dir + "/report_items.csv", std::ios::trunc);
        csv << "pipeline,denoiser,stage,metric,segment,value,infinite\n";
        for (const ItemRow& r : result.items)
            csv << r.pipeline << ',' << r.denoiser << ',' << r.stage << ',' << r.metric << ','
                << r.segment << ',' << detail::format_value(r.value) << ',' << (r.infinite ? 1 : 0)
                << "\n";
    }
    {
        nlohmann::json j = nlohmann::json::array();
        for (const ReportRow& r : result.rows) {
            j.push_back({{"pipeline", r.pipeline},
                         {"denoiser", r.denoiser},
                         {"stage", r.stage},
                         {"metric", r.metric},
                         {"params", r.params},
                         {"value", r.value},
                         {"n_items", r.n_items},
                         {"infinite_items", r.infinite_items}});
        }
        std::ofstream out(out_dir + "/report.json", std::ios::trunc);
        out << j.dump(2) << "\n";
    }
}

// --- indexing and identification --------------------------------------------------------

inline std::string index_path(const ExperimentConfig& cfg) {
    return cfg.output_dir + "/index.fpx1";
}

// Fingerprints every corpus track (full length) into an FPX1 index.
inline FingerprintIndex cmd_index(const ExperimentConfig& cfg, const Manifest& m) {
    validate(cfg);
    const FingerprintEngine engine(cfg.engine);
    std::vector<std::vector<Landmark>> landmarks(m.tracks.size());
    std::vector<std::uint32_t> frames(m.tracks.size());
    detail::parallel_for(m.tracks.size(), cfg.jobs, [&](std::size_t i) {
        const Waveform w = read_wav(m.tracks[i].path);
        const Spectrogram s = engine.cqt(w);
        frames[i] = static_cast<std::uint32_t>(s.frames);
        landmarks[i] = engine.landmarks_for(s);
    });
    FingerprintIndex idx;
    for (std::size_t i = 0; i < m.tracks.size(); ++i)
        index_track(idx, static_cast<std::uint32_t>(m.tracks[i].id),
                    {m.tracks[i].title, frames[i]}, landmarks[i]);
    std::filesystem::create_directories(cfg.output_dir);
    save_index(idx, index_path(cfg));
    return idx;
}

struct IdentifyBenchRow {
    std::string pipeline;
    std::string denoiser;
    std::size_t n_queries = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
    double snr_lo = 0.0, snr_hi = 0.0;
    bool has_snr = false;
    int min_votes = 0;
};

// Top-1 identification accuracy per pipeline over augmented excerpts. The
// "clean" condition (no augmentation) is always included first.
inline std::vector<IdentifyBenchRow> cmd_identify_bench(const ExperimentConfig& cfg,
                                                        const Manifest& m,
                                                        const FingerprintIndex& idx) {
    validate(cfg);
    const FingerprintEngine engine(cfg.engine);
    auto noise = load_or_synth_corpus(cfg.noise_dir, false, cfg);
    auto ir = load_or_synth_corpus(cfg.ir_dir, true, cfg);
    std::unique_ptr<Denoiser> denoiser;
    if (cfg.denoiser != "none" && cfg.denoiser != "identity")
        denoiser = make_denoiser(cfg.denoiser, cfg.denoiser_options);

    std::vector<const TrackEntry*> tracks;
    for (const TrackEntry& t : m.tracks) {
        if (cfg.split_filter != "all" && t.split != cfg.split_filter) continue;
        if (t.duration_seconds >= cfg.segment_seconds) tracks.push_back(&t);
    }
    if (tracks.empty()) throw ConfigError("identify-bench: no usable tracks");

    std::vector<std::string> conditions = {"clean"};
    conditions.insert(conditions.end(), cfg.pipelines.begin(), cfg.pipelines.end());

    std::vector<IdentifyBenchRow> rows;
    for (const std::string& condition : conditions) {
        const bool is_clean = condition == "clean";
        AugmentationSpec spec;
        if (!is_clean) {
            spec = pipeline_for(cfg, condition, noise, ir);
            validate(spec);
        }

        std::vector<int> correct(tracks.size(), 0);
        std::vector<int> total(tracks.size(), 0);
        detail::parallel_for(tracks.size(), cfg.jobs, [&](std::size_t ti) {
            const TrackEntry& t = *tracks[ti];
            Waveform audio = read_wav(t.path);
            if (audio.sample_rate_hz != cfg.augment_rate_hz)
                audio = resample(audio, cfg.augment_rate_hz);
            const auto seg_len =
                static_cast<std::size_t>(cfg.segment_seconds * cfg.augment_rate_hz);
            if (audio.samples.size() < seg_len) return;
            Rng rng(derive_stream(derive_stream(cfg.seed, detail::fnv1a("identify-" + condition)),
                                  static_cast<std::uint64_t>(t.id)));
            for (int q = 0; q < cfg.queries_per_track; ++q) {
                const std::size_t slack = audio.samples.size() - seg_len;
                const std::size_t start = slack ? static_cast<std::size_t>(rng.below(slack + 1)) : 0;
                Waveform query;
                query.sample_rate_hz = cfg.augment_rate_hz;
                query.samples.assign(
                    audio.samples.begin() + static_cast<std::ptrdiff_t>(start),
                    audio.samples.begin() + static_cast<std::ptrdiff_t>(start + seg_len));
                if (!is_clean) {
                    const std::uint64_t item_seed =
                        static_cast<std::uint64_t>(t.id) * 1000 + static_cast<std::uint64_t>(q);
                    query = augment(query, spec, item_seed).audio;
                }
                const MatchResult r = engine.identify(idx, query, denoiser.get());
                ++total[ti];
                if (r.matched && r.track_id == t.id) ++correct[ti];
            }
        });

        IdentifyBenchRow row;
        row.pipeline = is_clean ? condition : spec.name;
        row.denoiser = denoiser ? cfg.denoiser : "none";
        row.min_votes = cfg.engine.match.min_votes;
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            row.n_queries += static_cast<std::size_t>(total[i]);
            row.n_correct += static_cast<std::size_t>(correct[i]);
        }
        row.accuracy =
            row.n_queries ? static_cast<double>(row.n_correct) / static_cast<double>(row.n_queries)
                          : 0.0;
        if (!is_clean)
            for (const TransformSpec& ts : spec.transforms)
                if (ts.kind == TransformKind::background_noise) {
                    row.snr_lo = ts.lo;
                    row.snr_hi = ts.hi;
                    row.has_snr = true;
                }
        rows.push_back(row);
    }
    return rows;
}

inline void write_identify_report(const std::vector<IdentifyBenchRow>& rows,
                                  const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/identify.csv", std::ios::trunc);
    csv << "pipeline,denoiser,n_queries,n_correct,accuracy,snr_lo,snr_hi,min_votes\n";
    for (const IdentifyBenchRow& r : rows) {
        csv << r.pipeline << ',' << r.denoiser << ',' << r.n_queries << ',' << r.n_correct << ','
            << detail::format_value(r.accuracy) << ',';
        if (r.has_snr)
            csv << detail::format_value(r.snr_lo) << ',' << detail::format_value(r.snr_hi);
        else
            csv << ',';
        csv << ',' << r.min_votes << "\n";
    }
}

// Writes a deterministic synthetic corpus as 16-bit WAVs.
inline std::vector<std::string> write_synth_corpus(const std::string& dir, int n_tracks,
                                                   double seconds, int rate, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (int i = 0; i < n_tracks; ++i) {
        const Waveform w = synth_track(derive_stream(seed, static_cast<std::uint64_t>(i)), seconds, rate);
        char name[32];
        std::snprintf(name, sizeof(name), "track_%04d.wav", i);
        const std::string path = dir + "/" + name;
        write_wav(path, w, WavEncoding::pcm16);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace afp
