// afpbench: spectral-peak fingerprinting workbench.
//
//   synth-corpus    write a deterministic synthetic track corpus
//   segment         build the segment manifest with train/val/test splits
//   augment         render paired clean/noisy CQT stores per noise pipeline
//   index           fingerprint the corpus into an FPX1 inverted index
//   evaluate        denoising + peak-preservation metric tables
//   identify-bench  top-1 identification accuracy per noise pipeline
//   identify        identify one WAV file against the index

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "afp/bench.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string corpus_dir;
    std::string noise_dir;
    std::string ir_dir;
    std::string output_dir;
    std::string denoiser;
    std::string split_filter;
    std::vector<std::string> pipelines;
    std::uint64_t seed = 0;
    int jobs = 0;
    int queries_per_track = 0;
    double segment_seconds = 0.0;
    bool seed_set = false;
    double specsub_percentile = -1.0, specsub_over_subtract = -1.0, specsub_floor = -1.0;
    double wiener_percentile = -1.0, wiener_min_gain = -1.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment config");
    cmd->add_option("--corpus", args.corpus_dir, "directory of corpus WAV files");
    cmd->add_option("--noise-dir", args.noise_dir, "noise corpus directory (default: synthetic)");
    cmd->add_option("--ir-dir", args.ir_dir, "impulse response directory (default: synthetic)");
    cmd->add_option("--output", args.output_dir, "output directory");
    cmd->add_option("--denoiser", args.denoiser, "none | specsub | wiener | file:<dir>");
    cmd->add_option("--pipelines", args.pipelines, "pipeline names to process");
    cmd->add_option("--split", args.split_filter, "train | val | test | all");
    cmd->add_option("--seed", args.seed, "master seed")->each([&args](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--jobs", args.jobs, "worker threads");
    cmd->add_option("--queries-per-track", args.queries_per_track, "identify-bench queries");
    cmd->add_option("--segment-seconds", args.segment_seconds, "segment length in seconds");
    cmd->add_option("--specsub-percentile", args.specsub_percentile, "noise-floor percentile");
    cmd->add_option("--specsub-over-subtract", args.specsub_over_subtract, "over-subtraction factor");
    cmd->add_option("--specsub-floor", args.specsub_floor, "spectral floor fraction");
    cmd->add_option("--wiener-percentile", args.wiener_percentile, "noise-floor percentile");
    cmd->add_option("--wiener-min-gain", args.wiener_min_gain, "gain clamp");
}

afp::ExperimentConfig resolve_config(const CommonArgs& args) {
    afp::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = afp::load_config(args.config_path);
    if (!args.corpus_dir.empty()) cfg.corpus_dir = args.corpus_dir;
    if (!args.noise_dir.empty()) cfg.noise_dir = args.noise_dir;
    if (!args.ir_dir.empty()) cfg.ir_dir = args.ir_dir;
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
    if (!args.denoiser.empty()) cfg.denoiser = args.denoiser;
    if (!args.pipelines.empty()) cfg.pipelines = args.pipelines;
    if (!args.split_filter.empty()) cfg.split_filter = args.split_filter;
    if (args.seed_set) cfg.seed = args.seed;
    if (args.jobs > 0) cfg.jobs = args.jobs;
    if (args.queries_per_track > 0) cfg.queries_per_track = args.queries_per_track;
    if (args.segment_seconds > 0.0) cfg.segment_seconds = args.segment_seconds;
    if (args.specsub_percentile >= 0.0) cfg.denoiser_options.specsub_percentile = args.specsub_percentile;
    if (args.specsub_over_subtract >= 0.0)
        cfg.denoiser_options.specsub_over_subtract = args.specsub_over_subtract;
    if (args.specsub_floor >= 0.0) cfg.denoiser_options.specsub_floor = args.specsub_floor;
    if (args.wiener_percentile >= 0.0) cfg.denoiser_options.wiener_percentile = args.wiener_percentile;
    if (args.wiener_min_gain >= 0.0) cfg.denoiser_options.wiener_min_gain = args.wiener_min_gain;
    return cfg;
}

std::string manifest_path(const afp::ExperimentConfig& cfg) {
    return cfg.output_dir + "/manifest.json";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-peak audio fingerprinting workbench"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* synth = app.add_subcommand("synth-corpus", "write a synthetic track corpus");
    std::string synth_out = "corpus";
    int synth_tracks = 100;
    double synth_seconds = 12.0;
    int synth_rate = 44100;
    std::uint64_t synth_seed = 42;
    synth->add_option("--out", synth_out, "destination directory");
    synth->add_option("--tracks", synth_tracks, "number of tracks");
    synth->add_option("--seconds", synth_seconds, "track duration");
    synth->add_option("--rate", synth_rate, "sample rate");
    synth->add_option("--seed", synth_seed, "generator seed");

    auto* segment = app.add_subcommand("segment", "build the segment manifest");
    add_common(segment, args);

    auto* augment_cmd = app.add_subcommand("augment", "render paired clean/noisy stores");
    add_common(augment_cmd, args);

    auto* index_cmd = app.add_subcommand("index", "build the fingerprint index");
    add_common(index_cmd, args);

    auto* evaluate = app.add_subcommand("evaluate", "compute metric tables");
    add_common(evaluate, args);

    auto* ident_bench = app.add_subcommand("identify-bench", "identification accuracy benchmark");
    add_common(ident_bench, args);

    auto* identify = app.add_subcommand("identify", "identify a WAV file");
    std::string query_path;
    identify->add_option("wav", query_path, "query WAV file")->required();
    add_common(identify, args);

    auto* inspect = app.add_subcommand("inspect", "export per-stage features of one WAV");
    std::string inspect_path;
    std::string inspect_out = "inspect";
    inspect->add_option("wav", inspect_path, "input WAV file")->required();
    inspect->add_option("--out", inspect_out, "destination directory");
    add_common(inspect, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (inspect->parsed()) {
            const afp::ExperimentConfig cfg = resolve_config(args);
            const afp::FingerprintEngine engine(cfg.engine);
            afp::Spectrogram s = engine.cqt(afp::read_wav(inspect_path));
            if (cfg.denoiser != "none" && cfg.denoiser != "identity") {
                s.source_id = std::filesystem::path(inspect_path).stem().string();
                s = afp::make_denoiser(cfg.denoiser, cfg.denoiser_options)->denoise(s);
            }
            const afp::PipelineOutputs stages = afp::run_pipeline(s, cfg.engine.pipeline);
            const std::string base =
                inspect_out + "/" + std::filesystem::path(inspect_path).stem().string();
            std::filesystem::create_directories(inspect_out);
            afp::write_spg1(base + ".cqt.spg1", s);
            afp::write_spg1(base + ".stage1.spg1", stages.stage1);
            afp::write_spg1(base + ".stage2.spg1", stages.stage2);
            afp::write_spg1(base + ".stage3_mask.spg1",
                            afp::mask_to_spectrogram(afp::mask_from_peaks(stages.stage3)));
            afp::write_peaks_csv(base + ".stage3.csv", stages.stage3);
            afp::write_peaks_csv(base + ".final.csv", stages.final);
            afp::write_landmarks_csv(base + ".landmarks.csv", engine.landmarks_for(s));
            std::printf("inspect: %zu stage-3 peaks, %zu final peaks -> %s.*\n",
                        stages.stage3.size(), stages.final.size(), base.c_str());
            return 0;
        }

        if (synth->parsed()) {
            const auto paths =
                afp::write_synth_corpus(synth_out, synth_tracks, synth_seconds, synth_rate, synth_seed);
            std::printf("wrote %zu tracks to %s\n", paths.size(), synth_out.c_str());
            return 0;
        }

        const afp::ExperimentConfig cfg = resolve_config(args);

        if (segment->parsed()) {
            const afp::Manifest m = afp::cmd_segment(cfg);
            afp::save_manifest(m, manifest_path(cfg));
            std::size_t n_segments = 0;
            for (const auto& t : m.tracks) n_segments += t.segments.size();
            std::printf("manifest: %zu tracks, %zu segments -> %s\n", m.tracks.size(), n_segments,
                        manifest_path(cfg).c_str());
            return 0;
        }

        const afp::Manifest m = afp::load_manifest(manifest_path(cfg));

        if (augment_cmd->parsed()) {
            for (const std::string& pipeline : cfg.pipelines) {
                const std::size_t n = afp::cmd_augment(cfg, m, pipeline);
                std::printf("augment %-16s %zu pairs -> %s\n", pipeline.c_str(), n,
                            afp::pairs_dir(cfg, pipeline).c_str());
            }
            return 0;
        }

        if (index_cmd->parsed()) {
            const afp::FingerprintIndex idx = afp::cmd_index(cfg, m);
            std::printf("index: %zu tracks, %zu postings -> %s\n", idx.catalog.size(),
                        idx.posting_count(), afp::index_path(cfg).c_str());
            return 0;
        }

        if (evaluate->parsed()) {
            const afp::EvaluateResult result = afp::cmd_evaluate(cfg, m);
            afp::write_report(result, cfg.output_dir);
            std::printf("evaluate: %zu report rows -> %s/report.csv\n", result.rows.size(),
                        cfg.output_dir.c_str());
            return 0;
        }

        if (ident_bench->parsed()) {
            const afp::FingerprintIndex idx = afp::load_index(afp::index_path(cfg));
            const auto rows = afp::cmd_identify_bench(cfg, m, idx);
            afp::write_identify_report(rows, cfg.output_dir);
            for (const auto& r : rows)
                std::printf("identify %-16s denoiser=%-8s accuracy=%.4f (%zu/%zu)\n",
                            r.pipeline.c_str(), r.denoiser.c_str(), r.accuracy, r.n_correct,
                            r.n_queries);
            return 0;
        }

        if (identify->parsed()) {
            const afp::FingerprintIndex idx = afp::load_index(afp::index_path(cfg));
            const afp::FingerprintEngine engine(cfg.engine);
            std::unique_ptr<afp::Denoiser> den;
            if (cfg.denoiser != "none" && cfg.denoiser != "identity")
                den = afp::make_denoiser(cfg.denoiser, cfg.denoiser_options);
            const afp::Waveform w = afp::read_wav(query_path);
            const afp::MatchResult r = engine.identify(idx, w, den.get());
            if (r.matched) {
                const auto& info = idx.catalog.at(static_cast<std::uint32_t>(r.track_id));
                const double offset_s = r.offset_frames *
                                        static_cast<double>(cfg.engine.cqt.hop_samples) /
                                        cfg.engine.cqt.sample_rate_hz;
                std::printf("match: track %lld \"%s\" score=%d offset=%.2fs\n",
                            static_cast<long long>(r.track_id), info.title.c_str(), r.score,
                            offset_s);
            } else {
                std::printf("no match (best score %d, threshold %d)\n", r.score,
                            cfg.engine.match.min_votes);
            }
            return r.matched ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
