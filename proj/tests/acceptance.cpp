// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its tolerances in code; thresholds are not tunable
// from outside.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "afp/bench.hpp"

using namespace afp;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::function<std::string()> run;  // empty string: pass; otherwise failure detail
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Waveform sine(double freq, double seconds, int rate, double amp = 1.0) {
    Waveform w;
    w.sample_rate_hz = rate;
    const std::size_t n = static_cast<std::size_t>(seconds * rate);
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate);
    return w;
}

std::set<std::pair<int, int>> coords(const PeakSet& ps) {
    std::set<std::pair<int, int>> out;
    for (const Peak& p : ps.peaks) out.insert({p.t, p.f});
    return out;
}

// ---------- 1. peak-extraction oracle ----------

std::string check_peak_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        const int tau = 1 + rep % 3;
        const int rho = 1 + (rep / 3) % 3;
        Spectrogram s(50, 50);
        // quantized magnitudes keep ties in play
        for (double& v : s.values) v = std::floor(rng.uniform(0.0, 16.0)) / 16.0;
        PeakPickingParams p;
        p.tau = tau;
        p.rho = rho;
        const auto got = coords(stage3_extract_peaks(s, p));

        std::set<std::pair<int, int>> want;
        for (int t = 0; t < 50; ++t)
            for (int f = 0; f < 50; ++f) {
                const double v = s.at(t, f);
                if (!(v > 0.0)) continue;
                bool ok = true;
                for (int tt = std::max(0, t - tau); tt <= std::min(49, t + tau) && ok; ++tt)
                    for (int ff = std::max(0, f - rho); ff <= std::min(49, f + rho); ++ff) {
                        const double u = s.at(tt, ff);
                        if (u > v || (u == v && std::pair(tt, ff) < std::pair(t, f))) {
                            ok = false;
                            break;
                        }
                    }
                if (ok) want.insert({t, f});
            }
        if (got != want) return "set mismatch at rep " + std::to_string(rep);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 10.0) return "runtime " + std::to_string(secs) + " s exceeds 10 s";
    return {};
}

// ---------- 2. tolerance-metric oracle ----------

std::string check_prf_oracle() {
    auto single = [](std::pair<int, int> a, std::pair<int, int> b, int tol) {
        PeakMask pred(10, 10), ref(10, 10);
        pred.set(a.first, a.second, 1);
        ref.set(b.first, b.second, 1);
        return peak_prf(pred, ref, tol);
    };
    const PeakMetricReport inside = single({6, 6}, {5, 5}, 1);
    if (inside.tp != 1 || inside.precision != 1.0 || inside.recall != 1.0)
        return "one-pixel displacement must be a TP in the 3x3 window";
    const PeakMetricReport outside = single({7, 7}, {5, 5}, 1);
    if (outside.precision != 0.0 || outside.recall != 0.0)
        return "two-pixel displacement must not match";

    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        PeakMask a(30, 30), b(30, 30);
        for (int i = 0; i < 35; ++i) {
            a.set(static_cast<int>(rng.below(30)), static_cast<int>(rng.below(30)), 1);
            b.set(static_cast<int>(rng.below(30)), static_cast<int>(rng.below(30)), 1);
        }
        const int tol = 1;
        auto hit = [&](const PeakMask& m, int t, int f) {
            for (int tt = std::max(0, t - tol); tt <= std::min(29, t + tol); ++tt)
                for (int ff = std::max(0, f - tol); ff <= std::min(29, f + tol); ++ff)
                    if (m.at(tt, ff)) return true;
            return false;
        };
        std::int64_t np = 0, nr = 0, tpp = 0, tpr = 0;
        for (int t = 0; t < 30; ++t)
            for (int f = 0; f < 30; ++f) {
                if (a.at(t, f)) {
                    ++np;
                    if (hit(b, t, f)) ++tpp;
                }
                if (b.at(t, f)) {
                    ++nr;
                    if (hit(a, t, f)) ++tpr;
                }
            }
        const PeakMetricReport got = peak_prf(a, b, tol);
        if (got.tp != tpp || got.fp != np - tpp || got.fn != nr - tpr)
            return "count mismatch at rep " + std::to_string(rep);
    }
    return {};
}

// ---------- 3. Tversky suite ----------

std::string check_tversky() {
    Rng rng(13);
    Spectrogram x(8, 8);
    for (double& v : x.values) v = rng.uniform() < 0.4 ? rng.uniform(0.1, 2.0) : 0.0;
    const TverskyParams reference{0.7, 0.3, 0.75};
    validate(reference);
    if (tversky_index(tversky_components(x, x), reference) != 1.0)
        return "TI(x, x) must be exactly 1";

    // binary masks: alpha = beta = 0.5 is the Dice rearrangement
    for (int rep = 0; rep < 20; ++rep) {
        Spectrogram p(6, 6), g(6, 6);
        for (double& v : p.values) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
        for (double& v : g.values) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
        const TverskyComponents c = tversky_components(p, g);
        const double want = (c.tp + c.fp + c.fn) > 0 ? c.tp / (c.tp + 0.5 * c.fp + 0.5 * c.fn) : 1.0;
        if (std::abs(tversky_index(c, {0.5, 0.5, 1.0}) - want) > 1e-12)
            return "binary TI != TP/(TP + FP/2 + FN/2)";
    }

    for (int rep = 0; rep < 20; ++rep) {
        const TverskyComponents c{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0),
                                  rng.uniform(0.0, 4.0)};
        const TverskyParams g1{0.6, 0.4, 1.0};
        if (focal_tversky_loss(c, g1) != 1.0 - tversky_index(c, g1))
            return "FTL(gamma = 1) must equal 1 - TI exactly";
    }

    const TverskyComponents c075{3.0, 2.0, 0.0};  // TI = 0.75 at alpha = 0.5
    const TverskyParams p075{0.5, 0.5, 0.75};
    if (std::abs(tversky_index(c075, p075) - 0.75) > 1e-15) return "TI fixture broken";
    if (std::abs(focal_tversky_loss(c075, p075) - std::pow(0.25, 0.75)) > 1e-12)
        return "FTL(0.75, gamma 0.75) != 0.25^0.75";
    return {};
}

// ---------- 4. SNR calibration ----------

std::string check_snr() {
    Rng gen(14);
    for (int rep = 0; rep < 20; ++rep) {
        Waveform x, n;
        x.sample_rate_hz = n.sample_rate_hz = 8000;
        x.samples.resize(8000);
        n.samples.resize(12000);
        for (double& s : x.samples) s = gen.uniform(-0.4, 0.4);
        for (double& s : n.samples) s = gen.uniform(-0.4, 0.4);
        for (double target : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
            Rng rng(static_cast<std::uint64_t>(rep) * 100 + static_cast<std::uint64_t>(target + 50));
            const Waveform y = add_noise_at_snr(x, n, target, rng);
            const double got = measured_snr_db(x, y);
            if (std::abs(got - target) > 0.1)
                return "target " + std::to_string(target) + " measured " + std::to_string(got);
        }
    }
    return {};
}

// ---------- 5. landmark invariance ----------

std::string check_landmarks() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(15);
    LandmarkParams lp;
    lp.dt_min = 1;
    lp.dt_max = 400;
    lp.df_max = 200;
    lp.fanout = 16;

    int fixtures = 0;
    while (fixtures < 1000) {
        std::vector<Peak> base;
        std::set<std::pair<int, int>> used;
        for (int i = 0; i < 8; ++i) {
            const int t = static_cast<int>(rng.below(240));
            const int f = 20 + static_cast<int>(rng.below(60));
            if (used.insert({t, f}).second) base.push_back({t, f, 1.0});
        }
        std::sort(base.begin(), base.end(), [](const Peak& a, const Peak& b) {
            return std::pair(a.t, a.f) < std::pair(b.t, b.f);
        });
        PeakSet ps;
        ps.frames = 1000;
        ps.bins = 200;
        ps.peaks = base;

        const int shift = static_cast<int>(rng.below(30)) - 15;
        PeakSet shifted = ps;
        for (Peak& p : shifted.peaks) p.f += shift;

        const auto ta = build_triplets(ps, lp);
        const auto tb = build_triplets(shifted, lp);
        if (ta.size() != tb.size()) return "triplet count changed under pitch shift";
        for (std::size_t i = 0; i < ta.size(); ++i) {
            if (ta[i].df12 != tb[i].df12 || ta[i].df23 != tb[i].df23 ||
                ta[i].time_ratio != tb[i].time_ratio || ta[i].span != tb[i].span)
                return "triplet invariant fields changed under pitch shift";
        }
        const auto qa = build_quads(ps, lp);
        const auto qb = build_quads(shifted, lp);
        if (qa.size() != qb.size()) return "quad count changed under pitch shift";
        for (std::size_t i = 0; i < qa.size(); ++i) {
            if (qa[i].cx != qb[i].cx || qa[i].cy != qb[i].cy || qa[i].dx != qb[i].dx ||
                qa[i].dy != qb[i].dy)
                return "quad coords changed under pitch shift";
        }

        // time scaling: the ratio moves by at most 2 / scaled span
        for (const TripletHash& h : ta) {
            for (double s : {0.8, 1.0, 1.2}) {
                const int t1 = h.anchor_t;
                const int t2 = h.anchor_t + static_cast<int>(std::lround(h.time_ratio * h.span));
                const int t3 = h.anchor_t + h.span;
                const auto s1 = static_cast<int>(std::lround(s * t1));
                const auto s2 = static_cast<int>(std::lround(s * t2));
                const auto s3 = static_cast<int>(std::lround(s * t3));
                if (s1 >= s2 || s2 >= s3) continue;
                const double r_scaled = static_cast<double>(s2 - s1) / (s3 - s1);
                const double r_ref = static_cast<double>(t2 - t1) / (t3 - t1);
                if (std::abs(r_scaled - r_ref) > 2.0 / (s3 - s1))
                    return "time-scaled ratio drifted past 2/span";
            }
            ++fixtures;
        }
        fixtures += static_cast<int>(qa.size());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 5.0) return "runtime " + std::to_string(secs) + " s exceeds 5 s";
    return {};
}

// ---------- 6. convolution and filter calibration ----------

std::string check_conv_filter() {
    Rng rng(16);
    Waveform x;
    x.sample_rate_hz = 8000;
    x.samples.resize(4096);
    for (double& s : x.samples) s = rng.uniform(-0.5, 0.5);
    Waveform delta;
    delta.sample_rate_hz = 8000;
    delta.samples = {1.0};
    const Waveform y = convolve_ir(x, delta);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        if (std::abs(y.samples[i] - x.samples[i]) > 1e-12)
            return "identity convolution drifted past 1e-12";

    // -3 dB point of both filter kinds, measured on steady-state sines
    for (const bool highpass : {true, false}) {
        const double fc = highpass ? 100.0 : 150.0;
        const Waveform probe = sine(fc, 3.0, 44100, 0.5);
        const Waveform filtered =
            first_order_filter(probe, highpass ? FilterKind::highpass : FilterKind::lowpass, fc);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 44100; i < probe.samples.size(); ++i) {
            num += filtered.samples[i] * filtered.samples[i];
            den += probe.samples[i] * probe.samples[i];
        }
        const double db = 10.0 * std::log10(num / den);
        if (std::abs(db - (-3.0103)) > 0.5)
            return std::string(highpass ? "highpass" : "lowpass") + " cutoff at " +
                   std::to_string(db) + " dB (want -3.01 +/- 0.5)";
    }
    return {};
}

// ---------- 7. identification desk benchmark ----------

std::string check_identification() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path corpus = fs::temp_directory_path() / "afp_accept_corpus";
    const fs::path out = fs::temp_directory_path() / "afp_accept_out";
    fs::remove_all(corpus);
    fs::remove_all(out);

    ExperimentConfig cfg;
    cfg.corpus_dir = corpus.string();
    cfg.output_dir = out.string();
    cfg.pipelines = {"bn_light", "bn_medium", "bn_hard", "complete_light", "complete_hard"};
    cfg.seed = 2024;
    cfg.jobs = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    cfg.queries_per_track = 1;

    write_synth_corpus(cfg.corpus_dir, 100, 12.0, 44100, 555);
    const Manifest m = cmd_segment(cfg);
    const FingerprintIndex idx = cmd_index(cfg, m);
    const auto rows = cmd_identify_bench(cfg, m, idx);
    write_identify_report(rows, cfg.output_dir);

    fs::remove_all(corpus);
    fs::remove_all(out);
    std::ostringstream summary;
    for (const auto& r : rows)
        summary << " " << r.pipeline << "=" << r.accuracy << "(" << r.n_queries << ")";
    const std::string detail = summary.str();

    if (rows.size() != 6) return "expected clean + 5 conditions, got" + detail;
    for (const auto& r : rows)
        if (r.n_queries < 100) return "fewer than 100 queries per condition:" + detail;
    if (rows[0].pipeline != "clean" || rows[0].accuracy < 0.99)
        return "clean top-1 below 0.99:" + detail;
    const double light = rows[1].accuracy, medium = rows[2].accuracy, hard = rows[3].accuracy;
    if (!(light >= medium && medium >= hard))
        return "accuracy not non-increasing light -> medium -> hard:" + detail;
    if (rows[5].accuracy > rows[4].accuracy)
        return "complete_hard accuracy above complete_light:" + detail;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= 900.0) return "runtime " + std::to_string(secs) + " s exceeds 15 min";
    std::printf("       identification:%s in %.0f s\n", detail.c_str(), secs);
    return {};
}

// ---------- 8. denoiser directional check ----------

std::string check_denoiser_direction() {
    PipelineConfig cfg;
    cfg.bins_per_octave = 24;
    cfg.stage.time_slab_frames = 86;
    const CqtKernel kernel(CqtParams{});
    const SpectralSubtractionDenoiser specsub;
    const IdentityDenoiser identity;

    int wins = 0;
    const int n_fixtures = 50;
    for (int i = 0; i < n_fixtures; ++i) {
        const Waveform clean = synth_track(7000 + i, 3.0, 5512);
        const Waveform noise = synth_noise(300 + i, NoiseColor::white, 3.5, 5512);
        Rng rng(90 + i);
        const Waveform noisy = add_noise_at_snr(clean, noise, 0.0, rng);

        const Spectrogram clean_cqt = kernel.apply(clean);
        const Spectrogram noisy_cqt = kernel.apply(noisy);

        // identity insertion must be bit-identical to no insertion
        const Spectrogram through = identity.denoise(noisy_cqt);
        if (through.values != noisy_cqt.values) return "identity denoiser altered the spectrogram";
        const PipelineOutputs a = run_pipeline(noisy_cqt, cfg);
        const PipelineOutputs b = run_pipeline(through, cfg);
        if (a.stage2.values != b.stage2.values || a.final.peaks.size() != b.final.peaks.size())
            return "identity-denoiser pipeline output differs from the no-denoiser path";

        const PeakMask ref = mask_from_peaks(run_pipeline(clean_cqt, cfg).stage3);
        const double p_raw = peak_prf(mask_from_peaks(a.stage3), ref, 1).precision;
        const double p_den =
            peak_prf(mask_from_peaks(run_pipeline(specsub.denoise(noisy_cqt), cfg).stage3), ref, 1)
                .precision;
        if (p_den >= p_raw) ++wins;
    }
    if (wins < 40)
        return "spectral subtraction won only " + std::to_string(wins) + "/50 fixtures (need 40)";
    std::printf("       denoiser direction: %d/50 fixtures improved\n", wins);
    return {};
}

// ---------- 9. SSIM / DSSIM / PSNR ----------

std::string check_image_metrics() {
    Rng rng(17);
    const SsimParams p = make_ssim_params(1.0, 7);
    for (int rep = 0; rep < 100; ++rep) {
        Spectrogram a(14, 14), b(14, 14);
        for (double& v : a.values) v = rng.uniform(0.0, 1.0);
        for (double& v : b.values) v = rng.uniform(0.0, 1.0);
        if (std::abs(ssim(a, a, p) - 1.0) > 1e-12) return "ssim(x, x) != 1";
        if (std::abs(ssim(a, b, p) - ssim(b, a, p)) > 1e-12) return "ssim asymmetry beyond 1e-12";
        const double d = dssim(a, b, p);
        if (d < 0.0 || d > 1.0) return "dssim out of [0, 1]";
    }
    if (std::abs(psnr_from_mse(1.0, 0.01) - 20.0) > 1e-9) return "psnr(1, mse 0.01) != 20 dB";
    Spectrogram a(5, 5), b(5, 5);
    for (double& v : b.values) v = 0.1;
    const PsnrResult r = psnr(a, b, 1.0, PsnrMode::standard_mse);
    if (r.infinite || std::abs(r.db - 20.0) > 1e-9) return "matrix psnr != 20 dB";
    return {};
}

// ---------- 10. end-to-end reproducibility ----------

std::string check_reproducibility() {
    const fs::path corpus = fs::temp_directory_path() / "afp_accept_repro_corpus";
    fs::remove_all(corpus);
    write_synth_corpus(corpus.string(), 3, 11.0, 22050, 777);

    auto run = [&](const std::string& out_dir) {
        ExperimentConfig cfg;
        cfg.corpus_dir = corpus.string();
        cfg.output_dir = out_dir;
        cfg.augment_rate_hz = 22050;
        cfg.segment_seconds = 5.0;
        cfg.pipelines = {"none", "bn_hard", "reverb_bn"};
        cfg.denoiser = "specsub";
        cfg.seed = 31337;
        cfg.jobs = 4;
        const Manifest m = cmd_segment(cfg);
        save_manifest(m, out_dir + "/manifest.json");
        for (const auto& p : cfg.pipelines) cmd_augment(cfg, m, p);
        write_report(cmd_evaluate(cfg, m), cfg.output_dir);
    };
    const fs::path out_a = fs::temp_directory_path() / "afp_accept_runA";
    const fs::path out_b = fs::temp_directory_path() / "afp_accept_runB";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    run(out_a.string());
    run(out_b.string());

    for (const char* file : {"/report.csv", "/report.json", "/report_items.csv"})
        if (read_file(out_a.string() + file) != read_file(out_b.string() + file))
            return std::string("byte mismatch in ") + file;
    fs::remove_all(corpus);
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    return {};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"1. peak extraction equals the brute-force oracle (100x 50x50, <10 s)", check_peak_oracle},
        {"2. tolerance peak metrics equal the window-scan oracle (50 pairs + 3x3 cases)",
         check_prf_oracle},
        {"3. Tversky suite identities and reference parameters", check_tversky},
        {"4. SNR calibration within 0.1 dB over {-10,-5,0,5,10} dB", check_snr},
        {"5. landmark invariance under pitch shift and time scaling (1000 fixtures, <5 s)",
         check_landmarks},
        {"6. impulse convolution identity (1e-12) and -3 dB filter point (+/- 0.5 dB)",
         check_conv_filter},
        {"7. desk identification: clean >= 0.99, monotone under bn tiers, <15 min",
         check_identification},
        {"8. spectral subtraction >= identity precision on >= 80% of 50 fixtures",
         check_denoiser_direction},
        {"9. ssim/dssim identities and 20 dB PSNR fixture", check_image_metrics},
        {"10. augment + evaluate reruns are byte-identical", check_reproducibility},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            error = c.run();
        } catch (const std::exception& e) {
            error = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (error.empty()) {
            std::printf("[PASS] %s (%.1f s)\n", c.name.c_str(), secs);
        } else {
            std::printf("[FAIL] %s (%.1f s): %s\n", c.name.c_str(), secs, error.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
