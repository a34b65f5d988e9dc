#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "afp/errors.hpp"

namespace afp {

// Dense non-negative magnitude matrix, time-major: row = analysis frame,
// column = frequency bin.
struct Spectrogram {
    int frames = 0;
    int bins = 0;
    std::vector<double> values;  // frames * bins, row-major
    double sample_rate_hz = 0.0;
    int hop_samples = 0;
    std::string source_id;

    Spectrogram() = default;
    Spectrogram(int t, int f, double rate = 0.0, int hop = 0)
        : frames(t), bins(f), values(static_cast<std::size_t>(t) * f, 0.0),
          sample_rate_hz(rate), hop_samples(hop) {}

    double& at(int t, int f) { return values[static_cast<std::size_t>(t) * bins + f]; }
    double at(int t, int f) const { return values[static_cast<std::size_t>(t) * bins + f]; }

    bool same_shape(const Spectrogram& o) const { return frames == o.frames && bins == o.bins; }

    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

inline void validate(const Spectrogram& s) {
    if (s.frames <= 0 || s.bins <= 0) throw InvalidInput("spectrogram: empty dimensions");
    if (s.values.size() != static_cast<std::size_t>(s.frames) * s.bins)
        throw InvalidInput("spectrogram: value buffer does not match dimensions");
    for (double v : s.values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidInput("spectrogram: values must be finite and non-negative");
}

// --- SPG1 binary format -----------------------------------------------------
// magic "SPG1" | u32 time_frames | u32 freq_bins | f64 sample_rate | u32 hop |
// row-major f32 values (time-major). All fields little-endian.

inline void write_spg1(const std::string& path, const Spectrogram& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("spg1: cannot write " + path);
    out.write("SPG1", 4);
    const std::uint32_t t = static_cast<std::uint32_t>(s.frames);
    const std::uint32_t f = static_cast<std::uint32_t>(s.bins);
    const double rate = s.sample_rate_hz;
    const std::uint32_t hop = static_cast<std::uint32_t>(s.hop_samples);
    out.write(reinterpret_cast<const char*>(&t), 4);
    out.write(reinterpret_cast<const char*>(&f), 4);
    out.write(reinterpret_cast<const char*>(&rate), 8);
    out.write(reinterpret_cast<const char*>(&hop), 4);
    std::vector<float> buf(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) buf[i] = static_cast<float>(s.values[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw FormatError("spg1: write failed for " + path);
}

inline Spectrogram read_spg1(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("spg1: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SPG1", 4) != 0)
        throw FormatError("spg1: bad magic in " + path);
    std::uint32_t t = 0, f = 0, hop = 0;
    double rate = 0.0;
    if (!in.read(reinterpret_cast<char*>(&t), 4) || !in.read(reinterpret_cast<char*>(&f), 4) ||
        !in.read(reinterpret_cast<char*>(&rate), 8) || !in.read(reinterpret_cast<char*>(&hop), 4))
        throw FormatError("spg1: truncated header in " + path);
    if (t == 0 || f == 0) throw FormatError("spg1: empty dimensions in " + path);
    Spectrogram s(static_cast<int>(t), static_cast<int>(f), rate, static_cast<int>(hop));
    std::vector<float> buf(s.values.size());
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float))))
        throw FormatError("spg1: truncated data in " + path);
    for (std::size_t i = 0; i < buf.size(); ++i) s.values[i] = static_cast<double>(buf[i]);
    // file stem doubles as the source id for file-backed lookups
    const auto slash = path.find_last_of("/\\");
    std::string stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const auto dot = stem.rfind(".spg1");
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    s.source_id = stem;
    return s;
}

}  // namespace afp
