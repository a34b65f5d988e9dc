#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/waveform.hpp"

namespace afp {

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xFF));
    v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
    v.push_back(static_cast<unsigned char>((x >> 16) & 0xFF));
    v.push_back(static_cast<unsigned char>((x >> 24) & 0xFF));
}

inline void put_u16le(std::vector<unsigned char>& v, std::uint16_t x) {
    v.push_back(static_cast<unsigned char>(x & 0xFF));
    v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
}

}  // namespace detail

// Reads a RIFF/WAVE file. Supports PCM 16-bit and IEEE float 32-bit; stereo
// (or more channels) is downmixed to mono by averaging channels.
inline Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("wav: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw FormatError("wav: not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_len = detail::read_u32le(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_len > bytes.size()) throw FormatError("wav: truncated chunk in " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw FormatError("wav: short fmt chunk in " + path);
            format = detail::read_u16le(bytes.data() + body);
            channels = detail::read_u16le(bytes.data() + body + 2);
            rate = detail::read_u32le(bytes.data() + body + 4);
            bits = detail::read_u16le(bytes.data() + body + 14);
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }
    if (!data || channels == 0 || rate == 0) throw FormatError("wav: missing fmt/data chunk in " + path);

    const bool pcm16 = (format == 1 && bits == 16);
    const bool f32 = (format == 3 && bits == 32);
    if (!pcm16 && !f32)
        throw FormatError("wav: unsupported encoding (need PCM16 or float32) in " + path);

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frame_size = bytes_per_sample * channels;
    const std::size_t n_frames = data_len / frame_size;

    Waveform w;
    w.sample_rate_hz = static_cast<int>(rate);
    w.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + i * frame_size + c * bytes_per_sample;
            if (pcm16) {
                std::int16_t s;
                std::memcpy(&s, p, 2);
                acc += static_cast<double>(s) / 32768.0;
            } else {
                float s;
                std::memcpy(&s, p, 4);
                acc += static_cast<double>(s);
            }
        }
        w.samples[i] = acc / channels;
    }
    return w;
}

enum class WavEncoding { pcm16, float32 };

inline void write_wav(const std::string& path, const Waveform& w,
                      WavEncoding enc = WavEncoding::pcm16) {
    const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
    const std::uint16_t bits = (enc == WavEncoding::pcm16) ? 16 : 32;
    const std::uint32_t data_len = n * (bits / 8);

    std::vector<unsigned char> out;
    out.reserve(44 + data_len);
    const char* riff = "RIFF";
    out.insert(out.end(), riff, riff + 4);
    detail::put_u32le(out, 36 + data_len);
    const char* wavefmt = "WAVEfmt ";
    out.insert(out.end(), wavefmt, wavefmt + 8);
    detail::put_u32le(out, 16);
    detail::put_u16le(out, enc == WavEncoding::pcm16 ? 1 : 3);
    detail::put_u16le(out, 1);  // mono
    detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz));
    detail::put_u32le(out, static_cast<std::uint32_t>(w.sample_rate_hz) * (bits / 8));
    detail::put_u16le(out, bits / 8);
    detail::put_u16le(out, bits);
    const char* datach = "data";
    out.insert(out.end(), datach, datach + 4);
    detail::put_u32le(out, data_len);
    for (std::size_t i = 0; i < n; ++i) {
        if (enc == WavEncoding::pcm16) {
            const long code = std::lround(std::clamp(w.samples[i], -1.0, 1.0) * 32768.0);
            const auto s = static_cast<std::int16_t>(std::clamp<long>(code, -32768, 32767));
            detail::put_u16le(out, static_cast<std::uint16_t>(s));
        } else {
            const float s = static_cast<float>(w.samples[i]);
            unsigned char b[4];
            std::memcpy(b, &s, 4);
            out.insert(out.end(), b, b + 4);
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("wav: cannot write " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace afp
