#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "afp/resample.hpp"
#include "afp/rng.hpp"
#include "afp/wav.hpp"
#include "afp/waveform.hpp"

using namespace afp;

namespace {

Waveform sine(double freq, double seconds, int rate, double amp = 0.5) {
    Waveform w;
    w.sample_rate_hz = rate;
    const std::size_t n = static_cast<std::size_t>(seconds * rate);
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate);
    return w;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("wav round-trip preserves samples") {
    Waveform w = sine(440.0, 0.25, 22050, 0.7);

    SECTION("pcm16") {
        const auto path = temp_path("afp_rt16.wav");
        write_wav(path, w, WavEncoding::pcm16);
        const Waveform r = read_wav(path);
        REQUIRE(r.sample_rate_hz == 22050);
        REQUIRE(r.samples.size() == w.samples.size());
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            REQUIRE(r.samples[i] == Catch::Approx(w.samples[i]).margin(1.0 / 32768.0));
        std::filesystem::remove(path);
    }

    SECTION("float32 is lossless at float precision") {
        const auto path = temp_path("afp_rt32.wav");
        write_wav(path, w, WavEncoding::float32);
        const Waveform r = read_wav(path);
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            REQUIRE(r.samples[i] == Catch::Approx(w.samples[i]).margin(1e-7));
        std::filesystem::remove(path);
    }
}

TEST_CASE("wav reader downmixes stereo to the channel mean") {
    // hand-built stereo file: L = 0.5, R = -0.5 -> mono 0
    const auto path = temp_path("afp_stereo.wav");
    {
        std::vector<unsigned char> b;
        auto u32 = [&](std::uint32_t x) {
            for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(x >> (8 * i)));
        };
        auto u16 = [&](std::uint16_t x) {
            b.push_back(static_cast<unsigned char>(x & 0xFF));
            b.push_back(static_cast<unsigned char>(x >> 8));
        };
        const char* hdr = "RIFF";
        b.insert(b.end(), hdr, hdr + 4);
        u32(36 + 16);
        const char* wf = "WAVEfmt ";
        b.insert(b.end(), wf, wf + 8);
        u32(16);
        u16(1);
        u16(2);
        u32(8000);
        u32(8000 * 4);
        u16(4);
        u16(16);
        const char* dc = "data";
        b.insert(b.end(), dc, dc + 4);
        u32(16);
        for (int i = 0; i < 4; ++i) {
            u16(static_cast<std::uint16_t>(16384));                       // L
            u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(-16384)));  // R
        }
        std::ofstream f(path, std::ios::binary);
        f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    }
    const Waveform r = read_wav(path);
    REQUIRE(r.samples.size() == 4);
    for (double s : r.samples) REQUIRE(s == Catch::Approx(0.0).margin(1e-9));
    std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects garbage") {
    const auto path = temp_path("afp_bad.wav");
    {
        std::ofstream f(path, std::ios::binary);
        f << "this is not a wav file";
    }
    REQUIRE_THROWS_AS(read_wav(path), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("resample at the identity rate returns identical samples") {
    const Waveform w = sine(440.0, 0.2, 44100);
    const Waveform r = resample(w, 44100);
    REQUIRE(r.samples == w.samples);
}

TEST_CASE("resample preserves DC exactly") {
    Waveform w;
    w.sample_rate_hz = 44100;
    w.samples.assign(44100, 0.5);
    const Waveform r = resample(w, 5512);
    REQUIRE(r.sample_rate_hz == 5512);
    for (double s : r.samples) REQUIRE(s == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("resample preserves duration within one sample period") {
    const Waveform w = sine(1000.0, 1.0, 44100);
    const Waveform r = resample(w, 5512);
    const double got = static_cast<double>(r.samples.size()) / 5512.0;
    REQUIRE(std::abs(got - 1.0) <= 1.0 / 5512.0);
}

TEST_CASE("resample keeps a mid-band sine's amplitude") {
    const Waveform w = sine(1000.0, 1.0, 44100, 0.5);
    const Waveform r = resample(w, 5512);
    // steady-state rms of a 0.5-amplitude sine is 0.3536
    double acc = 0.0;
    const std::size_t skip = 200;
    for (std::size_t i = skip; i + skip < r.samples.size(); ++i) acc += r.samples[i] * r.samples[i];
    const double got = std::sqrt(acc / static_cast<double>(r.samples.size() - 2 * skip));
    REQUIRE(got == Catch::Approx(0.5 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("resample rejects nonpositive rates") {
    const Waveform w = sine(440.0, 0.1, 8000);
    REQUIRE_THROWS_AS(resample(w, 0), InvalidInput);
}

TEST_CASE("rng streams are deterministic and well-ranged") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) REQUIRE(c.below(17) < 17);

    // distinct items give distinct streams
    Rng d = Rng::for_item(99, 0);
    Rng e = Rng::for_item(99, 1);
    bool differs = false;
    for (int i = 0; i < 8; ++i) differs |= d.next_u64() != e.next_u64();
    REQUIRE(differs);
}

TEST_CASE("waveform helpers") {
    Waveform w;
    w.sample_rate_hz = 8000;
    w.samples = {0.3, -0.4, 0.0};
    REQUIRE(rms(w) == Catch::Approx(std::sqrt(0.25 / 3.0)));
    REQUIRE(peak_abs(w) == Catch::Approx(0.4));
    REQUIRE_NOTHROW(validate(w));
    w.samples.push_back(std::numeric_limits<double>::quiet_NaN());
    REQUIRE_THROWS_AS(validate(w), InvalidInput);
}
