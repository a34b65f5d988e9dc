#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace afp {

// Seedable, portable random generators. Everything here is fully specified
// (no std:: distributions, whose outputs vary across standard libraries), so
// a (seed, item) pair reproduces bit-identical streams on any platform and
// can be re-implemented in another language from this file alone.
//
//   - splitmix64: seeding / mixing function (Steele, Lea, Flood 2014).
//   - xoshiro256**: main generator (Blackman & Vigna 2018).
//   - Per-item streams: state seeded from splitmix64 over
//     mix64(master_seed) xor mix64(item_id * GOLDEN), see derive_stream().

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Collapses (master seed, item id) into one stream seed.
inline std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t item_id) {
    std::uint64_t a = master_seed;
    std::uint64_t b = item_id * 0x9E3779B97F4A7C15ULL + 1;
    return splitmix64_next(a) ^ splitmix64_next(b);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    static Rng for_item(std::uint64_t master_seed, std::uint64_t item_id) {
        return Rng(derive_stream(master_seed, item_id));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
    // the ranges used here (corpus sizes, sample counts), but we reject anyway
    // to keep the stream definition exact.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Marsaglia polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace afp
