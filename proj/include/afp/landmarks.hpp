#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/peaks.hpp"

namespace afp {

// Transformation-robust triplet hash. Frequency differences and the time
// ratio are unchanged by pitch translation; the ratio survives time scaling
// up to rounding. The coarse fields are the outer frequencies quantized to
// coarse_factor bins each.
struct TripletHash {
    int df12 = 0;        // f1 - f2
    int df23 = 0;        // f2 - f3
    int f1_coarse = 0;
    int f3_coarse = 0;
    double time_ratio = 0.0;  // (t2 - t1) / (t3 - t1), in (0, 1)
    int anchor_t = 0;
    int anchor_f = 0;
    int span = 0;  // t3 - t1, frames
};

// Four peaks (A root, B diagonal, C and D interior) with C and D expressed in
// the unit square spanned by A and B. Invariant to time scaling plus pitch
// translation in continuous coordinates.
struct QuadHash {
    double cx = 0.0, cy = 0.0, dx = 0.0, dy = 0.0;  // all in [0, 1]
    int anchor_t = 0;
    int anchor_f = 0;
    int span = 0;  // t_B - t_A, frames
};

struct LandmarkParams {
    int dt_min = 5;        // min span, frames
    int dt_max = 90;       // max span, frames
    int df_max = 36;       // max |f - anchor_f| for companions, bins
    int fanout = 8;        // max landmarks per anchor
    int coarse_factor = 8; // bins per coarse frequency step (beta / 3)
};

inline void validate(const LandmarkParams& p) {
    if (p.dt_min < 1 || p.dt_max < p.dt_min) throw InvalidInput("landmarks: bad span window");
    if (p.df_max < 0) throw InvalidInput("landmarks: df_max must be >= 0");
    if (p.fanout < 1) throw InvalidInput("landmarks: fanout must be >= 1");
    if (p.coarse_factor < 1) throw InvalidInput("landmarks: coarse factor must be >= 1");
}

// Peaks must be sorted by (t, f); pipeline output already is.
inline std::vector<TripletHash> build_triplets(const PeakSet& ps, const LandmarkParams& p) {
    validate(p);
    std::vector<TripletHash> out;
    const auto& pk = ps.peaks;
    for (std::size_t i = 0; i < pk.size(); ++i) {
        const Peak& a = pk[i];
        // companion pool: later peaks within the span and frequency windows
        std::vector<std::size_t> cand;
        for (std::size_t j = i + 1; j < pk.size(); ++j) {
            if (pk[j].t - a.t > p.dt_max) break;
            if (pk[j].t == a.t) continue;
            if (std::abs(pk[j].f - a.f) <= p.df_max) cand.push_back(j);
        }
        int emitted = 0;
        for (std::size_t u = 0; u < cand.size() && emitted < p.fanout; ++u) {
            for (std::size_t v = u + 1; v < cand.size() && emitted < p.fanout; ++v) {
                const Peak& b = pk[cand[u]];
                const Peak& c = pk[cand[v]];
                if (b.t >= c.t) continue;          // need t1 < t2 < t3
                if (c.t - a.t < p.dt_min) continue;
                TripletHash h;
                h.df12 = a.f - b.f;
                h.df23 = b.f - c.f;
                h.f1_coarse = a.f / p.coarse_factor;
                h.f3_coarse = c.f / p.coarse_factor;
                h.span = c.t - a.t;
                h.time_ratio = static_cast<double>(b.t - a.t) / h.span;
                h.anchor_t = a.t;
                h.anchor_f = a.f;
                out.push_back(h);
                ++emitted;
            }
        }
    }
    return out;
}

inline std::vector<QuadHash> build_quads(const PeakSet& ps, const LandmarkParams& p) {
    validate(p);
    std::vector<QuadHash> out;
    const auto& pk = ps.peaks;
    for (std::size_t ia = 0; ia < pk.size(); ++ia) {
        const Peak& a = pk[ia];
        int emitted = 0;
        for (std::size_t ib = ia + 1; ib < pk.size() && emitted < p.fanout; ++ib) {
            const Peak& b = pk[ib];
            const int span = b.t - a.t;
            if (span > p.dt_max) break;
            if (span < p.dt_min) continue;
            if (std::abs(b.f - a.f) > p.df_max) continue;
            if (b.f == a.f) continue;  // degenerate box
            const int f_lo = std::min(a.f, b.f), f_hi = std::max(a.f, b.f);

            std::vector<std::size_t> inner;
            for (std::size_t j = ia + 1; j < ib; ++j) {
                if (pk[j].t <= a.t || pk[j].t >= b.t) continue;
                if (pk[j].f < f_lo || pk[j].f > f_hi) continue;
                inner.push_back(j);
            }
            // C may equal D: a lone interior peak still forms a quad
            for (std::size_t u = 0; u < inner.size() && emitted < p.fanout; ++u) {
                for (std::size_t v = u; v < inner.size() && emitted < p.fanout; ++v) {
                    const Peak& c = pk[inner[u]];
                    const Peak& d = pk[inner[v]];
                    if (c.t > d.t) continue;
                    QuadHash h;
                    h.cx = static_cast<double>(c.t - a.t) / span;
                    h.cy = static_cast<double>(c.f - a.f) / (b.f - a.f);
                    h.dx = static_cast<double>(d.t - a.t) / span;
                    h.dy = static_cast<double>(d.f - a.f) / (b.f - a.f);
                    h.anchor_t = a.t;
                    h.anchor_f = a.f;
                    h.span = span;
                    out.push_back(h);
                    ++emitted;
                }
            }
        }
    }
    return out;
}

// --- key packing -------------------------------------------------------------

struct PackedKey {
    std::uint64_t value = 0;
};

inline bool operator==(const PackedKey& a, const PackedKey& b) { return a.value == b.value; }

// Bit widths of the quantized fields. The packed layouts, from the most
// significant bit:
//   quads    kind bit 63 = 0 | cx | cy | dx | dy | zero padding
//   triplets kind bit 63 = 1 | df12 (offset binary) | df23 | f1~ | f3~ |
//            ratio | zero padding
struct PackSpec {
    int quad_coord_bits = 8;
    int df_bits = 7;
    int coarse_bits = 6;
    int ratio_bits = 8;
};

namespace detail {

inline std::uint64_t quantize_unit(double x, int bits) {
    if (x < 0.0 || x > 1.0) throw RangeError("pack: unit-interval field out of range");
    const std::uint64_t levels = 1ULL << bits;
    const auto q = static_cast<std::uint64_t>(x * static_cast<double>(levels));
    return q >= levels ? levels - 1 : q;
}

inline std::uint64_t encode_signed(int x, int bits, const char* what) {
    const int half = 1 << (bits - 1);
    if (x < -half || x >= half) throw RangeError(std::string("pack: ") + what + " out of range");
    return static_cast<std::uint64_t>(x + half);
}

inline std::uint64_t encode_unsigned(int x, int bits, const char* what) {
    if (x < 0 || x >= (1 << bits)) throw RangeError(std::string("pack: ") + what + " out of range");
    return static_cast<std::uint64_t>(x);
}

}  // namespace detail

inline PackedKey pack_key(const QuadHash& h, const PackSpec& spec = {}) {
    const int b = spec.quad_coord_bits;
    std::uint64_t key = 0;  // kind bit stays 0
    int shift = 63 - b;
    for (double c : {h.cx, h.cy, h.dx, h.dy}) {
        key |= detail::quantize_unit(c, b) << shift;
        shift -= b;
    }
    return {key};
}

inline PackedKey pack_key(const TripletHash& h, const PackSpec& spec = {}) {
    std::uint64_t key = 1ULL << 63;
    int shift = 63;
    auto put = [&](std::uint64_t field, int bits) {
        shift -= bits;
        key |= field << shift;
    };
    put(detail::encode_signed(h.df12, spec.df_bits, "df12"), spec.df_bits);
    put(detail::encode_signed(h.df23, spec.df_bits, "df23"), spec.df_bits);
    put(detail::encode_unsigned(h.f1_coarse, spec.coarse_bits, "f1_coarse"), spec.coarse_bits);
    put(detail::encode_unsigned(h.f3_coarse, spec.coarse_bits, "f3_coarse"), spec.coarse_bits);
    put(detail::quantize_unit(h.time_ratio, spec.ratio_bits), spec.ratio_bits);
    return {key};
}

// --- indexable landmarks -------------------------------------------------------

enum class LandmarkKind : char { triplet = 't', quad = 'q' };

struct Landmark {
    PackedKey key;
    int anchor_t = 0;
    int anchor_f = 0;
    int span = 0;
    LandmarkKind kind = LandmarkKind::quad;
};

inline std::vector<Landmark> to_landmarks(const std::vector<TripletHash>& hs, const PackSpec& spec = {}) {
    std::vector<Landmark> out;
    out.reserve(hs.size());
    for (const auto& h : hs)
        out.push_back({pack_key(h, spec), h.anchor_t, h.anchor_f, h.span, LandmarkKind::triplet});
    return out;
}

inline std::vector<Landmark> to_landmarks(const std::vector<QuadHash>& hs, const PackSpec& spec = {}) {
    std::vector<Landmark> out;
    out.reserve(hs.size());
    for (const auto& h : hs)
        out.push_back({pack_key(h, spec), h.anchor_t, h.anchor_f, h.span, LandmarkKind::quad});
    return out;
}

inline void write_landmarks_csv(const std::string& path, const std::vector<Landmark>& ls) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("landmarks: cannot write " + path);
    out << "kind,key_hex,anchor_t,anchor_f,span\n";
    char line[96];
    for (const Landmark& l : ls) {
        std::snprintf(line, sizeof(line), "%c,%016llx,%d,%d,%d\n", static_cast<char>(l.kind),
                      static_cast<unsigned long long>(l.key.value), l.anchor_t, l.anchor_f, l.span);
        out << line;
    }
}

}  // namespace afp
