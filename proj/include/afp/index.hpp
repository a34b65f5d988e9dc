#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "afp/errors.hpp"
#include "afp/landmarks.hpp"

namespace afp {

struct Posting {
    std::uint32_t track_id = 0;
    std::uint32_t anchor_t = 0;
};

inline bool operator==(const Posting& a, const Posting& b) {
    return a.track_id == b.track_id && a.anchor_t == b.anchor_t;
}

struct TrackInfo {
    std::string title;
    std::uint32_t n_frames = 0;
};

// Inverted index from packed landmark keys to postings. Build with
// index_track (single writer), then query through const references only;
// the API has no mutating query path.
struct FingerprintIndex {
    std::unordered_map<std::uint64_t, std::vector<Posting>> buckets;
    std::map<std::uint32_t, TrackInfo> catalog;

    std::size_t posting_count() const {
        std::size_t n = 0;
        for (const auto& [key, posts] : buckets) n += posts.size();
        return n;
    }
};

inline void index_track(FingerprintIndex& idx, std::uint32_t track_id, const TrackInfo& info,
                        const std::vector<Landmark>& landmarks) {
    if (idx.catalog.count(track_id)) throw ConflictError("index: duplicate track id");
    idx.catalog[track_id] = info;
    for (const Landmark& l : landmarks)
        idx.buckets[l.key.value].push_back({track_id, static_cast<std::uint32_t>(l.anchor_t)});
}

struct MatchResult {
    std::int64_t track_id = -1;
    int score = 0;           // tallest offset-histogram bin
    int offset_frames = 0;   // reference anchor minus query anchor
    bool matched = false;
};

struct MatchParams {
    int min_votes = 5;
    int offset_smear = 1;  // a vote also lands in this many adjacent bins
};

// Shazam-style time-offset voting. Every (query landmark, posting) pair under
// the same key votes for offset = posting.anchor - query.anchor, smeared over
// adjacent bins to tolerate frame jitter. Results sorted by score descending,
// ties by ascending track id.
inline std::vector<MatchResult> query(const FingerprintIndex& idx,
                                      const std::vector<Landmark>& landmarks,
                                      const MatchParams& mp = {}) {
    std::unordered_map<std::uint32_t, std::unordered_map<int, int>> votes;
    for (const Landmark& l : landmarks) {
        const auto it = idx.buckets.find(l.key.value);
        if (it == idx.buckets.end()) continue;
        for (const Posting& post : it->second) {
            const int offset = static_cast<int>(post.anchor_t) - l.anchor_t;
            ++votes[post.track_id][offset];
        }
    }

    std::vector<MatchResult> results;
    results.reserve(votes.size());
    for (const auto& [track_id, raw] : votes) {
        std::unordered_map<int, int> smeared;
        for (const auto& [offset, count] : raw)
            for (int d = -mp.offset_smear; d <= mp.offset_smear; ++d) smeared[offset + d] += count;
        MatchResult r;
        r.track_id = track_id;
        // tie-break: prefer the bin with the most exact votes, then the
        // smallest offset, so a jitter-free match reports its true offset
        int best_raw = -1;
        for (const auto& [offset, count] : smeared) {
            const auto raw_it = raw.find(offset);
            const int raw_here = raw_it == raw.end() ? 0 : raw_it->second;
            if (count > r.score || (count == r.score && raw_here > best_raw) ||
                (count == r.score && raw_here == best_raw && offset < r.offset_frames)) {
                r.score = count;
                r.offset_frames = offset;
                best_raw = raw_here;
            }
        }
        r.matched = r.score >= mp.min_votes;
        results.push_back(r);
    }
    std::sort(results.begin(), results.end(), [](const MatchResult& a, const MatchResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.track_id < b.track_id;
    });
    return results;
}

inline MatchResult best_match(const FingerprintIndex& idx, const std::vector<Landmark>& landmarks,
                              const MatchParams& mp = {}) {
    auto results = query(idx, landmarks, mp);
    if (results.empty()) return MatchResult{};
    return results.front();
}

// --- FPX1 persistence ---------------------------------------------------------
// magic "FPX1" | u16 version | u32 track count | tracks (u32 id, u32 frames,
// u16 title len, title) | u64 bucket count | buckets sorted by key (u64 key,
// u32 posting count, postings as u32 id + u32 anchor) | u32 CRC32 of all
// preceding bytes. Little-endian throughout.

namespace detail {

inline std::uint32_t crc32_update(std::uint32_t crc, const unsigned char* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc = ~crc;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return ~crc;
}

struct ByteWriter {
    std::vector<unsigned char> bytes;

    void raw(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        bytes.insert(bytes.end(), c, c + n);
    }
    void u16(std::uint16_t x) { raw(&x, 2); }
    void u32(std::uint32_t x) { raw(&x, 4); }
    void u64(std::uint64_t x) { raw(&x, 8); }
};

struct ByteReader {
    const unsigned char* p;
    std::size_t left;

    void raw(void* out, std::size_t n) {
        if (n > left) throw FormatError("fpx1: truncated file");
        std::memcpy(out, p, n);
        p += n;
        left -= n;
    }
    std::uint16_t u16() { std::uint16_t x; raw(&x, 2); return x; }
    std::uint32_t u32() { std::uint32_t x; raw(&x, 4); return x; }
    std::uint64_t u64() { std::uint64_t x; raw(&x, 8); return x; }
};

}  // namespace detail

inline void save_index(const FingerprintIndex& idx, const std::string& path) {
    detail::ByteWriter w;
    w.raw("FPX1", 4);
    w.u16(1);
    w.u32(static_cast<std::uint32_t>(idx.catalog.size()));
    for (const auto& [id, info] : idx.catalog) {
        w.u32(id);
        w.u32(info.n_frames);
        w.u16(static_cast<std::uint16_t>(info.title.size()));
        w.raw(info.title.data(), info.title.size());
    }
    std::vector<std::uint64_t> keys;
    keys.reserve(idx.buckets.size());
    for (const auto& [key, posts] : idx.buckets) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    w.u64(keys.size());
    for (std::uint64_t key : keys) {
        const auto& posts = idx.buckets.at(key);
        w.u64(key);
        w.u32(static_cast<std::uint32_t>(posts.size()));
        for (const Posting& post : posts) {
            w.u32(post.track_id);
            w.u32(post.anchor_t);
        }
    }
    const std::uint32_t crc = detail::crc32_update(0, w.bytes.data(), w.bytes.size());
    w.u32(crc);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("fpx1: cannot write " + path);
    out.write(reinterpret_cast<const char*>(w.bytes.data()),
              static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw FormatError("fpx1: write failed for " + path);
}

inline FingerprintIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("fpx1: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 4 + 2 + 4) throw FormatError("fpx1: truncated file");
    if (std::memcmp(bytes.data(), "FPX1", 4) != 0) throw FormatError("fpx1: bad magic");

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
    const std::uint32_t crc = detail::crc32_update(0, bytes.data(), bytes.size() - 4);
    if (crc != stored_crc) throw FormatError("fpx1: CRC mismatch");

    detail::ByteReader r{bytes.data() + 4, bytes.size() - 8};
    FingerprintIndex idx;
    const std::uint16_t version = r.u16();
    if (version != 1) throw FormatError("fpx1: unsupported version");
    const std::uint32_t n_tracks = r.u32();
    for (std::uint32_t i = 0; i < n_tracks; ++i) {
        const std::uint32_t id = r.u32();
        TrackInfo info;
        info.n_frames = r.u32();
        const std::uint16_t len = r.u16();
        info.title.resize(len);
        r.raw(info.title.data(), len);
        idx.catalog[id] = info;
    }
    const std::uint64_t n_buckets = r.u64();
    for (std::uint64_t i = 0; i < n_buckets; ++i) {
        const std::uint64_t key = r.u64();
        const std::uint32_t n_posts = r.u32();
        auto& posts = idx.buckets[key];
        posts.resize(n_posts);
        for (std::uint32_t j = 0; j < n_posts; ++j) {
            posts[j].track_id = r.u32();
            posts[j].anchor_t = r.u32();
        }
    }
    if (r.left != 0) throw FormatError("fpx1: trailing bytes");
    return idx;
}

}  // namespace afp
