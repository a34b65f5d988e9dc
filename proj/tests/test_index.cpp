#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "afp/engine.hpp"
#include "afp/index.hpp"
#include "afp/rng.hpp"
#include "afp/synth.hpp"

using namespace afp;

namespace {

std::vector<Landmark> random_landmarks(Rng& rng, int n) {
    std::vector<Landmark> out;
    for (int i = 0; i < n; ++i) {
        Landmark l;
        l.key.value = rng.next_u64() >> 20;  // collisions are likely, good
        l.anchor_t = static_cast<int>(rng.below(800));
        l.anchor_f = static_cast<int>(rng.below(117));
        l.span = 10 + static_cast<int>(rng.below(80));
        out.push_back(l);
    }
    return out;
}

}  // namespace

TEST_CASE("index_track bookkeeping") {
    FingerprintIndex idx;
    SECTION("empty landmark list still registers the track") {
        index_track(idx, 1, {"silent", 100}, {});
        REQUIRE(idx.catalog.count(1) == 1);
        REQUIRE(idx.posting_count() == 0);
    }
    SECTION("one landmark, one posting") {
        Landmark l;
        l.key.value = 42;
        l.anchor_t = 7;
        index_track(idx, 2, {"one", 50}, {l});
        REQUIRE(idx.buckets.at(42).size() == 1);
        REQUIRE(idx.buckets.at(42)[0].track_id == 2);
        REQUIRE(idx.buckets.at(42)[0].anchor_t == 7);
    }
    SECTION("N landmarks produce N postings") {
        Rng rng(1);
        const auto ls = random_landmarks(rng, 500);
        index_track(idx, 3, {"many", 900}, ls);
        REQUIRE(idx.posting_count() == 500);
    }
    SECTION("duplicate track id conflicts") {
        index_track(idx, 4, {"a", 1}, {});
        REQUIRE_THROWS_AS(index_track(idx, 4, {"b", 1}, {}), ConflictError);
    }
}

TEST_CASE("query: self-match ranks first at offset zero") {
    Rng rng(2);
    FingerprintIndex idx;
    const auto a = random_landmarks(rng, 300);
    const auto b = random_landmarks(rng, 300);
    index_track(idx, 10, {"a", 900}, a);
    index_track(idx, 11, {"b", 900}, b);

    const auto results = query(idx, a);
    REQUIRE(!results.empty());
    REQUIRE(results[0].track_id == 10);
    REQUIRE(results[0].offset_frames == 0);
    REQUIRE(results[0].matched);
}

TEST_CASE("query: disjoint landmarks do not match") {
    Rng rng(3);
    FingerprintIndex idx;
    auto a = random_landmarks(rng, 100);
    for (auto& l : a) l.key.value |= 1ULL << 62;  // keyspace A
    auto q = random_landmarks(rng, 100);
    for (auto& l : q) l.key.value &= ~(1ULL << 62);  // keyspace B
    index_track(idx, 1, {"a", 900}, a);
    for (const auto& r : query(idx, q)) REQUIRE(!r.matched);
}

TEST_CASE("query: shifted anchors report the negated offset at full score") {
    Rng rng(4);
    FingerprintIndex idx;
    const auto a = random_landmarks(rng, 200);
    index_track(idx, 5, {"a", 2000}, a);

    const auto self_score = query(idx, a)[0].score;

    auto shifted = a;
    for (auto& l : shifted) l.anchor_t += 50;
    const auto results = query(idx, shifted);
    REQUIRE(results[0].track_id == 5);
    REQUIRE(results[0].offset_frames == -50);
    REQUIRE(results[0].score == self_score);
}

TEST_CASE("query: removing landmarks never raises a score") {
    Rng rng(5);
    FingerprintIndex idx;
    const auto a = random_landmarks(rng, 150);
    index_track(idx, 1, {"a", 900}, a);

    auto q = a;
    int prev = query(idx, q)[0].score;
    while (q.size() > 10) {
        q.resize(q.size() - 20);
        const auto r = query(idx, q);
        const int cur = r.empty() ? 0 : r[0].score;
        REQUIRE(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("query determinism") {
    Rng rng(6);
    FingerprintIndex idx;
    for (std::uint32_t id = 0; id < 5; ++id) {
        const auto ls = random_landmarks(rng, 100);
        index_track(idx, id, {"t" + std::to_string(id), 900}, ls);
    }
    const auto probe = random_landmarks(rng, 80);
    const auto r1 = query(idx, probe);
    const auto r2 = query(idx, probe);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        REQUIRE(r1[i].track_id == r2[i].track_id);
        REQUIRE(r1[i].score == r2[i].score);
        REQUIRE(r1[i].offset_frames == r2[i].offset_frames);
    }
}

TEST_CASE("fpx1 round-trip") {
    const auto path = (std::filesystem::temp_directory_path() / "afp_idx.fpx1").string();

    SECTION("empty index") {
        FingerprintIndex idx;
        save_index(idx, path);
        const FingerprintIndex r = load_index(path);
        REQUIRE(r.catalog.empty());
        REQUIRE(r.buckets.empty());
    }

    SECTION("bucket-identical round-trip") {
        Rng rng(7);
        FingerprintIndex idx;
        index_track(idx, 1, {"first track", 862}, random_landmarks(rng, 600));
        index_track(idx, 2, {"second", 862}, random_landmarks(rng, 400));
        save_index(idx, path);
        const FingerprintIndex r = load_index(path);
        REQUIRE(r.catalog.size() == 2);
        REQUIRE(r.catalog.at(1).title == "first track");
        REQUIRE(r.catalog.at(1).n_frames == 862);
        REQUIRE(r.buckets.size() == idx.buckets.size());
        for (const auto& [key, posts] : idx.buckets) {
            REQUIRE(r.buckets.count(key) == 1);
            REQUIRE(r.buckets.at(key) == posts);
        }
    }

    SECTION("truncated file fails cleanly") {
        Rng rng(8);
        FingerprintIndex idx;
        index_track(idx, 1, {"x", 100}, random_landmarks(rng, 50));
        save_index(idx, path);
        const auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size / 2);
        REQUIRE_THROWS_AS(load_index(path), FormatError);
    }

    SECTION("corrupted byte fails the CRC") {
        Rng rng(9);
        FingerprintIndex idx;
        index_track(idx, 1, {"x", 100}, random_landmarks(rng, 50));
        save_index(idx, path);
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(30);
        f.put('\x7f');
        f.close();
        REQUIRE_THROWS_AS(load_index(path), FormatError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("engine: clean excerpt identification end to end") {
    const FingerprintConfig cfg = make_default_config();
    const FingerprintEngine engine(cfg);

    FingerprintIndex idx;
    std::vector<Waveform> tracks;
    for (std::uint32_t id = 0; id < 4; ++id) {
        tracks.push_back(synth_track(1000 + id, 12.0, 5512));
        engine.add_track(idx, id, "track " + std::to_string(id), tracks.back());
    }

    SECTION("10 s excerpt from the start") {
        for (std::uint32_t id = 0; id < 4; ++id) {
            Waveform q;
            q.sample_rate_hz = 5512;
            q.samples.assign(tracks[id].samples.begin(), tracks[id].samples.begin() + 55120);
            const MatchResult r = engine.identify(idx, q);
            REQUIRE(r.matched);
            REQUIRE(r.track_id == id);
        }
    }

    SECTION("offset excerpt reports its position") {
        const int start_s = 5;
        Waveform q;
        q.sample_rate_hz = 5512;
        q.samples.assign(tracks[2].samples.begin() + start_s * 5512, tracks[2].samples.end());
        const MatchResult r = engine.identify(idx, q);
        REQUIRE(r.matched);
        REQUIRE(r.track_id == 2);
        const int want_frames = start_s * 5512 / 64;
        REQUIRE(std::abs(r.offset_frames - want_frames) <= 2);
    }

    SECTION("a 5 s excerpt is still enough") {
        for (std::uint32_t id = 0; id < 4; ++id) {
            Waveform q;
            q.sample_rate_hz = 5512;
            q.samples.assign(tracks[id].samples.begin() + 3 * 5512,
                             tracks[id].samples.begin() + 8 * 5512);
            const MatchResult r = engine.identify(idx, q);
            REQUIRE(r.matched);
            REQUIRE(r.track_id == id);
        }
    }

    SECTION("silence does not match") {
        Waveform q;
        q.sample_rate_hz = 5512;
        q.samples.assign(55120, 0.0);
        const MatchResult r = engine.identify(idx, q);
        REQUIRE(!r.matched);
    }

    SECTION("too-short query is rejected") {
        Waveform q;
        q.sample_rate_hz = 5512;
        q.samples.assign(5512, 0.1);
        REQUIRE_THROWS_AS(engine.identify(idx, q), InvalidInput);
    }
}
