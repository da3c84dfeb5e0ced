#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mtf/score.hpp"

using namespace mtf;

namespace {

smf::RawSong song_with(std::vector<smf::RawNote> notes, int tpq = 96) {
    smf::RawSong s;
    s.ticks_per_quarter = tpq;
    s.notes = std::move(notes);
    return s;
}

// Independent nearest-grid oracle: scan all 20 values with exact rational
// distances, ties to the larger value.
int oracle_nearest(double units) {
    int best = score::kDurationGrid.front();
    double best_dist = 1e300;
    for (int g : score::kDurationGrid) {
        double d = std::abs(g - units);
        if (d < best_dist || (d == best_dist && g > best)) {
            best = g;
            best_dist = d;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("quantize: one-beat note at 8 spb") {
    auto s = score::quantize(song_with({{60, 64, 0, 96}}));
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].onset_units == 0);
    CHECK(s.notes[0].duration_units == 8);
}

TEST_CASE("quantize: 1.2-beat note lands on the 4-spb tier") {
    auto s = score::quantize(song_with({{60, 64, 0, 115}}));
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].duration_units == 10);  // 1.25 beats
    CHECK(oracle_nearest(115.0 * 8 / 96) == 10);
}

TEST_CASE("quantize: pitch range 21..108") {
    score::QuantizeStats stats;
    auto s = score::quantize(song_with({{20, 64, 0, 96}, {21, 64, 0, 96}, {108, 64, 96, 96},
                                        {109, 64, 96, 96}}),
                             &stats);
    REQUIRE(s.notes.size() == 2);
    CHECK(s.notes[0].pitch == 21);
    CHECK(s.notes[1].pitch == 108);
    CHECK(stats.dropped_pitch == 2);
}

TEST_CASE("velocity bin extremes and monotonicity") {
    CHECK(score::velocity_bin(1) == 0);
    CHECK(score::velocity_bin(127) == 7);
    int prev = 0;
    for (int v = 1; v <= 127; ++v) {
        int b = score::velocity_bin(v);
        CHECK(b >= prev);
        CHECK(b >= 0);
        CHECK(b <= 7);
        prev = b;
    }
    for (int b = 0; b < 8; ++b) {
        int v = score::velocity_from_bin(b);
        CHECK(v >= 1);
        CHECK(v <= 127);
        CHECK(score::velocity_bin(v) == b);
    }
}

TEST_CASE("quantize: durations above 8 beats clamp to 64 units") {
    auto s = score::quantize(song_with({{60, 64, 0, 96 * 20}}));
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].duration_units == 64);
}

TEST_CASE("quantize: tiny durations become 1 unit") {
    auto s = score::quantize(song_with({{60, 64, 0, 1}}));
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].duration_units == 1);
}

TEST_CASE("quantize: onset ties round up") {
    // 6 ticks at tpq 96 is exactly half a unit.
    auto s = score::quantize(song_with({{60, 64, 6, 96}}));
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].onset_units == 1);
}

TEST_CASE("quantize: dedup keeps longer duration, then higher velocity") {
    score::QuantizeStats stats;
    auto s = score::quantize(
        song_with({{60, 30, 0, 48}, {60, 120, 0, 48}, {60, 40, 0, 96}}), &stats);
    REQUIRE(s.notes.size() == 1);
    CHECK(s.notes[0].duration_units == 8);
    CHECK(s.notes[0].vel_bin == score::velocity_bin(40));
    CHECK(stats.deduplicated == 2);
}

TEST_CASE("quantize: idempotent on grid-aligned songs") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto sc = test::random_score(rng);
        // Write the score out exactly on the grid at 12 ticks per unit.
        smf::RawSong song;
        song.ticks_per_quarter = 96;
        for (const auto& q : sc.notes)
            song.notes.push_back({q.pitch, score::velocity_from_bin(q.vel_bin),
                                  q.onset_units * 12, q.duration_units * 12});
        CHECK(score::quantize(song) == sc);
    }
}

TEST_CASE("quantize: every duration lands on the grid (10k random notes)") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> tpq_d(24, 960);
    std::uniform_int_distribution<int> dur_d(1, 9000);
    std::uniform_int_distribution<int> onset_d(0, 50000);
    for (int i = 0; i < 10000; ++i) {
        int tpq = tpq_d(rng);
        auto s = score::quantize(
            song_with({{60, 64, onset_d(rng), dur_d(rng)}}, tpq));
        REQUIRE(s.notes.size() == 1);
        CHECK(score::is_grid_duration(s.notes[0].duration_units));
        double units = double(s.notes[0].duration_units);
        (void)units;
    }
}

TEST_CASE("augment: two-octave shifts") {
    score::Score s;
    s.notes.push_back({60, 4, 0, 8});
    s.notes.push_back({60, 4, 16, 8});
    const int offs[] = {24, -24};
    auto res = score::augment(s, offs, {});
    REQUIRE(res.variants.size() == 2);
    CHECK(res.variants[0].notes[0].pitch == 84);
    CHECK(res.variants[1].notes[0].pitch == 36);
}

TEST_CASE("augment: out-of-range notes dropped per variant") {
    score::Score s;
    s.notes.push_back({100, 4, 0, 8});
    s.notes.push_back({60, 4, 8, 8});
    const int offs[] = {24};
    auto res = score::augment(s, offs, {});
    REQUIRE(res.variants.size() == 1);
    REQUIRE(res.variants[0].notes.size() == 1);  // 124 > 108 dropped
    CHECK(res.variants[0].notes[0].pitch == 84);
}

TEST_CASE("augment: velocity clamp can make the variant identical") {
    score::Score s;
    s.notes.push_back({60, 7, 0, 8});
    const int offs[] = {1};
    auto res = score::augment(s, {}, offs);
    CHECK(res.variants.empty());
    CHECK(res.skipped_identical == 1);
}

TEST_CASE("augment: empty offsets and zero offsets produce nothing") {
    score::Score s;
    s.notes.push_back({60, 4, 0, 8});
    CHECK(score::augment(s, {}, {}).variants.empty());
    const int zero[] = {0};
    CHECK(score::augment(s, zero, zero).variants.empty());
}

TEST_CASE("augment: variant losing all notes is skipped with a tally") {
    score::Score s;
    s.notes.push_back({100, 4, 0, 8});
    const int offs[] = {24};
    auto res = score::augment(s, offs, {});
    CHECK(res.variants.empty());
    CHECK(res.skipped_empty == 1);
}

TEST_CASE("bar_position") {
    CHECK(score::bar_position(0) == std::pair<std::int64_t, int>{0, 0});
    CHECK(score::bar_position(33) == std::pair<std::int64_t, int>{1, 1});
    CHECK(score::bar_position(95) == std::pair<std::int64_t, int>{2, 31});
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::int64_t> d(0, 1 << 20);
    for (int i = 0; i < 1000; ++i) {
        std::int64_t u = d(rng);
        auto [bar, pos] = score::bar_position(u);
        CHECK(bar * 32 + pos == u);
        CHECK(pos >= 0);
        CHECK(pos < 32);
    }
}
