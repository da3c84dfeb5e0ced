#include "mtf/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace mtf::score {

bool is_grid_duration(int units) {
    return std::find(kDurationGrid.begin(), kDurationGrid.end(), units) != kDurationGrid.end();
}

int nearest_grid_duration(std::int64_t units_num, std::int64_t units_den) {
    // Exact duration is units_num / units_den in 1/8-beat units. Compare
    // |g - x| scaled by units_den so ties are exact; ties round up.
    int best = kDurationGrid.front();
    std::int64_t best_dist = -1;
    for (int g : kDurationGrid) {
        std::int64_t dist = std::llabs(g * units_den - units_num);
        if (best_dist < 0 || dist <= best_dist) {
            if (dist != best_dist) best = g;
            else best = std::max(best, g);
            best_dist = dist;
        }
    }
    return best;
}

int velocity_bin(int velocity) {
    if (velocity < 1) velocity = 1;
    if (velocity > 127) velocity = 127;
    int bin = (velocity - 1) * kVelocityBins / 126;
    return std::min(bin, kVelocityBins - 1);
}

int velocity_from_bin(int vel_bin) {
    int v = static_cast<int>(std::lround((vel_bin + 0.5) * 127.0 / kVelocityBins));
    return std::clamp(v, 1, 127);
}

Score quantize(const smf::RawSong& song, QuantizeStats* stats) {
    QuantizeStats local;
    QuantizeStats& st = stats ? *stats : local;
    st = QuantizeStats{};

    for (const auto& ts : song.time_signatures)
        if (ts.denominator != 4) st.non44_meter = true;

    const std::int64_t tpq = song.ticks_per_quarter;
    // Keep the winner per (onset, pitch): longer duration, then higher vel_bin.
    std::map<std::pair<std::int64_t, int>, QNote> best;
    for (const auto& n : song.notes) {
        if (n.pitch < kPitchMin || n.pitch > kPitchMax) {
            ++st.dropped_pitch;
            continue;
        }
        // Round half up to the nearest 1/8-beat unit.
        std::int64_t onset = (n.onset_ticks * kUnitsPerBeat * 2 + tpq) / (2 * tpq);
        QNote q;
        q.pitch = n.pitch;
        q.vel_bin = velocity_bin(n.velocity);
        q.onset_units = onset;
        q.duration_units = nearest_grid_duration(n.duration_ticks * kUnitsPerBeat, tpq);

        auto key = std::make_pair(q.onset_units, q.pitch);
        auto [it, inserted] = best.try_emplace(key, q);
        if (!inserted) {
            ++st.deduplicated;
            QNote& cur = it->second;
            if (q.duration_units > cur.duration_units ||
                (q.duration_units == cur.duration_units && q.vel_bin > cur.vel_bin))
                cur = q;
        }
    }

    Score s;
    s.notes.reserve(best.size());
    for (const auto& [key, q] : best) s.notes.push_back(q);
    return s;
}

AugmentResult augment(const Score& s, std::span<const int> pitch_offsets,
                      std::span<const int> vel_offsets) {
    AugmentResult res;
    auto add_variant = [&](Score&& v) {
        if (v.notes.empty()) {
            ++res.skipped_empty;
        } else if (v == s) {
            ++res.skipped_identical;
        } else {
            res.variants.push_back(std::move(v));
        }
    };

    for (int off : pitch_offsets) {
        if (off == 0) continue;
        Score v;
        for (QNote q : s.notes) {
            q.pitch += off;
            if (q.pitch < kPitchMin || q.pitch > kPitchMax) continue;
            v.notes.push_back(q);
        }
        std::sort(v.notes.begin(), v.notes.end(), [](const QNote& a, const QNote& b) {
            return std::tie(a.onset_units, a.pitch) < std::tie(b.onset_units, b.pitch);
        });
        add_variant(std::move(v));
    }
    for (int off : vel_offsets) {
        if (off == 0) continue;
        Score v;
        for (QNote q : s.notes) {
            q.vel_bin = std::clamp(q.vel_bin + off, 0, kVelocityBins - 1);
            v.notes.push_back(q);
        }
        add_variant(std::move(v));
    }
    return res;
}

std::pair<std::int64_t, int> bar_position(std::int64_t onset_units) {
    return {onset_units / kUnitsPerBar, static_cast<int>(onset_units % kUnitsPerBar)};
}

}  // namespace mtf::score
