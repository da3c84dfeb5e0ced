#ifndef MTF_SCORE_HPP
#define MTF_SCORE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mtf/smf.hpp"

namespace mtf::score {

// Note duration values in 1/8-beat units. 8 samples per beat up to one beat,
// then 4, 2 and 1 spb tiers up to eight beats.
inline constexpr std::array<int, 20> kDurationGrid = {
    1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 20, 24, 28, 32, 40, 48, 56, 64};

inline constexpr int kPitchMin = 21;
inline constexpr int kPitchMax = 108;
inline constexpr int kVelocityBins = 8;
inline constexpr int kUnitsPerBeat = 8;
inline constexpr int kUnitsPerBar = 32;  // 4/4 assumed
inline constexpr int kMaxDurationUnits = 64;

struct QNote {
    int pitch = 60;                // 21..108
    int vel_bin = 0;               // 0..7
    std::int64_t onset_units = 0;  // 1/8-beat units
    int duration_units = 1;        // value from kDurationGrid

    auto operator<=>(const QNote&) const = default;
};

struct Score {
    std::vector<QNote> notes;  // sorted by (onset_units, pitch)

    bool operator==(const Score&) const = default;
};

struct QuantizeStats {
    int dropped_pitch = 0;
    int deduplicated = 0;
    bool non44_meter = false;
};

// Nearest kDurationGrid value to the exact duration num/den beats*8 units;
// ties round up, values above 64 units clamp to 64, minimum 1.
int nearest_grid_duration(std::int64_t units_num, std::int64_t units_den);

// 8 equal-width bins over [1,127].
int velocity_bin(int velocity);
// Center value of a bin, clamped to [1,127].
int velocity_from_bin(int vel_bin);

bool is_grid_duration(int units);

Score quantize(const smf::RawSong& song, QuantizeStats* stats = nullptr);

struct AugmentResult {
    std::vector<Score> variants;
    int skipped_empty = 0;
    int skipped_identical = 0;
};

// One variant per nonzero pitch offset and per nonzero velocity offset,
// applied independently. Out-of-range pitches are dropped from the variant;
// vel_bin is clamped to [0,7].
AugmentResult augment(const Score& s, std::span<const int> pitch_offsets,
                      std::span<const int> vel_offsets);

// 4/4 meter: bar = units div 32, position = units mod 32.
std::pair<std::int64_t, int> bar_position(std::int64_t onset_units);

}  // namespace mtf::score

#endif
