#ifndef MTF_SMF_HPP
#define MTF_SMF_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtf::smf {

struct RawNote {
    int pitch = 0;               // 0..127
    int velocity = 0;            // 1..127
    std::int64_t onset_ticks = 0;
    std::int64_t duration_ticks = 1;  // >= 1

    auto operator<=>(const RawNote&) const = default;
};

struct TimeSignature {
    std::int64_t tick = 0;
    int numerator = 4;
    int denominator = 4;

    auto operator<=>(const TimeSignature&) const = default;
};

struct RawSong {
    int ticks_per_quarter = 480;  // 1..32767
    std::vector<RawNote> notes;   // sorted by (onset, pitch, velocity)
    std::vector<TimeSignature> time_signatures;
};

struct SmfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedHeader : SmfError {
    using SmfError::SmfError;
};
struct UnsupportedTimeDivision : SmfError {
    using SmfError::SmfError;
};
struct TruncatedChunk : SmfError {
    using SmfError::SmfError;
};
struct BadVarLen : SmfError {
    using SmfError::SmfError;
};

struct ParseStats {
    int unmatched_note_ons = 0;  // closed with duration 1 tick
    bool percussion_seen = false;
};

// Parses SMF format 0/1 bytes. All tracks and channels are merged into one
// note list. Tempo meta events are ignored; time stays in ticks.
RawSong parse_smf(std::span<const std::uint8_t> bytes, ParseStats* stats = nullptr);

// Emits a format-0 single-track file. parse_smf(write_smf(s)).notes == s.notes.
std::vector<std::uint8_t> write_smf(const RawSong& song);

}  // namespace mtf::smf

#endif
