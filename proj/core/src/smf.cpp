#include "mtf/smf.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace mtf::smf {

namespace {

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t end)
        : bytes_(bytes), pos_(pos), end_(end) {}

    bool eof() const { return pos_ >= end_; }
    std::size_t pos() const { return pos_; }

    std::uint8_t u8() {
        if (pos_ >= end_) throw TruncatedChunk("unexpected end of chunk");
        return bytes_[pos_++];
    }
    std::uint8_t peek() const {
        if (pos_ >= end_) throw TruncatedChunk("unexpected end of chunk");
        return bytes_[pos_];
    }
    std::uint32_t u16() {
        std::uint32_t hi = u8();
        return (hi << 8) | u8();
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    std::uint32_t varlen() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            std::uint8_t b = u8();
            v = (v << 7) | (b & 0x7f);
            if ((b & 0x80) == 0) return v;
        }
        throw BadVarLen("variable-length quantity longer than 4 bytes");
    }
    void skip(std::size_t n) {
        if (end_ - pos_ < n) throw TruncatedChunk("skip past end of chunk");
        pos_ += n;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
    std::size_t end_;
};

struct OpenNote {
    std::int64_t onset = 0;
    int velocity = 0;
};

struct TrackState {
    // FIFO of open notes per pitch; overlapping same-pitch ons close
    // first-in-first-out.
    std::map<int, std::deque<OpenNote>> open;
};

std::uint8_t data_byte(Reader& r) {
    std::uint8_t b = r.u8();
    if (b & 0x80) throw SmfError("data byte with high bit set");
    return b;
}

void parse_track(Reader& r, RawSong& song, ParseStats& stats) {
    TrackState st;
    std::int64_t tick = 0;
    int running_status = -1;
    std::int64_t max_tick = 0;

    auto close_note = [&](int pitch, std::int64_t off_tick) {
        auto it = st.open.find(pitch);
        if (it == st.open.end() || it->second.empty()) return;  // stray note-off
        OpenNote on = it->second.front();
        it->second.pop_front();
        std::int64_t dur = off_tick - on.onset;
        if (dur < 1) dur = 1;
        song.notes.push_back({pitch, on.velocity, on.onset, dur});
    };

    while (!r.eof()) {
        tick += r.varlen();
        max_tick = std::max(max_tick, tick);
        std::uint8_t b = r.peek();
        int status;
        if (b & 0x80) {
            status = r.u8();
        } else {
            if (running_status < 0) throw SmfError("data byte without running status");
            status = running_status;
        }

        if (status == 0xff) {
            running_status = -1;  // meta events cancel running status
            std::uint8_t type = r.u8();
            std::uint32_t len = r.varlen();
            if (type == 0x58 && len >= 2) {
                std::uint8_t nn = r.u8();
                std::uint8_t dd = r.u8();
                r.skip(len - 2);
                song.time_signatures.push_back({tick, nn, 1 << dd});
            } else if (type == 0x2f) {
                r.skip(len);
                break;
            } else {
                r.skip(len);
            }
            continue;
        }
        if (status == 0xf0 || status == 0xf7) {
            running_status = -1;
            r.skip(r.varlen());
            continue;
        }
        if (status < 0x80 || status >= 0xf0) throw SmfError("unexpected status byte");

        running_status = status;
        int kind = status & 0xf0;
        int channel = status & 0x0f;
        switch (kind) {
            case 0x80: {
                int pitch = data_byte(r);
                data_byte(r);  // release velocity
                close_note(pitch, tick);
                break;
            }
            case 0x90: {
                int pitch = data_byte(r);
                int vel = data_byte(r);
                if (channel == 9) stats.percussion_seen = true;
                if (vel == 0) {
                    close_note(pitch, tick);
                } else {
                    st.open[pitch].push_back({tick, vel});
                }
                break;
            }
            case 0xa0:
            case 0xb0:
            case 0xe0:
                data_byte(r);
                data_byte(r);
                break;
            case 0xc0:
            case 0xd0:
                data_byte(r);
                break;
            default:
                throw SmfError("unexpected status byte");
        }
    }

    // Unmatched note-ons at end of track: close with duration 1 tick.
    for (auto& [pitch, q] : st.open) {
        for (const auto& on : q) {
            song.notes.push_back({pitch, on.velocity, on.onset, 1});
            ++stats.unmatched_note_ons;
        }
    }
    (void)max_tick;
}

}  // namespace

RawSong parse_smf(std::span<const std::uint8_t> bytes, ParseStats* stats) {
    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    st = ParseStats{};

    Reader header(bytes, 0, bytes.size());
    std::uint8_t magic[4];
    for (auto& m : magic) {
        try {
            m = header.u8();
        } catch (const TruncatedChunk&) {
            throw MalformedHeader("file shorter than header magic");
        }
    }
    if (magic[0] != 'M' || magic[1] != 'T' || magic[2] != 'h' || magic[3] != 'd')
        throw MalformedHeader("missing MThd magic");
    std::uint32_t hlen = header.u32();
    if (hlen < 6) throw MalformedHeader("header chunk shorter than 6 bytes");
    std::uint32_t format = header.u16();
    std::uint32_t ntrks = header.u16();
    std::uint32_t division = header.u16();
    header.skip(hlen - 6);
    if (format > 2) throw MalformedHeader("unknown SMF format");
    if (format == 2) throw MalformedHeader("format-2 files not supported");
    if (division & 0x8000) throw UnsupportedTimeDivision("SMPTE time division");
    if ((division & 0x7fff) == 0) throw MalformedHeader("zero ticks per quarter");

    RawSong song;
    song.ticks_per_quarter = static_cast<int>(division & 0x7fff);

    std::size_t pos = header.pos();
    std::uint32_t tracks_seen = 0;
    while (pos + 8 <= bytes.size() && tracks_seen < ntrks) {
        bool is_mtrk = bytes[pos] == 'M' && bytes[pos + 1] == 'T' && bytes[pos + 2] == 'r' &&
                       bytes[pos + 3] == 'k';
        std::uint64_t clen = (std::uint64_t(bytes[pos + 4]) << 24) |
                             (std::uint64_t(bytes[pos + 5]) << 16) |
                             (std::uint64_t(bytes[pos + 6]) << 8) | bytes[pos + 7];
        if (clen > bytes.size() - pos - 8) throw TruncatedChunk("chunk length past end of file");
        if (is_mtrk) {
            Reader tr(bytes, pos + 8, pos + 8 + clen);
            parse_track(tr, song, st);
            ++tracks_seen;
        }
        pos += 8 + clen;
    }
    if (tracks_seen < ntrks && pos < bytes.size())
        throw TruncatedChunk("truncated track chunk");

    std::stable_sort(song.notes.begin(), song.notes.end(),
                     [](const RawNote& a, const RawNote& b) {
                         return std::tie(a.onset_ticks, a.pitch, a.velocity) <
                                std::tie(b.onset_ticks, b.pitch, b.velocity);
                     });
    std::stable_sort(song.time_signatures.begin(), song.time_signatures.end());
    return song;
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}
void put_varlen(std::vector<std::uint8_t>& out, std::int64_t v) {
    std::uint8_t buf[4];
    int i = 0;
    buf[i++] = v & 0x7f;
    v >>= 7;
    while (v > 0 && i < 4) {
        buf[i++] = (v & 0x7f) | 0x80;
        v >>= 7;
    }
    while (i > 0) out.push_back(buf[--i]);
}

struct Event {
    std::int64_t tick;
    int order;  // note-offs before note-ons at equal tick
    int pitch;
    int velocity;
};

}  // namespace

std::vector<std::uint8_t> write_smf(const RawSong& song) {
    std::vector<Event> events;
    events.reserve(song.notes.size() * 2);
    for (const auto& n : song.notes) {
        events.push_back({n.onset_ticks, 1, n.pitch, n.velocity});
        events.push_back({n.onset_ticks + n.duration_ticks, 0, n.pitch, 0});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.tick, a.order, a.pitch, a.velocity) <
               std::tie(b.tick, b.order, b.pitch, b.velocity);
    });

    std::vector<std::uint8_t> track;
    std::int64_t cur = 0;
    std::size_t ei = 0;
    auto emit_event = [&](const Event& e) {
        put_varlen(track, e.tick - cur);
        cur = e.tick;
        if (e.order == 1) {
            track.push_back(0x90);
            track.push_back(static_cast<std::uint8_t>(e.pitch));
            track.push_back(static_cast<std::uint8_t>(e.velocity));
        } else {
            track.push_back(0x80);
            track.push_back(static_cast<std::uint8_t>(e.pitch));
            track.push_back(64);
        }
    };
    for (const auto& ts : song.time_signatures) {
        int dd = 0;
        int den = ts.denominator;
        while (den > 1 && (den & 1) == 0) {
            den >>= 1;
            ++dd;
        }
        if (den != 1) continue;  // non-power-of-two denominator, not representable
        while (ei < events.size() && events[ei].tick < ts.tick) emit_event(events[ei++]);
        put_varlen(track, ts.tick - cur);
        cur = ts.tick;
        track.insert(track.end(), {0xff, 0x58, 0x04, static_cast<std::uint8_t>(ts.numerator),
                                   static_cast<std::uint8_t>(dd), 24, 8});
    }
    while (ei < events.size()) emit_event(events[ei++]);
    put_varlen(track, 0);
    track.insert(track.end(), {0xff, 0x2f, 0x00});

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'M', 'T', 'h', 'd'});
    put_u32(out, 6);
    put_u16(out, 0);
    put_u16(out, 1);
    put_u16(out, static_cast<std::uint32_t>(song.ticks_per_quarter));
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_u32(out, static_cast<std::uint32_t>(track.size()));
    out.insert(out.end(), track.begin(), track.end());
    return out;
}

}  // namespace mtf::smf
