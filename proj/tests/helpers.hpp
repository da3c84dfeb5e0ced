#ifndef MTF_TEST_HELPERS_HPP
#define MTF_TEST_HELPERS_HPP

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "mtf/score.hpp"
#include "mtf/smf.hpp"
#include "mtf/tok.hpp"
#include "mtf/tse.hpp"

namespace mtf::test {

// Random quantized score. No two notes of the same pitch overlap in time (a
// piano key cannot be struck while held), which also keeps note-on/note-off
// pairing unambiguous.
inline score::Score random_score(std::mt19937& rng, int max_notes = 40) {
    std::uniform_int_distribution<int> n_notes(0, max_notes);
    std::uniform_int_distribution<int> gap(0, 20);
    std::uniform_int_distribution<int> pitch_d(score::kPitchMin, score::kPitchMax);
    std::uniform_int_distribution<int> vel_d(0, 7);
    std::uniform_int_distribution<std::size_t> dur_d(0, score::kDurationGrid.size() - 1);

    score::Score s;
    std::map<int, std::int64_t> busy_until;
    std::int64_t t = 0;
    const int n = n_notes(rng);
    for (int i = 0; i < n; ++i) {
        t += gap(rng);
        int pitch = -1;
        for (int tries = 0; tries < 8; ++tries) {
            int p = pitch_d(rng);
            auto it = busy_until.find(p);
            if (it == busy_until.end() || it->second <= t) {
                pitch = p;
                break;
            }
        }
        if (pitch < 0) continue;
        score::QNote q;
        q.pitch = pitch;
        q.vel_bin = vel_d(rng);
        q.onset_units = t;
        q.duration_units = score::kDurationGrid[dur_d(rng)];
        busy_until[pitch] = t + q.duration_units;
        s.notes.push_back(q);
    }
    std::sort(s.notes.begin(), s.notes.end(), [](const score::QNote& a, const score::QNote& b) {
        return std::tie(a.onset_units, a.pitch) < std::tie(b.onset_units, b.pitch);
    });
    return s;
}

// Random raw song with the same no-same-pitch-overlap constraint.
inline smf::RawSong random_song(std::mt19937& rng, int max_notes = 60) {
    std::uniform_int_distribution<int> n_notes(0, max_notes);
    std::uniform_int_distribution<int> gap(0, 400);
    std::uniform_int_distribution<int> pitch_d(0, 127);
    std::uniform_int_distribution<int> vel_d(1, 127);
    std::uniform_int_distribution<int> dur_d(1, 2000);

    smf::RawSong song;
    song.ticks_per_quarter = 480;
    std::map<int, std::int64_t> busy_until;
    std::int64_t t = 0;
    const int n = n_notes(rng);
    for (int i = 0; i < n; ++i) {
        t += gap(rng);
        int pitch = -1;
        for (int tries = 0; tries < 8; ++tries) {
            int p = pitch_d(rng);
            auto it = busy_until.find(p);
            if (it == busy_until.end() || it->second <= t) {
                pitch = p;
                break;
            }
        }
        if (pitch < 0) continue;
        smf::RawNote note{pitch, vel_d(rng), t, dur_d(rng)};
        busy_until[pitch] = t + note.duration_ticks;
        song.notes.push_back(note);
    }
    std::stable_sort(song.notes.begin(), song.notes.end(),
                     [](const smf::RawNote& a, const smf::RawNote& b) {
                         return std::tie(a.onset_ticks, a.pitch, a.velocity) <
                                std::tie(b.onset_ticks, b.pitch, b.velocity);
                     });
    return song;
}

// Deterministic score used by the fault-injection harness: distinct pitches,
// onsets spread over several bars.
inline score::Score injection_fixture(int notes = 30) {
    score::Score s;
    for (int i = 0; i < notes; ++i) {
        score::QNote q;
        q.pitch = 40 + i * 2;
        q.vel_bin = i % 8;
        q.onset_units = static_cast<std::int64_t>(i) * 6;
        q.duration_units = 4;
        s.notes.push_back(q);
    }
    return s;
}

// --------------------------------------------------------- fault injection

namespace detail {

inline tok::TokenType type_at(const tok::TokenSequence& seq, const tok::Vocabulary& v,
                              std::size_t i) {
    return v.spec(seq.ids[i]).type;
}

}  // namespace detail

// Injects k faults of one category into a clean tokenizer output. Sites are
// chosen so that no non-targeted category (type errors included) is
// disturbed. Requires the fixture to provide at least k usable sites.
inline tok::TokenSequence inject_faults(const tok::TokenSequence& seq,
                                        const tok::Vocabulary& vocab,
                                        tse::ErrorCategory cat, int k) {
    using tok::TokenType;
    const auto& ids = seq.ids;
    tok::TokenSequence out = seq;
    auto type_of = [&](std::size_t i) { return detail::type_at(seq, vocab, i); };
    auto value_of = [&](std::size_t i) { return vocab.spec(ids[i]).value; };
    const bool noff = vocab.scheme().duration == tok::DurationKind::NoteOff;

    switch (cat) {
        case tse::ErrorCategory::Type: {
            // Duplicate a Velocity token in place: Velocity after Velocity is
            // illegal in every scheme and the duplicate is skipped.
            std::vector<std::size_t> sites;
            for (std::size_t i = 0; i < ids.size(); ++i)
                if (type_of(i) == TokenType::Velocity) sites.push_back(i);
            if (static_cast<int>(sites.size()) < k) throw std::runtime_error("too few sites");
            for (int j = k - 1; j >= 0; --j)
                out.ids.insert(out.ids.begin() + sites[j] + 1, ids[sites[j]]);
            break;
        }
        case tse::ErrorCategory::Time: {
            // Re-emit the current Position value at a site where a Position
            // token is grammar-legal: "stays in time".
            struct Site {
                std::size_t after;
                int pos_value;
            };
            std::vector<Site> sites;
            int cur_pos = -1;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                TokenType t = type_of(i);
                if (t == TokenType::Bar) cur_pos = -1;
                if (t == TokenType::Position) cur_pos = value_of(i);
                bool legal_site = noff ? (t == TokenType::Velocity || t == TokenType::NoteOff)
                                       : (t == TokenType::Duration);
                if (legal_site && cur_pos >= 0) sites.push_back({i, cur_pos});
            }
            if (static_cast<int>(sites.size()) < k) throw std::runtime_error("too few sites");
            for (int j = k - 1; j >= 0; --j)
                out.ids.insert(out.ids.begin() + sites[j].after + 1,
                               vocab.id_of({TokenType::Position, sites[j].pos_value}));
            break;
        }
        case tse::ErrorCategory::DupN: {
            if (!noff) {
                // Duplicate a whole Pitch,Velocity,Duration triple in place.
                std::vector<std::size_t> sites;  // index of Pitch token
                for (std::size_t i = 0; i + 2 < ids.size(); ++i)
                    if (type_of(i) == TokenType::Pitch) sites.push_back(i);
                if (static_cast<int>(sites.size()) < k)
                    throw std::runtime_error("too few sites");
                for (int j = k - 1; j >= 0; --j) {
                    std::size_t p = sites[j];
                    out.ids.insert(out.ids.begin() + p + 3,
                                   {ids[p], ids[p + 1], ids[p + 2]});
                }
            } else {
                // Re-strike an active pitch and close the extra note right
                // after the original NoteOff so nnon/nnof stay untouched.
                struct Site {
                    std::size_t vel_idx;   // Velocity of the original NoteOn
                    std::size_t off_idx;   // matching NoteOff
                    int pitch;
                };
                std::vector<Site> sites;
                for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
                    if (type_of(i) != TokenType::NoteOn) continue;
                    int pitch = value_of(i);
                    for (std::size_t j = i + 1; j < ids.size(); ++j) {
                        if (type_of(j) == TokenType::NoteOff && value_of(j) == pitch) {
                            sites.push_back({i + 1, j, pitch});
                            break;
                        }
                    }
                }
                if (static_cast<int>(sites.size()) < k)
                    throw std::runtime_error("too few sites");
                for (int j = k - 1; j >= 0; --j) {
                    const Site& s = sites[j];
                    int on_id = vocab.id_of({TokenType::NoteOn, s.pitch});
                    int off_id = vocab.id_of({TokenType::NoteOff, s.pitch});
                    int vel_id = ids[s.vel_idx];
                    out.ids.insert(out.ids.begin() + s.off_idx + 1, off_id);
                    out.ids.insert(out.ids.begin() + s.vel_idx + 1, {on_id, vel_id});
                }
            }
            break;
        }
        case tse::ErrorCategory::NNon: {
            // NoteOff for a pitch that never sounds, at a grammar-legal site.
            std::vector<std::size_t> sites;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                TokenType t = type_of(i);
                if (t == TokenType::Velocity || t == TokenType::NoteOff) sites.push_back(i);
            }
            if (static_cast<int>(sites.size()) < k) throw std::runtime_error("too few sites");
            for (int j = k - 1; j >= 0; --j) {
                int unused = score::kPitchMin + (j % 4);  // fixture starts at pitch 40
                out.ids.insert(out.ids.begin() + sites[j] + 1,
                               vocab.id_of({TokenType::NoteOff, unused}));
            }
            break;
        }
        case tse::ErrorCategory::NNof: {
            // Drop a NoteOff whose removal keeps the grammar intact; fixture
            // pitches are distinct so nothing re-strikes them later. In the
            // Bar+Position scheme the introducing Position goes with it.
            const auto grammar = tse::grammar_for(vocab.scheme());
            struct Site {
                std::size_t first;
                std::size_t count;  // 1 = NoteOff only, 2 = Position + NoteOff
            };
            std::vector<Site> sites;
            for (std::size_t i = 1; i + 1 < ids.size(); ++i) {
                if (type_of(i) != TokenType::NoteOff) continue;
                if (grammar.legal(type_of(i - 1), type_of(i + 1)))
                    sites.push_back({i, 1});
                else if (i >= 2 && type_of(i - 1) == TokenType::Position &&
                         grammar.legal(type_of(i - 2), type_of(i + 1)))
                    sites.push_back({i - 1, 2});
            }
            if (static_cast<int>(sites.size()) < k) throw std::runtime_error("too few sites");
            for (int j = k - 1; j >= 0; --j)
                out.ids.erase(out.ids.begin() + sites[j].first,
                              out.ids.begin() + sites[j].first + sites[j].count);
            break;
        }
    }
    return out;
}

// Categories the TSE metric can report for a scheme; the rest are
// structurally impossible there.
inline std::vector<tse::ErrorCategory> applicable_categories(tok::Scheme scheme) {
    std::vector<tse::ErrorCategory> cats{tse::ErrorCategory::Type, tse::ErrorCategory::DupN};
    if (scheme.time == tok::TimeKind::BarPosition) cats.push_back(tse::ErrorCategory::Time);
    if (scheme.duration == tok::DurationKind::NoteOff) {
        cats.push_back(tse::ErrorCategory::NNon);
        cats.push_back(tse::ErrorCategory::NNof);
    }
    return cats;
}

}  // namespace mtf::test

#endif
