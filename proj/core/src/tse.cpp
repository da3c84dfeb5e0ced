#include "mtf/tse.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>

#include "decode_machine.hpp"

namespace mtf::tse {

using tok::Scheme;
using tok::TokenType;

GrammarTable grammar_for(Scheme scheme) {
    using enum TokenType;
    GrammarTable g;
    g.scheme = scheme;
    // Non-structural specials and EOS never admit a successor.
    g.allowed[PAD] = {};
    g.allowed[MASK] = {};
    g.allowed[SEP] = {};
    g.allowed[EOS] = {};

    const bool ts = scheme.time == tok::TimeKind::TimeShift;
    const bool dur = scheme.duration == tok::DurationKind::Duration;
    if (ts && dur) {
        g.allowed[BOS] = {Pitch, TimeShift, EOS};
        g.allowed[Pitch] = {Velocity};
        g.allowed[Velocity] = {Duration};
        g.allowed[Duration] = {Pitch, TimeShift, EOS};
        g.allowed[TimeShift] = {Pitch, TimeShift, EOS};
    } else if (ts && !dur) {
        g.allowed[BOS] = {NoteOn, TimeShift, EOS};
        g.allowed[NoteOn] = {Velocity};
        g.allowed[Velocity] = {NoteOn, NoteOff, TimeShift, EOS};
        g.allowed[NoteOff] = {NoteOn, NoteOff, TimeShift, EOS};
        g.allowed[TimeShift] = {NoteOn, NoteOff, TimeShift, EOS};
    } else if (!ts && dur) {
        g.allowed[BOS] = {Bar, EOS};
        g.allowed[Bar] = {Position, Bar, EOS};
        g.allowed[Position] = {Pitch};
        g.allowed[Pitch] = {Velocity};
        g.allowed[Velocity] = {Duration};
        g.allowed[Duration] = {Pitch, Position, Bar, EOS};
    } else {
        g.allowed[BOS] = {Bar, EOS};
        g.allowed[Bar] = {Position, Bar, EOS};
        g.allowed[Position] = {NoteOn, NoteOff};
        g.allowed[NoteOn] = {Velocity};
        g.allowed[Velocity] = {NoteOn, NoteOff, Position, Bar, EOS};
        g.allowed[NoteOff] = {NoteOn, NoteOff, Position, Bar, EOS};
    }
    return g;
}

TseReport validate(const tok::TokenSequence& seq, const tok::Vocabulary& vocab) {
    if (seq.is_bpe) throw tok::BpeNotDecoded("sequence is BPE-encoded; decode it first");
    return detail::run_token_machine(seq.ids, vocab, false).report;
}

nlohmann::json report_to_json(const TseReport& r) {
    nlohmann::json counts, ratios;
    for (int i = 0; i < 5; ++i) {
        auto c = static_cast<ErrorCategory>(i);
        counts[std::string(kCategoryNames[i])] = r.count(c);
        ratios[std::string(kCategoryNames[i])] = r.ratio(c);
    }
    return nlohmann::json{
        {"counts", counts}, {"total_tokens", r.total_tokens}, {"ratios", ratios}};
}

std::string report_to_csv(const TseReport& r) {
    std::string out = "type,time,dupn,nnon,nnof,total_tokens\n";
    char buf[64];
    for (int i = 0; i < 5; ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g", r.ratio(static_cast<ErrorCategory>(i)));
        out += buf;
        out += ',';
    }
    out += std::to_string(r.total_tokens);
    out += '\n';
    return out;
}

}  // namespace mtf::tse

namespace mtf::detail {

using tse::ErrorCategory;
using tok::TokenType;

tok::DetokenizeResult run_token_machine(const std::vector<int>& ids,
                                        const tok::Vocabulary& vocab, bool strict) {
    const tok::Scheme scheme = vocab.scheme();
    const tse::GrammarTable grammar = tse::grammar_for(scheme);
    const bool noff = scheme.duration == tok::DurationKind::NoteOff;

    tok::DetokenizeResult res;
    auto& report = res.report;
    auto fail = [&](std::size_t idx, ErrorCategory cat) {
        if (strict) throw tok::TokenGrammarError(idx, cat);
        ++report.counts[static_cast<int>(cat)];
    };

    TokenType prev = TokenType::BOS;
    std::int64_t cur_time = 0;
    std::int64_t cur_bar = -1;
    int cur_pos = -1;
    // Dur schemes: latest note end per pitch (times are monotone, so a pitch
    // sounds at t iff its max end exceeds t).
    std::map<int, std::int64_t> max_end;
    // NOff schemes: open notes per pitch, closed first-in-first-out.
    struct Open {
        std::int64_t onset;
        int vel_bin;
    };
    std::map<int, std::deque<Open>> open;
    int pending_pitch = -1;  // Pitch/NoteOn waiting for its Velocity
    int pending_vel = -1;    // Dur schemes: Velocity waiting for Duration

    auto add_note = [&](int pitch, int vel_bin, std::int64_t onset, std::int64_t dur_units) {
        score::QNote q;
        q.pitch = pitch;
        q.vel_bin = vel_bin;
        q.onset_units = onset;
        q.duration_units = score::nearest_grid_duration(dur_units, 1);
        res.score.notes.push_back(q);
    };

    std::size_t start = 0;
    if (!ids.empty() && ids[0] == tok::kBos) start = 1;  // leading BOS not a prediction
    report.total_tokens = static_cast<std::int64_t>(ids.size() - start);

    for (std::size_t i = start; i < ids.size(); ++i) {
        int id = ids[i];
        if (id < 0 || id >= vocab.size()) {
            fail(i, ErrorCategory::Type);
            continue;
        }
        const tok::TokenSpec& spec = vocab.spec(id);
        if (!grammar.legal(prev, spec.type)) {
            fail(i, ErrorCategory::Type);
            continue;
        }

        switch (spec.type) {
            case TokenType::TimeShift:
                cur_time += spec.value;
                break;
            case TokenType::Bar:
                ++cur_bar;
                cur_pos = -1;
                break;
            case TokenType::Position:
                if (cur_pos >= 0 && spec.value <= cur_pos) {
                    fail(i, ErrorCategory::Time);
                    continue;  // fully skipped, prev unchanged
                }
                cur_pos = spec.value;
                cur_time = std::max<std::int64_t>(cur_bar, 0) * score::kUnitsPerBar + cur_pos;
                break;
            case TokenType::Pitch:
            case TokenType::NoteOn: {
                bool sounding = noff ? (open.count(spec.value) && !open[spec.value].empty())
                                     : (max_end.count(spec.value) &&
                                        max_end[spec.value] > cur_time);
                if (sounding) fail(i, ErrorCategory::DupN);  // counted, note still taken
                pending_pitch = spec.value;
                break;
            }
            case TokenType::Velocity:
                if (noff) {
                    if (pending_pitch >= 0) {
                        open[pending_pitch].push_back({cur_time, spec.value});
                        pending_pitch = -1;
                    }
                } else {
                    pending_vel = spec.value;
                }
                break;
            case TokenType::Duration:
                if (pending_pitch >= 0 && pending_vel >= 0) {
                    add_note(pending_pitch, pending_vel, cur_time, spec.value);
                    auto [it, ins] = max_end.try_emplace(pending_pitch, 0);
                    it->second = std::max(it->second, cur_time + spec.value);
                    pending_pitch = -1;
                    pending_vel = -1;
                }
                break;
            case TokenType::NoteOff: {
                auto it = open.find(spec.value);
                if (it == open.end() || it->second.empty()) {
                    fail(i, ErrorCategory::NNon);
                    continue;  // fully skipped
                }
                Open o = it->second.front();
                it->second.pop_front();
                std::int64_t dur = cur_time - o.onset;
                add_note(spec.value, o.vel_bin, o.onset, dur > 0 ? dur : 1);
                break;
            }
            default:
                break;  // BOS/EOS/specials carry no state
        }
        prev = spec.type;
    }

    // Unclosed note-ons: maximum duration applied after decoding.
    for (auto& [pitch, q] : open) {
        for (const auto& o : q) {
            fail(ids.size(), ErrorCategory::NNof);
            add_note(pitch, o.vel_bin, o.onset, score::kMaxDurationUnits);
        }
    }

    auto& notes = res.score.notes;
    std::sort(notes.begin(), notes.end(), [](const score::QNote& a, const score::QNote& b) {
        return std::tie(a.onset_units, a.pitch, a.duration_units, a.vel_bin) <
               std::tie(b.onset_units, b.pitch, b.duration_units, b.vel_bin);
    });
    // Enforce the Score invariant: one note per (onset, pitch), longer
    // duration then higher velocity wins.
    std::vector<score::QNote> dedup;
    for (const auto& q : notes) {
        if (!dedup.empty() && dedup.back().onset_units == q.onset_units &&
            dedup.back().pitch == q.pitch)
            dedup.back() = q;
        else
            dedup.push_back(q);
    }
    notes = std::move(dedup);
    return res;
}

}  // namespace mtf::detail
