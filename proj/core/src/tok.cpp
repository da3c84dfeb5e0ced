#include "mtf/tok.hpp"

#include <algorithm>
#include <array>

#include "decode_machine.hpp"

namespace mtf::tok {

namespace {

constexpr std::array<std::string_view, 13> kTypeNames = {
    "PAD",      "BOS",      "EOS",       "MASK", "SEP",      "Pitch", "NoteOn",
    "NoteOff",  "Velocity", "Duration",  "TimeShift", "Bar", "Position"};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

std::string_view token_type_name(TokenType t) {
    return kTypeNames[static_cast<std::size_t>(t)];
}

std::optional<TokenType> token_type_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTypeNames.size(); ++i)
        if (kTypeNames[i] == name) return static_cast<TokenType>(i);
    return std::nullopt;
}

std::string Scheme::name() const {
    std::string n = time == TimeKind::TimeShift ? "ts" : "pos";
    n += duration == DurationKind::Duration ? "-dur" : "-noff";
    return n;
}

std::optional<Scheme> Scheme::from_name(std::string_view name) {
    for (Scheme s : all())
        if (s.name() == name) return s;
    return std::nullopt;
}

std::array<Scheme, 4> Scheme::all() {
    return {Scheme{TimeKind::TimeShift, DurationKind::Duration},
            Scheme{TimeKind::TimeShift, DurationKind::NoteOff},
            Scheme{TimeKind::BarPosition, DurationKind::Duration},
            Scheme{TimeKind::BarPosition, DurationKind::NoteOff}};
}

TokenGrammarError::TokenGrammarError(std::size_t idx, tse::ErrorCategory cat)
    : TokenizeError("token grammar error at index " + std::to_string(idx) + " (" +
                    std::string(tse::kCategoryNames[static_cast<int>(cat)]) + ")"),
      index(idx),
      category(cat) {}

Vocabulary Vocabulary::build(Scheme scheme) {
    Vocabulary v;
    v.scheme_ = scheme;
    auto add = [&v](TokenType type, int value) {
        v.ids_.emplace(TokenSpec{type, value}, static_cast<int>(v.specs_.size()));
        v.specs_.push_back({type, value});
    };

    add(TokenType::PAD, 0);
    add(TokenType::BOS, 0);
    add(TokenType::EOS, 0);
    add(TokenType::MASK, 0);
    add(TokenType::SEP, 0);

    const bool noff = scheme.duration == DurationKind::NoteOff;
    TokenType onset_type = noff ? TokenType::NoteOn : TokenType::Pitch;
    for (int p = score::kPitchMin; p <= score::kPitchMax; ++p) add(onset_type, p);
    if (noff)
        for (int p = score::kPitchMin; p <= score::kPitchMax; ++p) add(TokenType::NoteOff, p);
    for (int b = 0; b < score::kVelocityBins; ++b) add(TokenType::Velocity, b);
    if (!noff)
        for (int d : score::kDurationGrid) add(TokenType::Duration, d);
    if (scheme.time == TimeKind::TimeShift)
        for (int d : score::kDurationGrid) add(TokenType::TimeShift, d);
    if (scheme.time == TimeKind::BarPosition) {
        add(TokenType::Bar, 0);
        for (int p = 0; p < score::kUnitsPerBar; ++p) add(TokenType::Position, p);
    }

    std::uint64_t h = kFnvOffset;
    for (char c : scheme.name()) h = fnv1a(h, static_cast<std::uint64_t>(c));
    for (const auto& s : v.specs_)
        h = fnv1a(fnv1a(h, static_cast<std::uint64_t>(s.type)),
                  static_cast<std::uint64_t>(s.value));
    v.hash_ = h;
    return v;
}

int Vocabulary::id_of(TokenSpec s) const {
    auto it = ids_.find(s);
    if (it == ids_.end())
        throw TokenizeError("token not in vocabulary: " +
                            std::string(token_type_name(s.type)) + " " +
                            std::to_string(s.value));
    return it->second;
}

std::vector<TokenType> Vocabulary::types() const {
    std::vector<TokenType> out;
    for (const auto& s : specs_)
        if (out.empty() || out.back() != s.type) out.push_back(s.type);
    return out;
}

namespace {

struct Emitter {
    const Vocabulary& vocab;
    TokenSequence seq;
    std::int64_t cur_time = 0;
    std::int64_t cur_bar = -1;
    int cur_pos = -1;

    void push(TokenType type, int value) { seq.ids.push_back(vocab.id_of({type, value})); }

    // Greedy largest-first TimeShift decomposition; exact since the grid
    // contains 1..8.
    void advance_ts(std::int64_t t) {
        std::int64_t gap = t - cur_time;
        while (gap > 0) {
            int step = score::kDurationGrid.front();
            for (int g : score::kDurationGrid)
                if (g <= gap) step = g;
            push(TokenType::TimeShift, step);
            gap -= step;
        }
        cur_time = t;
    }

    void advance_pos(std::int64_t t) {
        auto [bar, pos] = score::bar_position(t);
        while (cur_bar < bar) {
            push(TokenType::Bar, 0);
            ++cur_bar;
            cur_pos = -1;
        }
        if (pos != cur_pos) {
            push(TokenType::Position, pos);
            cur_pos = pos;
        }
        cur_time = t;
    }

    void advance(TimeKind kind, std::int64_t t) {
        if (kind == TimeKind::TimeShift) advance_ts(t);
        else advance_pos(t);
    }
};

struct NoteEvent {
    std::int64_t time;
    int order;  // 0 = note-off, 1 = note-on
    int pitch;
    int vel_bin;
};

}  // namespace

TokenSequence tokenize(const score::Score& s, const Vocabulary& vocab) {
    const Scheme scheme = vocab.scheme();
    Emitter em{vocab};
    em.seq.scheme_name = scheme.name();
    em.seq.vocab_hash = vocab.hash();
    em.seq.ids.push_back(kBos);
    if (scheme.time == TimeKind::BarPosition) {
        em.push(TokenType::Bar, 0);
        em.cur_bar = 0;
    }

    if (scheme.duration == DurationKind::Duration) {
        for (const auto& q : s.notes) {
            em.advance(scheme.time, q.onset_units);
            em.push(TokenType::Pitch, q.pitch);
            em.push(TokenType::Velocity, q.vel_bin);
            em.push(TokenType::Duration, q.duration_units);
        }
    } else {
        std::vector<NoteEvent> events;
        events.reserve(s.notes.size() * 2);
        for (const auto& q : s.notes) {
            events.push_back({q.onset_units, 1, q.pitch, q.vel_bin});
            events.push_back({q.onset_units + q.duration_units, 0, q.pitch, 0});
        }
        // Note-offs precede note-ons at equal time; ties by ascending pitch.
        std::sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
            return std::tie(a.time, a.order, a.pitch) < std::tie(b.time, b.order, b.pitch);
        });
        for (const auto& e : events) {
            em.advance(scheme.time, e.time);
            if (e.order == 1) {
                em.push(TokenType::NoteOn, e.pitch);
                em.push(TokenType::Velocity, e.vel_bin);
            } else {
                em.push(TokenType::NoteOff, e.pitch);
            }
        }
    }
    em.seq.ids.push_back(kEos);
    return em.seq;
}

DetokenizeResult detokenize(const TokenSequence& seq, const Vocabulary& vocab,
                            ErrorPolicy policy) {
    if (seq.is_bpe) throw BpeNotDecoded("sequence is BPE-encoded; decode it first");
    return detail::run_token_machine(seq.ids, vocab, policy == ErrorPolicy::Strict);
}

nlohmann::json sequence_to_json(const TokenSequence& seq) {
    return nlohmann::json{{"scheme", seq.scheme_name},
                          {"vocab_hash", hash_to_hex(seq.vocab_hash)},
                          {"is_bpe", seq.is_bpe},
                          {"ids", seq.ids}};
}

TokenSequence sequence_from_json(const nlohmann::json& j) {
    TokenSequence seq;
    seq.scheme_name = j.at("scheme").get<std::string>();
    seq.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
    seq.is_bpe = j.at("is_bpe").get<bool>();
    seq.ids = j.at("ids").get<std::vector<int>>();
    return seq;
}

nlohmann::json vocab_to_json(const Vocabulary& vocab) {
    nlohmann::json arr = nlohmann::json::array();
    for (int id = 0; id < vocab.size(); ++id) {
        const auto& s = vocab.spec(id);
        arr.push_back({{"id", id},
                       {"type", std::string(token_type_name(s.type))},
                       {"value", s.value}});
    }
    return arr;
}

std::string hash_to_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mtf::tok
