#ifndef MTF_TOK_HPP
#define MTF_TOK_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtf/score.hpp"
#include "mtf/tse_report.hpp"

namespace mtf::tok {

enum class TimeKind { TimeShift, BarPosition };
enum class DurationKind { Duration, NoteOff };

// The four combinations of time and duration representations:
// ts-dur (Structured-style), ts-noff (MIDI-Like-style), pos-dur (REMI-style),
// pos-noff.
struct Scheme {
    TimeKind time = TimeKind::TimeShift;
    DurationKind duration = DurationKind::Duration;

    bool operator==(const Scheme&) const = default;

    std::string name() const;
    static std::optional<Scheme> from_name(std::string_view name);
    static std::array<Scheme, 4> all();
};

enum class TokenType {
    PAD = 0,
    BOS,
    EOS,
    MASK,
    SEP,
    Pitch,
    NoteOn,
    NoteOff,
    Velocity,
    Duration,
    TimeShift,
    Bar,
    Position,
};

std::string_view token_type_name(TokenType t);
std::optional<TokenType> token_type_from_name(std::string_view name);

struct TokenSpec {
    TokenType type = TokenType::PAD;
    int value = 0;

    auto operator<=>(const TokenSpec&) const = default;
};

struct TokenizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TokenGrammarError : TokenizeError {
    std::size_t index;
    tse::ErrorCategory category;
    TokenGrammarError(std::size_t idx, tse::ErrorCategory cat);
};

struct BpeNotDecoded : TokenizeError {
    using TokenizeError::TokenizeError;
};

// Special token ids, fixed for every scheme.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kMask = 3;
inline constexpr int kSep = 4;
inline constexpr int kNumSpecials = 5;

class Vocabulary {
public:
    static Vocabulary build(Scheme scheme);

    Scheme scheme() const { return scheme_; }
    int size() const { return static_cast<int>(specs_.size()); }
    const TokenSpec& spec(int id) const { return specs_.at(id); }
    bool contains(TokenSpec s) const { return ids_.count(s) != 0; }
    int id_of(TokenSpec s) const;  // throws TokenizeError on unknown spec
    std::uint64_t hash() const { return hash_; }

    const std::vector<TokenSpec>& specs() const { return specs_; }
    // Token types present in this vocabulary, in id order (specials first).
    std::vector<TokenType> types() const;

private:
    Scheme scheme_;
    std::vector<TokenSpec> specs_;
    std::map<TokenSpec, int> ids_;
    std::uint64_t hash_ = 0;
};

struct TokenSequence {
    std::vector<int> ids;
    std::string scheme_name;
    std::uint64_t vocab_hash = 0;
    bool is_bpe = false;

    bool operator==(const TokenSequence&) const = default;
};

enum class ErrorPolicy { Lenient, Strict };

// Encodes a Score; output starts with BOS, ends with EOS, and satisfies the
// scheme's successor grammar.
TokenSequence tokenize(const score::Score& s, const Vocabulary& vocab);

struct DetokenizeResult {
    score::Score score;
    tse::TseReport report;
};

// Decodes a base-token sequence back to a Score. Lenient policy skips and
// tallies invalid tokens; Strict throws TokenGrammarError at the first one.
DetokenizeResult detokenize(const TokenSequence& seq, const Vocabulary& vocab,
                            ErrorPolicy policy = ErrorPolicy::Lenient);

nlohmann::json sequence_to_json(const TokenSequence& seq);
TokenSequence sequence_from_json(const nlohmann::json& j);
nlohmann::json vocab_to_json(const Vocabulary& vocab);

std::string hash_to_hex(std::uint64_t h);

}  // namespace mtf::tok

#endif
