#ifndef MTF_TSE_HPP
#define MTF_TSE_HPP

#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mtf/tok.hpp"
#include "mtf/tse_report.hpp"

namespace mtf::tse {

// Fixed per-scheme successor grammar over token types. Total: every type in
// the scheme's vocabulary has an entry (an empty set means nothing may
// follow, e.g. EOS and the non-structural specials).
struct GrammarTable {
    tok::Scheme scheme;
    std::map<tok::TokenType, std::set<tok::TokenType>> allowed;

    bool legal(tok::TokenType prev, tok::TokenType next) const {
        auto it = allowed.find(prev);
        return it != allowed.end() && it->second.count(next) != 0;
    }
};

GrammarTable grammar_for(tok::Scheme scheme);

// Single left-to-right pass over a base-token sequence, tracking time, bar,
// position and active notes, counting the five error categories.
TseReport validate(const tok::TokenSequence& seq, const tok::Vocabulary& vocab);

nlohmann::json report_to_json(const TseReport& report);
std::string report_to_csv(const TseReport& report);

}  // namespace mtf::tse

#endif
