#ifndef MTF_BPE_HPP
#define MTF_BPE_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtf/tok.hpp"

namespace mtf::bpe {

struct BpeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TargetTooSmall : BpeError {
    using BpeError::BpeError;
};
struct VocabMismatch : BpeError {
    using BpeError::BpeError;
};
struct UnknownId : BpeError {
    using BpeError::BpeError;
};

struct BpeModel {
    int base_vocab_size = 0;
    std::vector<std::pair<int, int>> merges;  // merge i creates id base+i
    int target_size = 0;

    int size() const { return base_vocab_size + static_cast<int>(merges.size()); }
};

// Learns merges over adjacent id pairs: most frequent first, ties broken by
// smallest (left, right); pairs containing special ids are ineligible; stops
// at target_size or when the best pair occurs fewer than 2 times.
BpeModel bpe_train(const std::vector<tok::TokenSequence>& corpus, int target_size);

// Applies merges in learned order, each pass replacing non-overlapping
// left-to-right occurrences.
tok::TokenSequence bpe_encode(const tok::TokenSequence& seq, const BpeModel& model);

// Expands merged ids back to base ids; inverse of bpe_encode.
tok::TokenSequence bpe_decode(const tok::TokenSequence& seq, const BpeModel& model);

nlohmann::json model_to_json(const BpeModel& model);
BpeModel model_from_json(const nlohmann::json& j);

}  // namespace mtf::bpe

#endif
