#ifndef MTF_DECODE_MACHINE_HPP
#define MTF_DECODE_MACHINE_HPP

#include "mtf/tok.hpp"

namespace mtf::detail {

// Shared lenient/strict decode pass used by tok::detokenize and
// tse::validate, so both report identical error counts.
tok::DetokenizeResult run_token_machine(const std::vector<int>& ids,
                                        const tok::Vocabulary& vocab, bool strict);

}  // namespace mtf::detail

#endif
