#ifndef MTF_TSE_REPORT_HPP
#define MTF_TSE_REPORT_HPP

#include <array>
#include <cstdint>
#include <string_view>

namespace mtf::tse {

enum class ErrorCategory { Type = 0, Time, DupN, NNon, NNof };

inline constexpr std::array<std::string_view, 5> kCategoryNames = {
    "type", "time", "dupn", "nnon", "nnof"};

struct TseReport {
    std::array<std::int64_t, 5> counts = {0, 0, 0, 0, 0};
    std::int64_t total_tokens = 0;  // BOS excluded

    std::int64_t count(ErrorCategory c) const {
        return counts[static_cast<int>(c)];
    }
    double ratio(ErrorCategory c) const {
        return total_tokens > 0
                   ? static_cast<double>(count(c)) / static_cast<double>(total_tokens)
                   : 0.0;
    }
    std::int64_t total_errors() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
    bool clean() const { return total_errors() == 0; }

    // Componentwise merge for corpus-level aggregation.
    TseReport& operator+=(const TseReport& o) {
        for (int i = 0; i < 5; ++i) counts[i] += o.counts[i];
        total_tokens += o.total_tokens;
        return *this;
    }
};

}  // namespace mtf::tse

#endif
