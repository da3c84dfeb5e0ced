#ifndef MTF_ANALYSIS_HPP
#define MTF_ANALYSIS_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtf/score.hpp"
#include "mtf/tok.hpp"
#include "mtf/tse.hpp"

namespace mtf::analysis {

enum class HistKind { OnsetPosition, OffsetPosition, Duration, CosineSimilarity };

struct Histogram {
    HistKind kind = HistKind::OnsetPosition;
    std::vector<std::int64_t> counts;
    // Value range, CosineSimilarity only (equal-width bins over [lo, hi]).
    double lo = 0.0;
    double hi = 0.0;

    std::int64_t total() const;
    // Counts normalized to sum 1; all-zero when there are no observations.
    std::vector<double> density() const;
    std::string bin_label(std::size_t i) const;
};

struct SuccessionMatrix {
    std::vector<tok::TokenType> types;       // id order for the scheme
    std::vector<std::vector<double>> rows;   // each observed row sums to 1
    std::vector<std::int64_t> row_totals;    // 0 marks a never-observed row
};

struct Histograms {
    Histogram onset;     // 32 position bins, onset mod 32
    Histogram offset;    // 32 position bins, (onset+duration) mod 32
    Histogram duration;  // 20 bins indexed by kDurationGrid
};

Histograms note_histograms(std::span<const score::Score> scores);

struct BpeNotDecoded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transition counts over consecutive token types, BOS/EOS included.
SuccessionMatrix succession_matrix(const std::vector<tok::TokenSequence>& seqs,
                                   const tok::Vocabulary& vocab);

enum class Format { Csv, Json, Svg };

// Byte-deterministic emission; SVG is a self-contained 640x320 bar chart
// (histograms) or grayscale grid heatmap (matrices).
void emit(const Histogram& h, Format format, const std::filesystem::path& path);
void emit(const SuccessionMatrix& m, Format format, const std::filesystem::path& path);
void emit(const tse::TseReport& r, Format format, const std::filesystem::path& path);

std::string render(const Histogram& h, Format format);
std::string render(const SuccessionMatrix& m, Format format);
std::string render(const tse::TseReport& r, Format format);

// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mtf::analysis

#endif
