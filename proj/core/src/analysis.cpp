#include "mtf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mtf::analysis {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string_view kind_name(HistKind k) {
    switch (k) {
        case HistKind::OnsetPosition: return "onset_position";
        case HistKind::OffsetPosition: return "offset_position";
        case HistKind::Duration: return "duration";
        case HistKind::CosineSimilarity: return "cosine_similarity";
    }
    return "unknown";
}

int duration_bin(int units) {
    for (std::size_t i = 0; i < score::kDurationGrid.size(); ++i)
        if (score::kDurationGrid[i] == units) return static_cast<int>(i);
    return -1;
}

}  // namespace

std::int64_t Histogram::total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::vector<double> Histogram::density() const {
    std::vector<double> d(counts.size(), 0.0);
    const std::int64_t t = total();
    if (t == 0) return d;
    for (std::size_t i = 0; i < counts.size(); ++i)
        d[i] = static_cast<double>(counts[i]) / static_cast<double>(t);
    return d;
}

std::string Histogram::bin_label(std::size_t i) const {
    switch (kind) {
        case HistKind::Duration:
            return std::to_string(score::kDurationGrid[i]);
        case HistKind::CosineSimilarity: {
            double w = (hi - lo) / static_cast<double>(counts.size());
            return fmt(lo + (static_cast<double>(i) + 0.5) * w);
        }
        default:
            return std::to_string(i);
    }
}

Histograms note_histograms(std::span<const score::Score> scores) {
    Histograms h;
    h.onset = {HistKind::OnsetPosition, std::vector<std::int64_t>(score::kUnitsPerBar, 0)};
    h.offset = {HistKind::OffsetPosition, std::vector<std::int64_t>(score::kUnitsPerBar, 0)};
    h.duration = {HistKind::Duration,
                  std::vector<std::int64_t>(score::kDurationGrid.size(), 0)};
    for (const auto& s : scores) {
        for (const auto& q : s.notes) {
            ++h.onset.counts[q.onset_units % score::kUnitsPerBar];
            ++h.offset.counts[(q.onset_units + q.duration_units) % score::kUnitsPerBar];
            int db = duration_bin(q.duration_units);
            if (db >= 0) ++h.duration.counts[db];
        }
    }
    return h;
}

SuccessionMatrix succession_matrix(const std::vector<tok::TokenSequence>& seqs,
                                   const tok::Vocabulary& vocab) {
    SuccessionMatrix m;
    m.types = vocab.types();
    const std::size_t n = m.types.size();
    std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(n, 0));
    auto type_index = [&](tok::TokenType t) -> int {
        auto it = std::find(m.types.begin(), m.types.end(), t);
        return it == m.types.end() ? -1 : static_cast<int>(it - m.types.begin());
    };

    for (const auto& seq : seqs) {
        if (seq.is_bpe) throw BpeNotDecoded("sequence is BPE-encoded; decode it first");
        for (std::size_t i = 0; i + 1 < seq.ids.size(); ++i) {
            int a = seq.ids[i], b = seq.ids[i + 1];
            if (a < 0 || a >= vocab.size() || b < 0 || b >= vocab.size()) continue;
            int ra = type_index(vocab.spec(a).type);
            int rb = type_index(vocab.spec(b).type);
            if (ra >= 0 && rb >= 0) ++counts[ra][rb];
        }
    }

    m.rows.assign(n, std::vector<double>(n, 0.0));
    m.row_totals.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        std::int64_t t = 0;
        for (auto c : counts[r]) t += c;
        m.row_totals[r] = t;
        if (t == 0) continue;
        for (std::size_t c = 0; c < n; ++c)
            m.rows[r][c] = static_cast<double>(counts[r][c]) / static_cast<double>(t);
    }
    return m;
}

namespace {

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin,count,density\n";
    auto d = h.density();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += h.bin_label(i);
        out += ',';
        out += std::to_string(h.counts[i]);
        out += ',';
        out += fmt(d[i]);
        out += '\n';
    }
    return out;
}

nlohmann::json histogram_json(const Histogram& h) {
    nlohmann::json j{{"kind", std::string(kind_name(h.kind))},
                     {"counts", h.counts},
                     {"density", h.density()}};
    if (h.kind == HistKind::CosineSimilarity) {
        j["lo"] = h.lo;
        j["hi"] = h.hi;
    }
    return j;
}

constexpr int kSvgW = 640;
constexpr int kSvgH = 320;

std::string svg_open() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 320\" "
           "width=\"640\" height=\"320\">\n";
}

std::string histogram_svg(const Histogram& h) {
    auto d = h.density();
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, v);
    if (dmax <= 0.0) dmax = 1.0;
    const std::size_t n = h.counts.size();
    const double bw = static_cast<double>(kSvgW) / static_cast<double>(n);
    std::string out = svg_open();
    for (std::size_t i = 0; i < n; ++i) {
        double frac = d[i] / dmax;
        double bh = frac * (kSvgH - 20);
        out += "<rect x=\"" + fmt(i * bw + 1) + "\" y=\"" + fmt(kSvgH - bh) + "\" width=\"" +
               fmt(bw - 2 > 0 ? bw - 2 : bw) + "\" height=\"" + fmt(bh) +
               "\" fill=\"#4878a8\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string matrix_csv(const SuccessionMatrix& m) {
    std::string out = "from";
    for (auto t : m.types) {
        out += ',';
        out += tok::token_type_name(t);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.types.size(); ++r) {
        out += tok::token_type_name(m.types[r]);
        for (std::size_t c = 0; c < m.types.size(); ++c) {
            out += ',';
            out += fmt(m.rows[r][c]);
        }
        out += '\n';
    }
    return out;
}

nlohmann::json matrix_json(const SuccessionMatrix& m) {
    std::vector<std::string> names;
    for (auto t : m.types) names.emplace_back(tok::token_type_name(t));
    return nlohmann::json{
        {"types", names}, {"rows", m.rows}, {"row_totals", m.row_totals}};
}

std::string matrix_svg(const SuccessionMatrix& m) {
    const std::size_t n = m.types.size();
    std::string out = svg_open();
    if (n == 0) return out + "</svg>\n";
    const double cw = static_cast<double>(kSvgW) / static_cast<double>(n);
    const double ch = static_cast<double>(kSvgH) / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            // Linear grayscale ramp: 0 -> white, 1 -> black.
            int g = static_cast<int>(std::lround(255.0 * (1.0 - m.rows[r][c])));
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", g, g, g);
            out += "<rect x=\"" + fmt(c * cw) + "\" y=\"" + fmt(r * ch) + "\" width=\"" +
                   fmt(cw) + "\" height=\"" + fmt(ch) + "\" fill=\"" + color + "\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

std::string report_svg(const tse::TseReport& r) {
    std::string out = svg_open();
    const double bw = static_cast<double>(kSvgW) / 5.0;
    for (int i = 0; i < 5; ++i) {
        double frac = r.ratio(static_cast<tse::ErrorCategory>(i));
        double bh = frac * (kSvgH - 20);
        out += "<rect x=\"" + fmt(i * bw + 4) + "\" y=\"" + fmt(kSvgH - bh) + "\" width=\"" +
               fmt(bw - 8) + "\" height=\"" + fmt(bh) + "\" fill=\"#a85048\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace

std::string render(const Histogram& h, Format format) {
    switch (format) {
        case Format::Csv: return histogram_csv(h);
        case Format::Json: return histogram_json(h).dump(2) + "\n";
        case Format::Svg: return histogram_svg(h);
    }
    return {};
}

std::string render(const SuccessionMatrix& m, Format format) {
    switch (format) {
        case Format::Csv: return matrix_csv(m);
        case Format::Json: return matrix_json(m).dump(2) + "\n";
        case Format::Svg: return matrix_svg(m);
    }
    return {};
}

std::string render(const tse::TseReport& r, Format format) {
    switch (format) {
        case Format::Csv: return tse::report_to_csv(r);
        case Format::Json: return tse::report_to_json(r).dump(2) + "\n";
        case Format::Svg: return report_svg(r);
    }
    return {};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void emit(const Histogram& h, Format format, const std::filesystem::path& path) {
    write_file_atomic(path, render(h, format));
}
void emit(const SuccessionMatrix& m, Format format, const std::filesystem::path& path) {
    write_file_atomic(path, render(m, format));
}
void emit(const tse::TseReport& r, Format format, const std::filesystem::path& path) {
    write_file_atomic(path, render(r, format));
}

}  // namespace mtf::analysis
