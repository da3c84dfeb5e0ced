// mtf: symbolic-music tokenization pipeline.
//
// Subcommands: tokenize, detokenize, bpe-train, bpe-apply, validate, analyze,
// augment, embed-metrics, pipeline. Exit codes: 0 success, 1 total failure,
// 2 bad arguments.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtf/analysis.hpp"
#include "mtf/bpe.hpp"
#include "mtf/embed.hpp"
#include "mtf/score.hpp"
#include "mtf/smf.hpp"
#include "mtf/tok.hpp"
#include "mtf/tse.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- logging

enum class LogLevel { Error = 0, Warn, Info, Debug };

LogLevel g_log_level = [] {
    const char* env = std::getenv("MTF_LOG");
    if (!env) return LogLevel::Warn;
    std::string v = env;
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}();

void log(LogLevel lvl, const std::string& msg) {
    if (lvl > g_log_level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

// ------------------------------------------------------------------- util

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot open " + p.string());
    return json::parse(f);
}

void write_json(const fs::path& p, const json& j) {
    mtf::analysis::write_file_atomic(p, j.dump(2) + "\n");
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    mtf::analysis::write_file_atomic(p, std::string(bytes.begin(), bytes.end()));
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (fs::is_regular_file(dir)) {
        out.push_back(dir);
        return out;
    }
    if (!fs::is_directory(dir)) throw std::runtime_error("no such directory: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t fnv1a_bytes(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<int> parse_int_csv(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stoi(cell));
    }
    return out;
}

mtf::tok::Scheme scheme_or_throw(const std::string& name) {
    auto s = mtf::tok::Scheme::from_name(name);
    if (!s) throw CLI::ValidationError("--scheme", "unknown scheme: " + name);
    return *s;
}

mtf::analysis::Format format_or_throw(const std::string& name) {
    if (name == "csv") return mtf::analysis::Format::Csv;
    if (name == "json") return mtf::analysis::Format::Json;
    if (name == "svg") return mtf::analysis::Format::Svg;
    throw CLI::ValidationError("--format", "unknown format: " + name);
}

std::string format_ext(mtf::analysis::Format f) {
    switch (f) {
        case mtf::analysis::Format::Csv: return ".csv";
        case mtf::analysis::Format::Json: return ".json";
        case mtf::analysis::Format::Svg: return ".svg";
    }
    return ".dat";
}

// Deterministic file-level parallel map: results land in index order.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::size_t per = (n + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
        std::size_t lo = t * per, hi = std::min(n, lo + per);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

// Quantized ticks for writing decoded scores back to MIDI.
constexpr int kOutTpq = 96;  // 12 ticks per 1/8-beat unit

mtf::smf::RawSong score_to_song(const mtf::score::Score& s) {
    mtf::smf::RawSong song;
    song.ticks_per_quarter = kOutTpq;
    const int tpu = kOutTpq / mtf::score::kUnitsPerBeat;
    for (const auto& q : s.notes)
        song.notes.push_back({q.pitch, mtf::score::velocity_from_bin(q.vel_bin),
                              q.onset_units * tpu,
                              static_cast<std::int64_t>(q.duration_units) * tpu});
    return song;
}

struct LoadedSequences {
    std::vector<fs::path> paths;
    std::vector<mtf::tok::TokenSequence> seqs;
};

LoadedSequences load_sequences(const fs::path& input) {
    LoadedSequences out;
    for (const auto& p : list_files(input, ".json")) {
        json j = read_json(p);
        if (!j.contains("ids")) continue;  // summary or other artifact
        out.paths.push_back(p);
        out.seqs.push_back(mtf::tok::sequence_from_json(j));
    }
    if (out.seqs.empty()) throw std::runtime_error("no token files under " + input.string());
    return out;
}

// Decode BPE sequences in place; abort on scheme or vocab-hash mismatch.
void check_and_decode(LoadedSequences& in, const mtf::tok::Vocabulary& vocab,
                      const mtf::bpe::BpeModel* model) {
    for (std::size_t i = 0; i < in.seqs.size(); ++i) {
        auto& seq = in.seqs[i];
        if (seq.scheme_name != vocab.scheme().name())
            throw std::runtime_error(in.paths[i].string() + ": scheme mismatch (" +
                                     seq.scheme_name + ")");
        if (seq.vocab_hash != vocab.hash())
            throw std::runtime_error(in.paths[i].string() + ": vocabulary hash mismatch");
        if (seq.is_bpe) {
            if (!model)
                throw std::runtime_error(in.paths[i].string() +
                                         ": BPE-encoded but no --model supplied");
            seq = mtf::bpe::bpe_decode(seq, *model);
        }
    }
}

// ------------------------------------------------------------ subcommands

struct TokenizeOpts {
    std::string input, output, scheme = "ts-dur";
    int jobs = 1;
};

int cmd_tokenize(const TokenizeOpts& o) {
    auto scheme = scheme_or_throw(o.scheme);
    auto vocab = mtf::tok::Vocabulary::build(scheme);
    auto files = list_files(o.input, ".mid");
    fs::create_directories(o.output);

    struct Result {
        bool ok = false;
        std::string error;
        json entry;
        mtf::tok::TokenSequence seq;
    };
    std::vector<Result> results(files.size());
    parallel_for(files.size(), o.jobs, [&](std::size_t i) {
        Result& r = results[i];
        try {
            mtf::smf::ParseStats pstats;
            auto song = mtf::smf::parse_smf(read_bytes(files[i]), &pstats);
            mtf::score::QuantizeStats qstats;
            auto score = mtf::score::quantize(song, &qstats);
            r.seq = mtf::tok::tokenize(score, vocab);
            r.entry = {{"file", files[i].filename().string()},
                       {"notes", score.notes.size()},
                       {"dropped_pitch", qstats.dropped_pitch},
                       {"deduplicated", qstats.deduplicated},
                       {"unmatched_note_ons", pstats.unmatched_note_ons},
                       {"tokens", r.seq.ids.size()}};
            r.ok = true;
        } catch (const std::exception& ex) {
            r.error = ex.what();
        }
    });

    json summary;
    summary["scheme"] = scheme.name();
    summary["vocab_hash"] = mtf::tok::hash_to_hex(vocab.hash());
    summary["files"] = json::array();
    summary["failures"] = json::array();
    int ok_count = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (results[i].ok) {
            ++ok_count;
            fs::path out = fs::path(o.output) / (files[i].stem().string() + ".tokens.json");
            write_json(out, mtf::tok::sequence_to_json(results[i].seq));
            summary["files"].push_back(results[i].entry);
        } else {
            log(LogLevel::Warn, files[i].string() + ": " + results[i].error);
            summary["failures"].push_back(
                {{"file", files[i].filename().string()}, {"error", results[i].error}});
        }
    }
    write_json(fs::path(o.output) / "summary.json", summary);
    if (ok_count == 0 && !files.empty()) {
        log(LogLevel::Error, "all input files failed to tokenize");
        return 1;
    }
    return 0;
}

struct DetokenizeOpts {
    std::string input, output, scheme = "ts-dur", policy = "lenient";
};

int cmd_detokenize(const DetokenizeOpts& o) {
    auto scheme = scheme_or_throw(o.scheme);
    auto vocab = mtf::tok::Vocabulary::build(scheme);
    auto policy = o.policy == "strict" ? mtf::tok::ErrorPolicy::Strict
                                       : mtf::tok::ErrorPolicy::Lenient;
    auto loaded = load_sequences(o.input);
    check_and_decode(loaded, vocab, nullptr);
    fs::create_directories(o.output);

    mtf::tse::TseReport aggregate;
    for (std::size_t i = 0; i < loaded.seqs.size(); ++i) {
        auto res = mtf::tok::detokenize(loaded.seqs[i], vocab, policy);
        aggregate += res.report;
        std::string stem = loaded.paths[i].stem().string();
        if (auto pos = stem.rfind(".tokens"); pos != std::string::npos) stem.resize(pos);
        write_bytes(fs::path(o.output) / (stem + ".mid"),
                    mtf::smf::write_smf(score_to_song(res.score)));
    }
    write_json(fs::path(o.output) / "tse_report.json", mtf::tse::report_to_json(aggregate));
    return 0;
}

struct BpeTrainOpts {
    std::string input, output, profile = "other";
    int bpe_size = 0;
};

int cmd_bpe_train(const BpeTrainOpts& o) {
    auto loaded = load_sequences(o.input);
    int target = o.bpe_size;
    if (target == 0) target = o.profile == "generation" ? 2000 : 5000;
    auto model = mtf::bpe::bpe_train(loaded.seqs, target);
    write_json(o.output, mtf::bpe::model_to_json(model));
    log(LogLevel::Info, "trained " + std::to_string(model.merges.size()) + " merges (base " +
                            std::to_string(model.base_vocab_size) + ")");
    return 0;
}

struct BpeApplyOpts {
    std::string input, output, model;
    bool decode = false;
};

int cmd_bpe_apply(const BpeApplyOpts& o) {
    auto model = mtf::bpe::model_from_json(read_json(o.model));
    auto loaded = load_sequences(o.input);
    fs::create_directories(o.output);
    for (std::size_t i = 0; i < loaded.seqs.size(); ++i) {
        auto out = o.decode ? mtf::bpe::bpe_decode(loaded.seqs[i], model)
                            : mtf::bpe::bpe_encode(loaded.seqs[i], model);
        write_json(fs::path(o.output) / loaded.paths[i].filename(),
                   mtf::tok::sequence_to_json(out));
    }
    return 0;
}

struct ValidateOpts {
    std::string input, output, scheme = "ts-dur", model, format = "json";
};

int cmd_validate(const ValidateOpts& o) {
    auto scheme = scheme_or_throw(o.scheme);
    auto vocab = mtf::tok::Vocabulary::build(scheme);
    auto loaded = load_sequences(o.input);
    std::optional<mtf::bpe::BpeModel> model;
    if (!o.model.empty()) model = mtf::bpe::model_from_json(read_json(o.model));
    check_and_decode(loaded, vocab, model ? &*model : nullptr);

    mtf::tse::TseReport aggregate;
    for (const auto& seq : loaded.seqs) aggregate += mtf::tse::validate(seq, vocab);
    std::cout << mtf::tse::report_to_csv(aggregate);
    if (!o.output.empty())
        mtf::analysis::emit(aggregate, format_or_throw(o.format), o.output);
    return 0;
}

struct AnalyzeOpts {
    std::string input, output, scheme = "ts-dur", model, format = "csv";
};

int cmd_analyze(const AnalyzeOpts& o) {
    auto scheme = scheme_or_throw(o.scheme);
    auto vocab = mtf::tok::Vocabulary::build(scheme);
    auto loaded = load_sequences(o.input);
    std::optional<mtf::bpe::BpeModel> model;
    if (!o.model.empty()) model = mtf::bpe::model_from_json(read_json(o.model));
    check_and_decode(loaded, vocab, model ? &*model : nullptr);
    fs::create_directories(o.output);
    auto format = format_or_throw(o.format);
    std::string ext = format_ext(format);

    std::vector<mtf::score::Score> scores;
    mtf::tse::TseReport aggregate;
    for (const auto& seq : loaded.seqs) {
        auto res = mtf::tok::detokenize(seq, vocab);
        aggregate += res.report;
        scores.push_back(std::move(res.score));
    }
    auto hist = mtf::analysis::note_histograms(scores);
    auto matrix = mtf::analysis::succession_matrix(loaded.seqs, vocab);
    fs::path out = o.output;
    mtf::analysis::emit(hist.onset, format, out / ("onset_positions" + ext));
    mtf::analysis::emit(hist.offset, format, out / ("offset_positions" + ext));
    mtf::analysis::emit(hist.duration, format, out / ("durations" + ext));
    mtf::analysis::emit(matrix, format, out / ("succession" + ext));
    mtf::analysis::emit(aggregate, format, out / ("tse_report" + ext));
    return 0;
}

struct AugmentOpts {
    std::string input, output;
    std::string pitch_offsets = "-24,-12,12,24";
    std::string vel_offsets = "-1,1";
};

int cmd_augment(const AugmentOpts& o) {
    auto pitch = parse_int_csv(o.pitch_offsets);
    auto vel = parse_int_csv(o.vel_offsets);
    fs::create_directories(o.output);
    int failures = 0, total = 0;
    for (const auto& p : list_files(o.input, ".mid")) {
        ++total;
        try {
            auto song = mtf::smf::parse_smf(read_bytes(p));
            auto base = mtf::score::quantize(song);
            // One augment call per offset so each variant file carries the
            // offset that produced it.
            auto emit_one = [&](const mtf::score::AugmentResult& one, char axis, int off) {
                if (one.skipped_empty)
                    log(LogLevel::Warn,
                        p.string() + ": empty variant for offset " + std::to_string(off));
                if (one.variants.empty()) return;
                std::string tag = std::string(".") + axis + (off > 0 ? "+" : "") +
                                  std::to_string(off);
                write_bytes(fs::path(o.output) / (p.stem().string() + tag + ".mid"),
                            mtf::smf::write_smf(score_to_song(one.variants.front())));
            };
            for (int off : pitch)
                if (off != 0) emit_one(mtf::score::augment(base, std::span(&off, 1), {}), 'p', off);
            for (int off : vel)
                if (off != 0) emit_one(mtf::score::augment(base, {}, std::span(&off, 1)), 'v', off);
        } catch (const std::exception& ex) {
            ++failures;
            log(LogLevel::Warn, p.string() + ": " + ex.what());
        }
    }
    return (failures == total && total > 0) ? 1 : 0;
}

struct EmbedOpts {
    std::string embeddings, paired, output;
    double tau = 0.0;
    int bins = 50;
    double lpca_alpha = 0.05;
    int mom_k = 20;
    double twonn_discard = 0.1;
};

int cmd_embed_metrics(const EmbedOpts& o) {
    auto e = mtf::embed::load_embeddings(o.embeddings);
    json out;
    out["n"] = e.n();
    out["d"] = e.d();

    auto ids = mtf::embed::estimate_all(e, o.lpca_alpha, o.mom_k, o.twonn_discard);
    out["intrinsic_dimension"] = {{"lpca", ids.lpca},
                                  {"mom", ids.mom},
                                  {"twonn", ids.twonn},
                                  {"fishers", ids.fishers},
                                  {"parameters",
                                   {{"lpca_alpha", ids.lpca_alpha},
                                    {"mom_k", ids.mom_k},
                                    {"twonn_discard", ids.twonn_discard},
                                    {"fishers_alpha", ids.fishers_alpha}}}};

    if (!o.paired.empty()) {
        auto zbar = mtf::embed::load_embeddings(o.paired);
        auto hist = mtf::embed::cosine_pair_density(e, zbar, o.bins);
        out["cosine_density"] = {{"bins", o.bins}, {"counts", hist.counts},
                                 {"density", hist.density()}};
        if (o.tau > 0.0) {
            auto rep = mtf::embed::contrastive_loss(e, zbar, o.tau);
            out["contrastive"] = {{"tau", rep.tau}, {"mean_loss", rep.mean_loss}};
        }
    }
    if (o.output.empty()) std::cout << out.dump(2) << "\n";
    else write_json(o.output, out);
    return 0;
}

struct PipelineOpts {
    std::string input, output, scheme = "all", format = "csv";
    std::string pitch_offsets = "-24,-12,12,24";
    std::string vel_offsets = "-1,1";
    int bpe_size = 0;
    std::string profile = "other";
    int seed = 42;
    int jobs = 1;
};

int run_pipeline_scheme(const PipelineOpts& o, mtf::tok::Scheme scheme,
                        const std::vector<fs::path>& files, json& manifest) {
    auto vocab = mtf::tok::Vocabulary::build(scheme);
    fs::path out = fs::path(o.output) / scheme.name();
    fs::create_directories(out / "tokens");
    auto format = format_or_throw(o.format);
    std::string ext = format_ext(format);

    auto pitch = parse_int_csv(o.pitch_offsets);
    auto vel = parse_int_csv(o.vel_offsets);

    struct Item {
        bool ok = false;
        std::string error;
        mtf::score::Score score;
        mtf::tok::TokenSequence seq;
        std::vector<mtf::tok::TokenSequence> augmented;
    };
    std::vector<Item> items(files.size());
    parallel_for(files.size(), o.jobs, [&](std::size_t i) {
        Item& it = items[i];
        try {
            auto song = mtf::smf::parse_smf(read_bytes(files[i]));
            it.score = mtf::score::quantize(song);
            it.seq = mtf::tok::tokenize(it.score, vocab);
            for (const auto& v : mtf::score::augment(it.score, pitch, vel).variants)
                it.augmented.push_back(mtf::tok::tokenize(v, vocab));
            it.ok = true;
        } catch (const std::exception& ex) {
            it.error = ex.what();
        }
    });

    std::vector<mtf::score::Score> scores;
    std::vector<mtf::tok::TokenSequence> originals, corpus;
    json failures = json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!items[i].ok) {
            log(LogLevel::Warn, files[i].string() + ": " + items[i].error);
            failures.push_back({{"file", files[i].filename().string()},
                                {"error", items[i].error}});
            continue;
        }
        scores.push_back(items[i].score);
        originals.push_back(items[i].seq);
        corpus.push_back(items[i].seq);
        for (auto& a : items[i].augmented) corpus.push_back(std::move(a));
        write_json(out / "tokens" / (files[i].stem().string() + ".tokens.json"),
                   mtf::tok::sequence_to_json(items[i].seq));
    }
    if (originals.empty()) {
        log(LogLevel::Error, "no usable inputs for scheme " + scheme.name());
        return 1;
    }

    write_json(out / "vocab.json", mtf::tok::vocab_to_json(vocab));

    int target = o.bpe_size;
    if (target == 0) target = o.profile == "generation" ? 2000 : 5000;
    auto model = mtf::bpe::bpe_train(corpus, target);
    write_json(out / "bpe.json", mtf::bpe::model_to_json(model));
    fs::create_directories(out / "tokens_bpe");
    for (std::size_t i = 0, j = 0; i < files.size(); ++i) {
        if (!items[i].ok) continue;
        write_json(out / "tokens_bpe" / (files[i].stem().string() + ".tokens.json"),
                   mtf::tok::sequence_to_json(mtf::bpe::bpe_encode(originals[j++], model)));
    }

    auto hist = mtf::analysis::note_histograms(scores);
    mtf::analysis::emit(hist.onset, format, out / ("onset_positions" + ext));
    mtf::analysis::emit(hist.offset, format, out / ("offset_positions" + ext));
    mtf::analysis::emit(hist.duration, format, out / ("durations" + ext));
    mtf::analysis::emit(mtf::analysis::succession_matrix(originals, vocab), format,
                        out / ("succession" + ext));
    mtf::tse::TseReport aggregate;
    for (const auto& seq : originals) aggregate += mtf::tse::validate(seq, vocab);
    mtf::analysis::emit(aggregate, format, out / ("tse_report" + ext));

    // Hash every artifact under this scheme directory into the manifest.
    std::vector<fs::path> artifacts;
    for (const auto& e : fs::recursive_directory_iterator(out))
        if (e.is_regular_file()) artifacts.push_back(e.path());
    std::sort(artifacts.begin(), artifacts.end());
    json hashes;
    for (const auto& p : artifacts) {
        auto bytes = read_bytes(p);
        hashes[fs::relative(p, o.output).generic_string()] = mtf::tok::hash_to_hex(
            fnv1a_bytes(std::string(bytes.begin(), bytes.end())));
    }
    manifest["schemes"][scheme.name()] = {{"files", originals.size()},
                                          {"augmented", corpus.size() - originals.size()},
                                          {"bpe_merges", model.merges.size()},
                                          {"failures", failures},
                                          {"artifacts", hashes}};
    return 0;
}

int cmd_pipeline(const PipelineOpts& o) {
    auto files = list_files(o.input, ".mid");
    if (files.empty()) throw std::runtime_error("no .mid files under " + o.input);
    fs::create_directories(o.output);

    json manifest;
    manifest["config"] = {{"scheme", o.scheme},
                          {"bpe_size", o.bpe_size},
                          {"profile", o.profile},
                          {"pitch_offsets", o.pitch_offsets},
                          {"vel_offsets", o.vel_offsets},
                          {"seed", o.seed},
                          {"format", o.format},
                          {"inputs", [&] {
                               json a = json::array();
                               for (const auto& p : files) a.push_back(p.filename().string());
                               return a;
                           }()}};

    std::vector<mtf::tok::Scheme> schemes;
    if (o.scheme == "all")
        for (auto s : mtf::tok::Scheme::all()) schemes.push_back(s);
    else
        schemes.push_back(scheme_or_throw(o.scheme));

    for (auto scheme : schemes)
        if (int rc = run_pipeline_scheme(o, scheme, files, manifest); rc != 0) return rc;

    // Overall hash over the per-artifact hashes, stable across runs.
    manifest["manifest_hash"] =
        mtf::tok::hash_to_hex(fnv1a_bytes(manifest["schemes"].dump()));
    write_json(fs::path(o.output) / "manifest.json", manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic-music tokenization toolkit"};
    app.require_subcommand(1);

    TokenizeOpts tok_o;
    auto* tok_c = app.add_subcommand("tokenize", "Tokenize a directory of MIDI files");
    tok_c->add_option("-i,--input", tok_o.input, "Input .mid file or directory")->required();
    tok_c->add_option("-o,--output", tok_o.output, "Output directory")->required();
    tok_c->add_option("--scheme", tok_o.scheme, "ts-dur | ts-noff | pos-dur | pos-noff");
    tok_c->add_option("--jobs", tok_o.jobs, "Worker threads");

    DetokenizeOpts detok_o;
    auto* detok_c = app.add_subcommand("detokenize", "Decode token files back to MIDI");
    detok_c->add_option("-i,--input", detok_o.input, "Token file or directory")->required();
    detok_c->add_option("-o,--output", detok_o.output, "Output directory")->required();
    detok_c->add_option("--scheme", detok_o.scheme, "Tokenization scheme");
    detok_c->add_option("--policy", detok_o.policy, "strict | lenient");

    BpeTrainOpts bt_o;
    auto* bt_c = app.add_subcommand("bpe-train", "Learn a BPE merge table");
    bt_c->add_option("-i,--input", bt_o.input, "Token file directory")->required();
    bt_c->add_option("-o,--output", bt_o.output, "Model JSON path")->required();
    bt_c->add_option("--bpe-size", bt_o.bpe_size, "Target vocabulary size");
    bt_c->add_option("--profile", bt_o.profile,
                     "generation (2k default) | other (5k default)");

    BpeApplyOpts ba_o;
    auto* ba_c = app.add_subcommand("bpe-apply", "Apply (or invert) a BPE model");
    ba_c->add_option("-i,--input", ba_o.input, "Token file directory")->required();
    ba_c->add_option("-o,--output", ba_o.output, "Output directory")->required();
    ba_c->add_option("--model", ba_o.model, "Model JSON path")->required();
    ba_c->add_flag("--decode", ba_o.decode, "Decode instead of encode");

    ValidateOpts val_o;
    auto* val_c = app.add_subcommand("validate", "Token Syntax Error report");
    val_c->add_option("-i,--input", val_o.input, "Token file or directory")->required();
    val_c->add_option("-o,--output", val_o.output, "Report output path");
    val_c->add_option("--scheme", val_o.scheme, "Tokenization scheme");
    val_c->add_option("--model", val_o.model, "BPE model (auto-decodes inputs)");
    val_c->add_option("--format", val_o.format, "csv | json | svg");

    AnalyzeOpts an_o;
    auto* an_c = app.add_subcommand("analyze", "Histograms, succession matrix, TSE");
    an_c->add_option("-i,--input", an_o.input, "Token file directory")->required();
    an_c->add_option("-o,--output", an_o.output, "Output directory")->required();
    an_c->add_option("--scheme", an_o.scheme, "Tokenization scheme");
    an_c->add_option("--model", an_o.model, "BPE model (auto-decodes inputs)");
    an_c->add_option("--format", an_o.format, "csv | json | svg");

    AugmentOpts aug_o;
    auto* aug_c = app.add_subcommand("augment", "Pitch/velocity augmentation variants");
    aug_c->add_option("-i,--input", aug_o.input, "Input .mid directory")->required();
    aug_c->add_option("-o,--output", aug_o.output, "Output directory")->required();
    aug_c->add_option("--pitch-offsets", aug_o.pitch_offsets, "Comma-separated semitones");
    aug_c->add_option("--vel-offsets", aug_o.vel_offsets, "Comma-separated bin offsets");

    EmbedOpts em_o;
    auto* em_c = app.add_subcommand("embed-metrics", "Embedding-space metrics");
    em_c->add_option("--embeddings", em_o.embeddings, "EMB1 or CSV file")->required();
    em_c->add_option("--paired", em_o.paired, "Paired embeddings (cosine/contrastive)");
    em_c->add_option("--tau", em_o.tau, "Contrastive temperature (> 0 enables the loss)");
    em_c->add_option("--bins", em_o.bins, "Cosine histogram bins");
    em_c->add_option("--lpca-alpha", em_o.lpca_alpha, "lPCA eigenvalue threshold");
    em_c->add_option("--mom-k", em_o.mom_k, "MOM neighbor count");
    em_c->add_option("--twonn-discard", em_o.twonn_discard, "TwoNN discard fraction");
    em_c->add_option("-o,--output", em_o.output, "Report JSON path");

    PipelineOpts pipe_o;
    auto* pipe_c = app.add_subcommand("pipeline", "Corpus to full artifact set");
    pipe_c->add_option("-i,--input", pipe_o.input, "Corpus .mid directory")->required();
    pipe_c->add_option("-o,--output", pipe_o.output, "Run directory")->required();
    pipe_c->add_option("--scheme", pipe_o.scheme, "Scheme name or 'all'");
    pipe_c->add_option("--bpe-size", pipe_o.bpe_size, "BPE target size (0 = profile default)");
    pipe_c->add_option("--profile", pipe_o.profile, "generation | other");
    pipe_c->add_option("--pitch-offsets", pipe_o.pitch_offsets, "Comma-separated semitones");
    pipe_c->add_option("--vel-offsets", pipe_o.vel_offsets, "Comma-separated bin offsets");
    pipe_c->add_option("--seed", pipe_o.seed, "Run seed (recorded in manifest)");
    pipe_c->add_option("--jobs", pipe_o.jobs, "Worker threads");
    pipe_c->add_option("--format", pipe_o.format, "csv | json | svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (tok_c->parsed()) return cmd_tokenize(tok_o);
        if (detok_c->parsed()) return cmd_detokenize(detok_o);
        if (bt_c->parsed()) return cmd_bpe_train(bt_o);
        if (ba_c->parsed()) return cmd_bpe_apply(ba_o);
        if (val_c->parsed()) return cmd_validate(val_o);
        if (an_c->parsed()) return cmd_analyze(an_o);
        if (aug_c->parsed()) return cmd_augment(aug_o);
        if (em_c->parsed()) return cmd_embed_metrics(em_o);
        if (pipe_c->parsed()) return cmd_pipeline(pipe_o);
    } catch (const std::exception& ex) {
        log(LogLevel::Error, ex.what());
        return 1;
    }
    return 2;
}
