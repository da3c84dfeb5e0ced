// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "mtf/analysis.hpp"
#include "mtf/bpe.hpp"
#include "mtf/embed.hpp"
#include "mtf/smf.hpp"
#include "mtf/tok.hpp"
#include "mtf/tse.hpp"

using namespace mtf;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* label, bool ok, const std::string& detail = "") {
    std::printf("[%s] %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, label,
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

void criterion_roundtrip() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(1001);
    bool ok = true;
    for (auto scheme : tok::Scheme::all()) {
        auto v = tok::Vocabulary::build(scheme);
        for (int i = 0; i < 1000 && ok; ++i) {
            auto s = test::random_score(rng);
            auto seq = tok::tokenize(s, v);
            auto res = tok::detokenize(seq, v);
            if (!(res.score == s) || !res.report.clean() || !tse::validate(seq, v).clean())
                ok = false;
        }
    }
    double el = seconds_since(t0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "4x1000 scores in %.1fs", el);
    report(1, "tokenize/detokenize round-trip", ok && el < 60.0, buf);
}

// ---------------------------------------------------------------- criterion 2

void criterion_fault_injection() {
    const int k = 10;
    bool ok = true;
    std::string detail;
    for (auto scheme : tok::Scheme::all()) {
        auto v = tok::Vocabulary::build(scheme);
        auto base = tok::tokenize(test::injection_fixture(), v);
        for (auto cat : test::applicable_categories(scheme)) {
            auto bad = test::inject_faults(base, v, cat, k);
            auto r = tse::validate(bad, v);
            if (r.count(cat) != k || r.total_errors() != k) {
                ok = false;
                detail = scheme.name() + "/" +
                         std::string(tse::kCategoryNames[static_cast<int>(cat)]);
            }
        }
    }
    report(2, "TSE fault injection, K=10 per applicable category", ok, detail);
}

// ---------------------------------------------------------------- criterion 3

void criterion_bpe() {
    bool ok = true;
    std::mt19937 rng(1003);

    // Identity and determinism on tokenizer output.
    auto v = tok::Vocabulary::build(*tok::Scheme::from_name("pos-noff"));
    std::vector<tok::TokenSequence> corpus;
    for (int i = 0; i < 50; ++i)
        corpus.push_back(tok::tokenize(test::random_score(rng), v));
    auto model = bpe::bpe_train(corpus, v.size() + 60);
    auto model2 = bpe::bpe_train(corpus, v.size() + 60);
    if (model.merges != model2.merges) ok = false;
    for (int i = 0; i < 1000 && ok; ++i) {
        auto seq = tok::tokenize(test::random_score(rng), v);
        if (bpe::bpe_decode(bpe::bpe_encode(seq, model), model).ids != seq.ids) ok = false;
    }

    // Compression on a motif corpus.
    std::uniform_int_distribution<int> motif_d(0, 9);
    std::vector<tok::TokenSequence> motifs_corpus;
    std::int64_t base_len = 0;
    for (int s = 0; s < 20; ++s) {
        tok::TokenSequence seq;
        seq.scheme_name = "raw";
        seq.ids.push_back(tok::kBos);
        for (int i = 0; i < 60; ++i) {
            int m = motif_d(rng);
            for (int t = 0; t < 4; ++t) seq.ids.push_back(10 + m * 4 + t);
        }
        seq.ids.push_back(tok::kEos);
        base_len += static_cast<std::int64_t>(seq.ids.size());
        motifs_corpus.push_back(std::move(seq));
    }
    auto probe = bpe::bpe_train(motifs_corpus, 10000);  // learns base size
    auto mm = bpe::bpe_train(motifs_corpus, probe.base_vocab_size + 50);
    std::int64_t enc_len = 0;
    for (const auto& s : motifs_corpus)
        enc_len += static_cast<std::int64_t>(bpe::bpe_encode(s, mm).ids.size());
    double ratio = static_cast<double>(base_len) / static_cast<double>(enc_len);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "compression %.2fx", ratio);
    report(3, "BPE identity, determinism, compression", ok && ratio >= 1.5, buf);
}

// ---------------------------------------------------------------- criterion 4

void criterion_smf() {
    bool ok = true;
    std::mt19937 rng(1004);

    // bytes -> notes -> bytes -> notes.
    for (int i = 0; i < 200 && ok; ++i) {
        auto song = test::random_song(rng);
        auto bytes = smf::write_smf(song);
        auto notes1 = smf::parse_smf(bytes);
        auto notes2 = smf::parse_smf(smf::write_smf(notes1));
        if (!(notes1.notes == notes2.notes) || !(notes1.notes == song.notes)) ok = false;
    }

    std::uniform_int_distribution<int> len(0, 300);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 100000; ++i) {
        std::vector<std::uint8_t> bytes(len(rng));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(byte(rng));
        if (i % 2 == 0 && bytes.size() >= 8) {
            bytes[0] = 'M'; bytes[1] = 'T'; bytes[2] = 'h'; bytes[3] = 'd';
        }
        try {
            smf::parse_smf(bytes);
        } catch (const smf::SmfError&) {
            // rejected input; any other escape terminates the process
        }
    }
    report(4, "SMF round-trip and 1e5-input fuzz", ok);
}

// ---------------------------------------------------------------- criterion 5

void criterion_histograms() {
    // Pop-like corpus: every bar has a downbeat note, other even 1/8-beat
    // positions are sparser, odd positions empty.
    std::mt19937 rng(1005);
    std::uniform_int_distribution<int> coin(0, 2);
    std::vector<score::Score> corpus;
    for (int f = 0; f < 100; ++f) {
        score::Score s;
        for (int bar = 0; bar < 8; ++bar) {
            for (int pos = 0; pos < 32; pos += 4) {
                if (pos != 0 && coin(rng) != 0) continue;  // downbeat always present
                score::QNote q;
                q.pitch = 60 + (pos / 4);
                q.vel_bin = 4;
                q.onset_units = bar * 32 + pos;
                q.duration_units = score::kDurationGrid[pos / 4 % 8];
                s.notes.push_back(q);
            }
        }
        corpus.push_back(std::move(s));
    }
    auto h = analysis::note_histograms(corpus);
    bool ok = h.onset.counts.size() == 32 && h.duration.counts.size() == 20;
    for (std::size_t i = 1; i < h.onset.counts.size() && ok; ++i)
        if (h.onset.counts[i] >= h.onset.counts[0]) ok = false;
    double sum = 0.0;
    for (double d : h.onset.density()) sum += d;
    ok = ok && std::abs(sum - 1.0) <= 1e-9;
    report(5, "onset/duration histogram structure", ok);
}

// ---------------------------------------------------------------- criterion 6

void criterion_succession() {
    std::mt19937 rng(1006);
    bool ok = true;
    for (auto scheme : tok::Scheme::all()) {
        auto v = tok::Vocabulary::build(scheme);
        auto g = tse::grammar_for(scheme);
        std::vector<tok::TokenSequence> seqs;
        for (int i = 0; i < 60; ++i)
            seqs.push_back(tok::tokenize(test::random_score(rng), v));
        auto m = analysis::succession_matrix(seqs, v);
        for (std::size_t r = 0; r < m.types.size(); ++r) {
            double sum = 0.0;
            for (double x : m.rows[r]) sum += x;
            if (m.row_totals[r] > 0 && std::abs(sum - 1.0) > 1e-9) ok = false;
            for (std::size_t c = 0; c < m.types.size(); ++c)
                if (m.rows[r][c] > 0.0 && !g.legal(m.types[r], m.types[c])) ok = false;
        }
    }
    report(6, "succession matrix row normalization and grammar support", ok);
}

// ---------------------------------------------------------------- criterion 7

void criterion_contrastive() {
    bool ok = true;
    for (int n : {2, 8, 48}) {
        Eigen::MatrixXd m(n, 5);
        for (int i = 0; i < n; ++i) m.row(i) << 1, -2, 3, 0.5, 4;
        embed::EmbeddingSet z;
        z.rows = m;
        auto rep = embed::contrastive_loss(z, z, 0.1);
        for (double l : rep.per_example_loss)
            if (std::abs(l - std::log(static_cast<double>(n))) > 1e-6) ok = false;
    }

    const int n = 6;
    embed::EmbeddingSet basis;
    basis.rows = Eigen::MatrixXd::Identity(n, n);
    auto rep = embed::contrastive_loss(basis, basis, 1.0);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) {
        double denom = 0.0;
        for (int j = 0; j < n; ++j) denom += std::exp(i == j ? 1.0 : 0.0);
        direct += -std::log(std::exp(1.0) / denom);
    }
    if (std::abs(rep.mean_loss - direct / n) > 1e-9) ok = false;
    report(7, "contrastive loss: ln N batches and closed form", ok);
}

// ---------------------------------------------------------------- criterion 8

void criterion_intrinsic_dimension() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(1008);
    bool ok = true;
    std::string detail;

    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        embed::EmbeddingSet cube;
        cube.rows.resize(5000, 5);
        for (int i = 0; i < 5000; ++i)
            for (int j = 0; j < 5; ++j) cube.rows(i, j) = u(rng);
        double twonn = embed::id_twonn(cube).estimate;
        double mom = embed::id_mom(cube).estimate;
        if (!(twonn >= 4.5 && twonn <= 5.5)) { ok = false; detail = "twonn"; }
        if (!(mom >= 4.0 && mom <= 6.0)) { ok = false; detail = "mom"; }
    }
    {
        std::normal_distribution<double> g;
        embed::EmbeddingSet plane;
        plane.rows.setZero(600, 10);
        for (int i = 0; i < 600; ++i) {
            plane.rows(i, 2) = g(rng);
            plane.rows(i, 7) = g(rng);
        }
        if (embed::id_lpca(plane) != 2.0) { ok = false; detail = "lpca"; }
    }
    {
        std::normal_distribution<double> g;
        auto gauss = [&](int n, int d) {
            embed::EmbeddingSet e;
            e.rows.resize(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) e.rows(i, j) = g(rng);
            return e;
        };
        double f4 = embed::id_fishers(gauss(700, 4)).estimate;
        double f16 = embed::id_fishers(gauss(700, 16)).estimate;
        if (!(f4 < f16)) { ok = false; detail = "fishers"; }
    }

    double el = seconds_since(t0);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s%.1fs", detail.empty() ? "" : (detail + ", ").c_str(), el);
    report(8, "intrinsic-dimension estimates on synthetics", ok && el < 120.0, buf);
}

// ---------------------------------------------------------------- criterion 9

#ifndef MTF_CLI_PATH
#define MTF_CLI_PATH "mtf"
#endif

void criterion_determinism() {
    fs::path base = fs::temp_directory_path() / "mtf_acceptance";
    fs::remove_all(base);
    fs::create_directories(base / "corpus");

    std::mt19937 rng(1009);
    for (int i = 0; i < 5; ++i) {
        auto song = test::random_song(rng, 30);
        auto bytes = smf::write_smf(song);
        char name[32];
        std::snprintf(name, sizeof(name), "song%02d.mid", i);
        std::ofstream f(base / "corpus" / name, std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }

    auto run = [&](const std::string& out) {
        std::string cmd = std::string(MTF_CLI_PATH) + " pipeline -i " +
                          (base / "corpus").string() + " -o " + (base / out).string() +
                          " --scheme all --bpe-size 300 --seed 7 > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    bool ok = run("run1") == 0 && run("run2") == 0;
    std::string h1, h2;
    if (ok) {
        auto load_hash = [](const fs::path& p) {
            std::ifstream f(p);
            nlohmann::json j;
            f >> j;
            return j.value("manifest_hash", std::string());
        };
        h1 = load_hash(base / "run1" / "manifest.json");
        h2 = load_hash(base / "run2" / "manifest.json");
        ok = !h1.empty() && h1 == h2;
    }
    report(9, "pipeline determinism (manifest hash equality)", ok, ok ? h1 : "");
    fs::remove_all(base);
}

}  // namespace

int main() {
    criterion_roundtrip();
    criterion_fault_injection();
    criterion_bpe();
    criterion_smf();
    criterion_histograms();
    criterion_succession();
    criterion_contrastive();
    criterion_intrinsic_dimension();
    criterion_determinism();
    if (g_failures > 0) {
        std::printf("%d criteria failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
