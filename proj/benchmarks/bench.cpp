#include <random>

#include <benchmark/benchmark.h>

#include "mtf/bpe.hpp"
#include "mtf/embed.hpp"
#include "mtf/tok.hpp"
#include "mtf/tse.hpp"

using namespace mtf;

namespace {

score::Score make_score(std::mt19937& rng, int n_notes) {
    std::uniform_int_distribution<int> gap(0, 12);
    std::uniform_int_distribution<int> pitch_d(score::kPitchMin, score::kPitchMax);
    std::uniform_int_distribution<int> vel_d(0, 7);
    std::uniform_int_distribution<std::size_t> dur_d(0, score::kDurationGrid.size() - 1);
    score::Score s;
    std::int64_t t = 0;
    for (int i = 0; i < n_notes; ++i) {
        t += gap(rng);
        score::QNote q;
        q.pitch = pitch_d(rng);
        q.vel_bin = vel_d(rng);
        q.onset_units = t;
        q.duration_units = score::kDurationGrid[dur_d(rng)];
        s.notes.push_back(q);
    }
    return s;
}

void BM_tokenize(benchmark::State& state) {
    std::mt19937 rng(1);
    auto v = tok::Vocabulary::build(*tok::Scheme::from_name("pos-noff"));
    auto s = make_score(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tok::tokenize(s, v));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_tokenize)->Arg(100)->Arg(1000)->Arg(10000);

void BM_detokenize(benchmark::State& state) {
    std::mt19937 rng(2);
    auto v = tok::Vocabulary::build(*tok::Scheme::from_name("pos-noff"));
    auto seq = tok::tokenize(make_score(rng, static_cast<int>(state.range(0))), v);
    for (auto _ : state) benchmark::DoNotOptimize(tok::detokenize(seq, v));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.ids.size()));
}
BENCHMARK(BM_detokenize)->Arg(100)->Arg(1000)->Arg(10000);

void BM_validate(benchmark::State& state) {
    std::mt19937 rng(3);
    auto v = tok::Vocabulary::build(*tok::Scheme::from_name("ts-noff"));
    auto seq = tok::tokenize(make_score(rng, static_cast<int>(state.range(0))), v);
    for (auto _ : state) benchmark::DoNotOptimize(tse::validate(seq, v));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.ids.size()));
}
BENCHMARK(BM_validate)->Arg(100)->Arg(1000)->Arg(10000);

void BM_bpe_encode(benchmark::State& state) {
    std::mt19937 rng(4);
    auto v = tok::Vocabulary::build(*tok::Scheme::from_name("ts-dur"));
    std::vector<tok::TokenSequence> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back(tok::tokenize(make_score(rng, 200), v));
    auto model = bpe::bpe_train(corpus, v.size() + 100);
    auto seq = tok::tokenize(make_score(rng, static_cast<int>(state.range(0))), v);
    for (auto _ : state) benchmark::DoNotOptimize(bpe::bpe_encode(seq, model));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.ids.size()));
}
BENCHMARK(BM_bpe_encode)->Arg(100)->Arg(1000)->Arg(10000);

void BM_twonn(benchmark::State& state) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    embed::EmbeddingSet e;
    const int n = static_cast<int>(state.range(0));
    e.rows.resize(n, 8);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 8; ++j) e.rows(i, j) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(embed::id_twonn(e));
}
BENCHMARK(BM_twonn)->Arg(200)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
