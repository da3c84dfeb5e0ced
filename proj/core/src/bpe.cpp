#include "mtf/bpe.hpp"

#include <algorithm>
#include <map>

namespace mtf::bpe {

namespace {

using Pair = std::pair<int, int>;

bool is_special(int id) { return id < tok::kNumSpecials; }

// Non-overlapping left-to-right pair counts. Only runs of an identical id
// can overlap, so within a run of length L the pair (x,x) counts floor(L/2).
void count_pairs(const std::vector<int>& ids, std::map<Pair, std::int64_t>& counts) {
    bool prev_counted = false;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        if (ids[i] == ids[i + 1] && i > 0 && ids[i - 1] == ids[i] && prev_counted) {
            prev_counted = false;
            continue;
        }
        if (is_special(ids[i]) || is_special(ids[i + 1])) {
            prev_counted = false;
            continue;
        }
        ++counts[{ids[i], ids[i + 1]}];
        prev_counted = true;
    }
}

// Replace all non-overlapping left-to-right occurrences of `p` with `merged`.
void apply_merge(std::vector<int>& ids, Pair p, int merged) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < ids.size();) {
        if (r + 1 < ids.size() && ids[r] == p.first && ids[r + 1] == p.second) {
            ids[w++] = merged;
            r += 2;
        } else {
            ids[w++] = ids[r++];
        }
    }
    ids.resize(w);
}

}  // namespace

BpeModel bpe_train(const std::vector<tok::TokenSequence>& corpus, int target_size) {
    BpeModel model;
    if (corpus.empty()) throw BpeError("empty corpus");
    const std::uint64_t vocab_hash = corpus.front().vocab_hash;
    int base = 0;
    std::vector<std::vector<int>> work;
    work.reserve(corpus.size());
    for (const auto& seq : corpus) {
        if (seq.is_bpe) throw VocabMismatch("corpus sequence already BPE-encoded");
        if (seq.vocab_hash != vocab_hash)
            throw VocabMismatch("corpus sequences use different vocabularies");
        for (int id : seq.ids) base = std::max(base, id + 1);
        work.push_back(seq.ids);
    }
    // Base size comes from the scheme's vocabulary when the corpus names one;
    // the maximum observed id is only a lower bound.
    if (auto scheme = tok::Scheme::from_name(corpus.front().scheme_name)) {
        int vs = tok::Vocabulary::build(*scheme).size();
        if (vs < base) throw VocabMismatch("corpus ids exceed the scheme vocabulary");
        base = vs;
    }
    model.base_vocab_size = base;
    model.target_size = target_size;
    if (target_size <= base)
        throw TargetTooSmall("target size " + std::to_string(target_size) +
                             " not above base vocabulary size " + std::to_string(base));

    int next_id = base;
    while (next_id < target_size) {
        std::map<Pair, std::int64_t> counts;
        for (const auto& ids : work) count_pairs(ids, counts);
        Pair best{-1, -1};
        std::int64_t best_count = 0;
        for (const auto& [p, c] : counts) {
            // std::map iterates in ascending (left,right): strict > keeps the
            // lexicographically smallest pair on ties.
            if (c > best_count) {
                best = p;
                best_count = c;
            }
        }
        if (best_count < 2) break;
        for (auto& ids : work) apply_merge(ids, best, next_id);
        model.merges.push_back(best);
        ++next_id;
    }
    return model;
}

tok::TokenSequence bpe_encode(const tok::TokenSequence& seq, const BpeModel& model) {
    if (seq.is_bpe) throw VocabMismatch("sequence is already BPE-encoded");
    for (int id : seq.ids)
        if (id >= model.base_vocab_size)
            throw VocabMismatch("sequence id outside the model's base vocabulary");
    tok::TokenSequence out = seq;
    int next_id = model.base_vocab_size;
    for (const auto& p : model.merges) apply_merge(out.ids, p, next_id++);
    out.is_bpe = true;
    return out;
}

tok::TokenSequence bpe_decode(const tok::TokenSequence& seq, const BpeModel& model) {
    tok::TokenSequence out = seq;
    std::vector<int> expanded;
    expanded.reserve(out.ids.size());
    // Iterative expansion: merged ids expand to (left, right), which may be
    // merged ids themselves.
    std::vector<int> stack;
    for (int id : out.ids) {
        stack.push_back(id);
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            if (cur >= model.size())
                throw UnknownId("id " + std::to_string(cur) + " outside model vocabulary");
            if (cur < model.base_vocab_size) {
                expanded.push_back(cur);
            } else {
                const auto& p = model.merges[cur - model.base_vocab_size];
                stack.push_back(p.second);
                stack.push_back(p.first);
            }
        }
    }
    out.ids = std::move(expanded);
    out.is_bpe = false;
    return out;
}

nlohmann::json model_to_json(const BpeModel& model) {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : model.merges) merges.push_back({l, r});
    return nlohmann::json{{"base_vocab_size", model.base_vocab_size}, {"merges", merges}};
}

BpeModel model_from_json(const nlohmann::json& j) {
    BpeModel model;
    model.base_vocab_size = j.at("base_vocab_size").get<int>();
    for (const auto& m : j.at("merges"))
        model.merges.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    model.target_size = model.size();
    return model;
}

}  // namespace mtf::bpe
