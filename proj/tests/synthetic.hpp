// Deterministic synthetic corpora for end-to-end tests: a substitution-cipher
// bitext, ground-truth-aligned document pairs with merges/deletions, and
// random alignment instances for exhaustive DP checks.
#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "logos/align.hpp"
#include "logos/embedding.hpp"
#include "logos/rng.hpp"
#include "logos/text.hpp"

namespace synth {

// Parallel corpus where the target is a token-wise substitution cipher of the
// source: source tokens eng0..eng{V-1}, target tokens grc0..grc{V-1}.
// Sentences have 3..8 tokens; duplicate sentences are re-drawn so all source
// texts are distinct.
inline std::vector<logos::ParallelPair> cipher_corpus(std::size_t n_pairs, int vocab_size,
                                                      std::uint64_t seed) {
    logos::Rng rng(seed);
    std::vector<logos::ParallelPair> out;
    std::unordered_set<std::string> seen;
    out.reserve(n_pairs);
    while (out.size() < n_pairs) {
        const std::size_t len = 3 + rng.below(6);
        std::string src, tgt;
        for (std::size_t k = 0; k < len; ++k) {
            const std::uint64_t tok = rng.below(static_cast<std::uint64_t>(vocab_size));
            if (k > 0) {
                src += ' ';
                tgt += ' ';
            }
            src += "eng" + std::to_string(tok);
            tgt += "grc" + std::to_string(tok);
        }
        if (!seen.insert(src).second) continue;
        out.push_back({std::move(src), std::move(tgt), 1.0});
    }
    return out;
}

// A ground-truth-aligned document pair. Target sentences follow source order;
// merge links join two source sentences into one target, deletions leave a
// source sentence without a target. Oracle embeddings: each source sentence
// gets a random direction, its translation the same one; a merged target gets
// the normalized sum of its parents.
struct AlignInstance {
    std::vector<logos::Sentence> src;
    std::vector<logos::Sentence> tgt;
    std::vector<logos::AlignmentLink> gold; // substantive links only (no gaps)
    logos::LookupEncoder encoder{0};
};

inline AlignInstance merge_delete_instance(std::size_t n_src, double merge_prob, double delete_prob,
                                           int dim, std::uint64_t seed) {
    logos::Rng rng(seed);
    AlignInstance inst;
    inst.encoder = logos::LookupEncoder(dim);

    auto direction = [&]() {
        Eigen::VectorXf v(dim);
        for (int k = 0; k < dim; ++k) v[k] = static_cast<float>(rng.uniform(-1.0, 1.0));
        v.normalize();
        return v;
    };
    auto filler = [&](const std::string& head) {
        const std::size_t len = 20 + rng.below(61);
        return head + " " + std::string(len, 'a');
    };

    std::vector<Eigen::VectorXf> dirs;
    for (std::size_t i = 0; i < n_src; ++i) {
        dirs.push_back(direction());
        std::string text = filler("s" + std::to_string(i));
        inst.encoder.set(text, dirs.back());
        inst.src.push_back({"src", static_cast<int>(i), std::move(text), logos::Language::GRC});
    }

    std::size_t i = 0;
    while (i < n_src) {
        const double roll = rng.uniform(0.0, 1.0);
        if (roll < merge_prob && i + 1 < n_src) {
            std::string text = filler("t" + std::to_string(i) + "_" + std::to_string(i + 1));
            Eigen::VectorXf v = dirs[i] + dirs[i + 1];
            v.normalize();
            inst.encoder.set(text, v);
            logos::AlignmentLink link;
            link.src_indices = {static_cast<int>(i), static_cast<int>(i + 1)};
            link.tgt_indices = {static_cast<int>(inst.tgt.size())};
            inst.gold.push_back(std::move(link));
            inst.tgt.push_back(
                {"tgt", static_cast<int>(inst.tgt.size()), std::move(text), logos::Language::EN});
            i += 2;
        } else if (roll < merge_prob + delete_prob) {
            i += 1; // no target sentence and no gold link
        } else {
            std::string text = filler("t" + std::to_string(i));
            inst.encoder.set(text, dirs[i]);
            logos::AlignmentLink link;
            link.src_indices = {static_cast<int>(i)};
            link.tgt_indices = {static_cast<int>(inst.tgt.size())};
            inst.gold.push_back(std::move(link));
            inst.tgt.push_back(
                {"tgt", static_cast<int>(inst.tgt.size()), std::move(text), logos::Language::EN});
            i += 1;
        }
    }
    return inst;
}

inline std::string link_key(const logos::AlignmentLink& l) {
    std::string k;
    for (int s : l.src_indices) k += std::to_string(s) + ",";
    k += "|";
    for (int t : l.tgt_indices) k += std::to_string(t) + ",";
    return k;
}

// Link-level F1 over substantive links (gap links ignored on both sides).
inline double link_f1(const std::vector<logos::AlignmentLink>& predicted,
                      const std::vector<logos::AlignmentLink>& gold) {
    std::unordered_set<std::string> gold_keys;
    for (const logos::AlignmentLink& l : gold) gold_keys.insert(link_key(l));
    std::size_t n_pred = 0, hits = 0;
    for (const logos::AlignmentLink& l : predicted) {
        if (l.src_indices.empty() || l.tgt_indices.empty()) continue;
        ++n_pred;
        if (gold_keys.count(link_key(l)) > 0) ++hits;
    }
    if (n_pred == 0 || gold_keys.empty()) return 0.0;
    const double precision = static_cast<double>(hits) / static_cast<double>(n_pred);
    const double recall = static_cast<double>(hits) / static_cast<double>(gold_keys.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// Random sentence lists with one-token texts drawn from disjoint synthetic
// vocabularies, plus a random partial dictionary between them. Used for
// exhaustive DP-vs-enumeration checks.
struct DictInstance {
    std::vector<logos::Sentence> src;
    std::vector<logos::Sentence> tgt;
    logos::BilingualDictionary dict;
};

inline DictInstance random_dict_instance(std::uint64_t seed) {
    logos::Rng rng(seed);
    DictInstance inst;
    const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
        std::string text = "w" + std::to_string(rng.below(8)) + " " + std::string(5 + rng.below(40), 'x');
        inst.src.push_back({"a", static_cast<int>(i), std::move(text), logos::Language::GRC});
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::string text = "u" + std::to_string(rng.below(8)) + " " + std::string(5 + rng.below(40), 'y');
        inst.tgt.push_back({"b", static_cast<int>(j), std::move(text), logos::Language::EN});
    }
    for (std::uint64_t k = 0; k < 8; ++k) {
        if (rng.uniform(0.0, 1.0) < 0.4)
            inst.dict.add("w" + std::to_string(k), "u" + std::to_string(rng.below(8)));
    }
    return inst;
}

// Random embedding-cost instance (vectors uniform in [-1,1]^dim, weights in
// [1, 50]) for exhaustive bead-DP checks.
inline logos::EmbedCost random_embed_instance(std::uint64_t seed, std::size_t& n_out, std::size_t& m_out) {
    logos::Rng rng(seed);
    const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(6);
    const int dim = 4 + static_cast<int>(rng.below(5));
    auto vecs = [&](std::size_t count) {
        std::vector<Eigen::VectorXd> vs;
        for (std::size_t i = 0; i < count; ++i) {
            Eigen::VectorXd v(dim);
            for (int k = 0; k < dim; ++k) v[k] = rng.uniform(-1.0, 1.0);
            vs.push_back(std::move(v));
        }
        return vs;
    };
    auto weights = [&](std::size_t count) {
        std::vector<double> ws;
        for (std::size_t i = 0; i < count; ++i) ws.push_back(1.0 + static_cast<double>(rng.below(50)));
        return ws;
    };
    n_out = n;
    m_out = m;
    std::vector<Eigen::VectorXd> se = vecs(n), te = vecs(m);
    std::vector<double> sw = weights(n), tw = weights(m);
    return logos::EmbedCost(std::move(se), std::move(sw), std::move(te), std::move(tw));
}

} // namespace synth
