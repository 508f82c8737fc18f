#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "logos/embedding.hpp"
#include "logos/error.hpp"
#include "logos/text.hpp"

namespace logos {

namespace detail {

/// Index of the maximum entry; ties resolve to the lowest index.
inline std::size_t stable_argmax(const std::vector<double>& xs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] > xs[best]) best = i;
    }
    return best;
}

} // namespace detail

/// Bidirectional translation-search accuracy over index-aligned embedding
/// matrices (one row per sentence). Forward direction: fraction of rows i
/// whose stable-first cosine argmax over target rows is i; averaged with the
/// backward direction.
inline double translation_search_accuracy(const MatF& src, const MatF& tgt) {
    if (src.rows() != tgt.rows()) throw data_error("translation search: count mismatch");
    if (src.cols() != tgt.cols()) throw data_error("translation search: dimension mismatch");
    if (src.rows() == 0) throw data_error("translation search: empty input");
    const auto n = static_cast<std::size_t>(src.rows());

    auto direction = [n](const MatF& a, const MatF& b) {
        std::size_t hits = 0;
        std::vector<double> sims(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                sims[j] = cosine_similarity(a.row(i).transpose(), b.row(j).transpose());
            }
            if (detail::stable_argmax(sims) == i) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(n);
    };
    return 0.5 * (direction(src, tgt) + direction(tgt, src));
}

inline double translation_search_accuracy(const EmbeddingStore& src, const EmbeddingStore& tgt) {
    if (src.size() != tgt.size()) throw data_error("translation search: count mismatch");
    if (src.dim() != tgt.dim()) throw data_error("translation search: dimension mismatch");
    MatF a(src.size(), src.dim()), b(tgt.size(), tgt.dim());
    for (std::size_t i = 0; i < src.size(); ++i) {
        a.row(i) = src.vector(i).transpose();
        b.row(i) = tgt.vector(i).transpose();
    }
    return translation_search_accuracy(a, b);
}

namespace detail {

/// Fractional ranks with average resolution of ties.
inline std::vector<double> fractional_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw data_error("spearman: constant input has no rank variance");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace detail

/// Spearman rank correlation: Pearson correlation of fractional
/// (average-tie) ranks. Errors on length mismatch, n < 2 or constant input.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw data_error("spearman: length mismatch");
    if (x.size() < 2) throw data_error("spearman: need at least 2 observations");
    return detail::pearson(detail::fractional_ranks(x), detail::fractional_ranks(y));
}

/// One STS item: a pair of Greek sentences, each with an English translation,
/// and a gold similarity in [0, 1].
struct StsItem {
    std::string a_grc;
    std::string a_en;
    std::string b_grc;
    std::string b_en;
    double gold = 0.0;
};

struct StsResult {
    double rho_grc_grc = 0.0; // Spearman x100
    double rho_en_en = 0.0;
    double rho_cross = 0.0;
    double mean = 0.0;
    std::size_t n_grc_grc = 0;
    std::size_t n_en_en = 0;
    std::size_t n_cross = 0; // 2n: both cross directions pooled
};

/// STS evaluation: GRC<->GRC over (a_grc, b_grc), EN<->EN over (a_en, b_en),
/// and GRC<->EN pooling both (a_grc, b_en) and (a_en, b_grc) against the
/// duplicated gold list. Scores are Spearman x100.
inline StsResult sts_eval(const std::vector<StsItem>& items, const Encoder& encoder) {
    if (items.empty()) throw data_error("sts_eval: empty item list");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const StsItem& it = items[i];
        if (it.a_grc.empty() || it.a_en.empty() || it.b_grc.empty() || it.b_en.empty())
            throw data_error("sts_eval: empty text in item " + std::to_string(i));
        if (it.gold < 0.0 || it.gold > 1.0)
            throw data_error("sts_eval: gold outside [0,1] in item " + std::to_string(i));
    }

    auto enc = [&](const std::string& text, std::size_t item_idx) {
        try {
            return encoder.encode(text);
        } catch (const std::exception& e) {
            throw data_error("sts_eval: encoder failed on item " + std::to_string(item_idx) + ": " + e.what());
        }
    };

    std::vector<double> gold, sim_gg, sim_ee, sim_cross, gold_cross;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const StsItem& it = items[i];
        const VecF a_grc = enc(it.a_grc, i), a_en = enc(it.a_en, i);
        const VecF b_grc = enc(it.b_grc, i), b_en = enc(it.b_en, i);
        gold.push_back(it.gold);
        sim_gg.push_back(cosine_similarity(a_grc, b_grc));
        sim_ee.push_back(cosine_similarity(a_en, b_en));
        sim_cross.push_back(cosine_similarity(a_grc, b_en));
        gold_cross.push_back(it.gold);
        sim_cross.push_back(cosine_similarity(a_en, b_grc));
        gold_cross.push_back(it.gold);
    }

    StsResult r;
    r.rho_grc_grc = 100.0 * spearman(sim_gg, gold);
    r.rho_en_en = 100.0 * spearman(sim_ee, gold);
    r.rho_cross = 100.0 * spearman(sim_cross, gold_cross);
    r.mean = (r.rho_grc_grc + r.rho_en_en + r.rho_cross) / 3.0;
    r.n_grc_grc = gold.size();
    r.n_en_en = gold.size();
    r.n_cross = gold_cross.size();
    return r;
}

/// recall@k = |top-k intersect relevant| / |relevant|.
inline double recall_at_k(const std::vector<std::string>& ranked_ids,
                          const std::unordered_set<std::string>& relevant, std::size_t k) {
    if (k == 0) throw data_error("recall_at_k: k must be >= 1");
    if (relevant.empty()) throw data_error("recall_at_k: empty relevant set");
    std::size_t hits = 0;
    const std::size_t top = std::min(k, ranked_ids.size());
    for (std::size_t i = 0; i < top; ++i) {
        if (relevant.count(ranked_ids[i]) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

/// AP@k = (sum over relevant hits i <= k of precision@i) / min(|relevant|, k).
inline double map_at_k(const std::vector<std::string>& ranked_ids,
                       const std::unordered_set<std::string>& relevant, std::size_t k) {
    if (k == 0) throw data_error("map_at_k: k must be >= 1");
    if (relevant.empty()) throw data_error("map_at_k: empty relevant set");
    double sum = 0.0;
    std::size_t hits = 0;
    const std::size_t top = std::min(k, ranked_ids.size());
    for (std::size_t i = 0; i < top; ++i) {
        if (relevant.count(ranked_ids[i]) > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(std::min(relevant.size(), k));
}

/// Verse-aligned bias corpus: Greek verses plus named translation lists, all
/// the same length.
struct BiasCorpus {
    std::vector<std::string> greek_verses;
    std::vector<std::pair<std::string, std::vector<std::string>>> translations;
};

/// Per-translation Mean Reciprocal Rank against the Greek verse embeddings,
/// with a per-verse averaged-translation embedding competing in the same
/// candidate pool under the name "avg-embedding". For each verse the
/// candidates are ranked by cosine to the Greek embedding; exact ties keep
/// the fixed candidate order (named translations first, in corpus order,
/// then the average), so every verse assigns the distinct ranks 1..m.
inline std::vector<std::pair<std::string, double>> mrr_bias(const BiasCorpus& corpus,
                                                            const Encoder& encoder) {
    const std::size_t verses = corpus.greek_verses.size();
    if (verses == 0) throw data_error("mrr_bias: empty corpus");
    if (corpus.translations.empty()) throw data_error("mrr_bias: no translations");
    for (const auto& [name, texts] : corpus.translations) {
        if (texts.size() != verses)
            throw data_error("mrr_bias: translation " + name + " is not verse-aligned");
    }

    const std::size_t m = corpus.translations.size() + 1; // + averaged embedding
    std::vector<double> rr_sum(m, 0.0);

    for (std::size_t v = 0; v < verses; ++v) {
        const VecF greek = encoder.encode(corpus.greek_verses[v]);
        std::vector<VecF> cand;
        cand.reserve(m);
        for (const auto& [name, texts] : corpus.translations) cand.push_back(encoder.encode(texts[v]));
        cand.push_back(mean_pool(cand));

        std::vector<double> sims(m);
        for (std::size_t c = 0; c < m; ++c) sims[c] = cosine_similarity(greek, cand[c]);

        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
        for (std::size_t rank = 0; rank < m; ++rank) {
            rr_sum[order[rank]] += 1.0 / static_cast<double>(rank + 1);
        }
    }

    std::vector<std::pair<std::string, double>> out;
    out.reserve(m);
    for (std::size_t c = 0; c < corpus.translations.size(); ++c) {
        out.emplace_back(corpus.translations[c].first, rr_sum[c] / static_cast<double>(verses));
    }
    out.emplace_back("avg-embedding", rr_sum[m - 1] / static_cast<double>(verses));
    return out;
}

struct TokenizerMetrics {
    double symbols_per_token = 0.0;
    double words_per_token = 0.0;
};

/// Tokenization quality estimate over a sample: average codepoints per token
/// and average whitespace-delimited words per token.
inline TokenizerMetrics tokenizer_metrics(
    const std::function<std::vector<std::string>(std::string_view)>& tokenize,
    const std::vector<Sentence>& sample) {
    if (sample.empty()) throw data_error("tokenizer_metrics: empty sample");
    std::size_t tokens = 0, symbols = 0, words = 0;
    for (const Sentence& s : sample) {
        const std::vector<std::string> toks = tokenize(s.text);
        if (toks.empty() && !s.text.empty())
            throw data_error("tokenizer_metrics: tokenizer produced no tokens for a nonempty text");
        tokens += toks.size();
        for (const std::string& t : toks) symbols += codepoint_count(t);
        bool in_word = false;
        for (unsigned char c : s.text) {
            const bool ws = std::isspace(c) != 0;
            if (!ws && !in_word) ++words;
            in_word = !ws;
        }
    }
    if (tokens == 0) throw data_error("tokenizer_metrics: no tokens in sample");
    TokenizerMetrics m;
    m.symbols_per_token = static_cast<double>(symbols) / static_cast<double>(tokens);
    m.words_per_token = static_cast<double>(words) / static_cast<double>(tokens);
    return m;
}

/// A named-metric report. Values carry the x100 scaling where reported that
/// way (accuracy, rho, recall, mAP, MRR); metadata identifies the run.
struct EvalReport {
    std::string model_id;
    std::string dataset_hash;
    std::string timestamp; // empty unless the caller opts into wall-clock stamping
    std::vector<std::pair<std::string, double>> values;
};

} // namespace logos
