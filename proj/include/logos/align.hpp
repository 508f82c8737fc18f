#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <unicode/uchar.h>

#include "logos/embedding.hpp"
#include "logos/error.hpp"
#include "logos/student.hpp"
#include "logos/text.hpp"

namespace logos {

/// One alignment unit: a contiguous run of source sentences linked to a
/// contiguous run of target sentences. Gap beads leave one side empty.
struct AlignmentLink {
    std::vector<int> src_indices;
    std::vector<int> tgt_indices;
    double score = 0.0;
};

struct AlignConfig {
    int max_bead = 0; // 0 = per-method default: 2 (length_dict_align), 3 (embed_align)
    double score_threshold = 0.5;
    double dict_weight = 0.5;
    double gap_penalty = 2.0;
    double anchor_threshold = 0.9;
    double gc_mean_ratio = 1.0; // expected target/source character ratio
    double gc_variance = 6.8;   // per-character variance of the length model
};

inline void validate(const AlignConfig& cfg) {
    if (cfg.max_bead < 0) throw data_error("align config: max_bead must be nonnegative");
    if (cfg.dict_weight < 0.0 || cfg.dict_weight > 1.0)
        throw data_error("align config: dict_weight must be in [0,1]");
    if (cfg.gap_penalty < 0.0) throw data_error("align config: gap_penalty must be nonnegative");
    if (!(cfg.gc_variance > 0.0)) throw data_error("align config: gc_variance must be positive");
    if (cfg.anchor_threshold < -1.0 || cfg.anchor_threshold > 1.0)
        throw data_error("align config: anchor_threshold must be in [-1,1]");
}

namespace detail {

/// Lookup tokens: whitespace tokens, edge punctuation stripped, then the
/// same normalization as Greek text prep (safe for English: lowercasing).
inline std::vector<std::string> match_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (const std::string& raw : whitespace_tokens(text)) {
        std::vector<UChar32> cps;
        std::size_t i = 0;
        while (i < raw.size()) {
            UChar32 c = next_codepoint(raw, i);
            if (c >= 0) cps.push_back(c);
        }
        std::size_t lo = 0, hi = cps.size();
        while (lo < hi && u_ispunct(cps[lo])) ++lo;
        while (hi > lo && u_ispunct(cps[hi - 1])) --hi;
        if (lo == hi) continue;
        std::string core;
        for (std::size_t k = lo; k < hi; ++k) append_codepoint(core, cps[k]);
        out.push_back(normalize_greek(core));
    }
    return out;
}

} // namespace detail

/// Token-to-token translation pairs. Both sides are stored lowercase and
/// diacritic-stripped (the text-prep normalization), so lookups against
/// normalized corpus tokens are exact string matches.
class BilingualDictionary {
public:
    void add(std::string_view src_token, std::string_view tgt_token) {
        const std::string s = normalize_greek(src_token);
        const std::string t = normalize_greek(tgt_token);
        if (s.empty() || t.empty()) throw data_error("dictionary: empty token");
        fwd_[s].insert(t);
        rev_[t].insert(s);
    }

    bool empty() const { return fwd_.empty(); }
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [s, ts] : fwd_) n += ts.size();
        return n;
    }

    /// Does normalized source token s translate to anything in tgt_tokens?
    bool source_matches(const std::string& s, const std::unordered_set<std::string>& tgt_tokens) const {
        auto it = fwd_.find(s);
        if (it == fwd_.end()) return false;
        for (const std::string& t : it->second)
            if (tgt_tokens.count(t) > 0) return true;
        return false;
    }

    bool target_matches(const std::string& t, const std::unordered_set<std::string>& src_tokens) const {
        auto it = rev_.find(t);
        if (it == rev_.end()) return false;
        for (const std::string& s : it->second)
            if (src_tokens.count(s) > 0) return true;
        return false;
    }

private:
    std::unordered_map<std::string, std::unordered_set<std::string>> fwd_;
    std::unordered_map<std::string, std::unordered_set<std::string>> rev_;
};

/// Cost of generating a target segment of tgt_len characters from a source
/// segment of src_len characters under a Gaussian model of the length-ratio
/// statistic delta = (lt - c*ls) / sqrt(ls * s^2): -ln erfc(|delta|/sqrt 2).
inline double gale_church_length_cost(double src_len, double tgt_len, const AlignConfig& cfg) {
    const double ls = std::max(1.0, src_len);
    const double delta = (tgt_len - cfg.gc_mean_ratio * ls) / std::sqrt(ls * cfg.gc_variance);
    const double tail = std::erfc(std::abs(delta) / std::sqrt(2.0));
    return -std::log(std::max(tail, 1e-300));
}

/// Bead-type prior cost relative to the dominant 1-1 bead.
inline double bead_prior_cost(int a, int b) {
    double p = 0.005;
    if (a == 1 && b == 1) p = 0.89;
    else if ((a == 2 && b == 1) || (a == 1 && b == 2)) p = 0.0445;
    else if (a == 2 && b == 2) p = 0.011;
    return -std::log(p / 0.89);
}

/// Per-bead costs for the length + dictionary aligner.
///
/// Substitution bead (a source sentences, b target sentences):
///   (1 - dict_weight) * (length cost + bead prior) - dict_weight * dict_fraction
/// where dict_fraction is the mean of the two coverage directions: the
/// fraction of source tokens with a dictionary partner in the target
/// segment, and the fraction of target tokens with a partner in the source
/// segment. The dictionary term is a reward, so lexical evidence can make a
/// bead cheaper than any arrangement that skips it.
///
/// Gap bead (1-0 / 0-1): (1 - dict_weight) * gap_penalty; no dictionary term.
class LengthDictCost {
public:
    LengthDictCost(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                   const BilingualDictionary& dict, const AlignConfig& cfg)
        : dict_(&dict), cfg_(cfg) {
        src_len_.reserve(src.size());
        for (const Sentence& s : src) src_len_.push_back(static_cast<double>(codepoint_count(s.text)));
        tgt_len_.reserve(tgt.size());
        for (const Sentence& s : tgt) tgt_len_.push_back(static_cast<double>(codepoint_count(s.text)));
        if (!dict.empty()) {
            src_tokens_.reserve(src.size());
            for (const Sentence& s : src) src_tokens_.push_back(detail::match_tokens(s.text));
            tgt_tokens_.reserve(tgt.size());
            for (const Sentence& s : tgt) tgt_tokens_.push_back(detail::match_tokens(s.text));
        }
    }

    double sub_cost(std::size_t i, int a, std::size_t j, int b) const {
        double ls = 0.0, lt = 0.0;
        for (int k = 0; k < a; ++k) ls += src_len_[i + static_cast<std::size_t>(k)];
        for (int k = 0; k < b; ++k) lt += tgt_len_[j + static_cast<std::size_t>(k)];
        const double model = gale_church_length_cost(ls, lt, cfg_) + bead_prior_cost(a, b);
        return (1.0 - cfg_.dict_weight) * model - cfg_.dict_weight * dict_fraction(i, a, j, b);
    }

    double gap_cost() const { return (1.0 - cfg_.dict_weight) * cfg_.gap_penalty; }

    double dict_fraction(std::size_t i, int a, std::size_t j, int b) const {
        if (dict_->empty()) return 0.0;
        std::unordered_set<std::string> src_set, tgt_set;
        std::size_t src_total = 0, tgt_total = 0;
        for (int k = 0; k < a; ++k)
            for (const std::string& t : src_tokens_[i + static_cast<std::size_t>(k)]) {
                src_set.insert(t);
                ++src_total;
            }
        for (int k = 0; k < b; ++k)
            for (const std::string& t : tgt_tokens_[j + static_cast<std::size_t>(k)]) {
                tgt_set.insert(t);
                ++tgt_total;
            }
        double src_frac = 0.0, tgt_frac = 0.0;
        if (src_total > 0) {
            std::size_t hit = 0;
            for (int k = 0; k < a; ++k)
                for (const std::string& t : src_tokens_[i + static_cast<std::size_t>(k)])
                    if (dict_->source_matches(t, tgt_set)) ++hit;
            src_frac = static_cast<double>(hit) / static_cast<double>(src_total);
        }
        if (tgt_total > 0) {
            std::size_t hit = 0;
            for (int k = 0; k < b; ++k)
                for (const std::string& t : tgt_tokens_[j + static_cast<std::size_t>(k)])
                    if (dict_->target_matches(t, src_set)) ++hit;
            tgt_frac = static_cast<double>(hit) / static_cast<double>(tgt_total);
        }
        return 0.5 * (src_frac + tgt_frac);
    }

private:
    const BilingualDictionary* dict_;
    AlignConfig cfg_;
    std::vector<double> src_len_;
    std::vector<double> tgt_len_;
    std::vector<std::vector<std::string>> src_tokens_;
    std::vector<std::vector<std::string>> tgt_tokens_;
};

namespace detail {

/// Fixed bead enumeration order shared by the DP and any exhaustive search:
/// substitution beads (a, b) with a, b in 1..max_bead in row-major order,
/// then the 1-0 and 0-1 gaps. Costs accumulate strictly left to right along
/// a path, so equal decompositions produce bitwise-equal totals.
inline std::vector<std::pair<int, int>> bead_order(int max_bead) {
    std::vector<std::pair<int, int>> beads;
    for (int a = 1; a <= max_bead; ++a)
        for (int b = 1; b <= max_bead; ++b) beads.emplace_back(a, b);
    beads.emplace_back(1, 0);
    beads.emplace_back(0, 1);
    return beads;
}

} // namespace detail

/// Minimum-cost monotone alignment over length + dictionary bead costs.
/// Link score = exp(-bead cost), clamped to 1 (dictionary rewards can push a
/// bead cost below zero).
inline std::vector<AlignmentLink> length_dict_align(const std::vector<Sentence>& src,
                                                    const std::vector<Sentence>& tgt,
                                                    const BilingualDictionary& dict, const AlignConfig& cfg = {}) {
    validate(cfg);
    if (src.empty() || tgt.empty()) throw data_error("length_dict_align: empty input");
    const int max_bead = cfg.max_bead == 0 ? 2 : cfg.max_bead;
    const std::size_t n = src.size(), m = tgt.size();
    const LengthDictCost cost(src, tgt, dict, cfg);
    const std::vector<std::pair<int, int>> beads = detail::bead_order(max_bead);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(n + 1, std::vector<double>(m + 1, inf));
    std::vector<std::vector<std::pair<int, int>>> back(n + 1, std::vector<std::pair<int, int>>(m + 1, {0, 0}));
    dp[0][0] = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j <= m; ++j) {
            if (i == 0 && j == 0) continue;
            for (const auto& [a, b] : beads) {
                if (i < static_cast<std::size_t>(a) || j < static_cast<std::size_t>(b)) continue;
                const std::size_t pi = i - static_cast<std::size_t>(a), pj = j - static_cast<std::size_t>(b);
                if (dp[pi][pj] == inf) continue;
                const double c =
                    (a == 0 || b == 0) ? cost.gap_cost() : cost.sub_cost(pi, a, pj, b);
                const double total = dp[pi][pj] + c;
                if (total < dp[i][j]) {
                    dp[i][j] = total;
                    back[i][j] = {a, b};
                }
            }
        }
    }

    std::vector<AlignmentLink> links;
    std::size_t i = n, j = m;
    while (i != 0 || j != 0) {
        const auto [a, b] = back[i][j];
        AlignmentLink link;
        for (int k = a; k > 0; --k) link.src_indices.push_back(static_cast<int>(i - static_cast<std::size_t>(k)));
        for (int k = b; k > 0; --k) link.tgt_indices.push_back(static_cast<int>(j - static_cast<std::size_t>(k)));
        const double c = (a == 0 || b == 0)
                             ? cost.gap_cost()
                             : cost.sub_cost(i - static_cast<std::size_t>(a), a, j - static_cast<std::size_t>(b), b);
        link.score = std::min(1.0, std::exp(-c));
        links.push_back(std::move(link));
        i -= static_cast<std::size_t>(a);
        j -= static_cast<std::size_t>(b);
    }
    std::reverse(links.begin(), links.end());
    return links;
}

/// Total bead cost of an alignment, accumulated left to right — the same
/// order the DP uses, so the DP's chosen path reproduces its optimum
/// bitwise. Exposed for exhaustive oracles.
inline double alignment_cost(const std::vector<AlignmentLink>& links, const LengthDictCost& cost) {
    double total = 0.0;
    for (const AlignmentLink& l : links) {
        if (l.src_indices.empty() || l.tgt_indices.empty()) {
            total += cost.gap_cost();
        } else {
            total += cost.sub_cost(static_cast<std::size_t>(l.src_indices.front()),
                                   static_cast<int>(l.src_indices.size()),
                                   static_cast<std::size_t>(l.tgt_indices.front()),
                                   static_cast<int>(l.tgt_indices.size()));
        }
    }
    return total;
}

/// Segment similarities for the embedding aligner. A multi-sentence segment
/// embedding is the character-length-weighted mean of its sentence
/// embeddings (codepoint counts as weights); similarities are cosines
/// computed in double precision. A zero-norm segment scores 0 against
/// everything.
class EmbedCost {
public:
    EmbedCost(std::vector<Eigen::VectorXd> src_embs, std::vector<double> src_weights,
              std::vector<Eigen::VectorXd> tgt_embs, std::vector<double> tgt_weights)
        : src_(std::move(src_embs)), sw_(std::move(src_weights)), tgt_(std::move(tgt_embs)),
          tw_(std::move(tgt_weights)) {
        if (src_.size() != sw_.size() || tgt_.size() != tw_.size())
            throw data_error("embed cost: weight count mismatch");
    }

    static EmbedCost from_sentences(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                    const Encoder& encoder) {
        std::vector<Eigen::VectorXd> se, te;
        std::vector<double> sw, tw;
        se.reserve(src.size());
        sw.reserve(src.size());
        for (const Sentence& s : src) {
            se.push_back(encoder.encode(s.text).cast<double>());
            sw.push_back(static_cast<double>(codepoint_count(s.text)));
        }
        te.reserve(tgt.size());
        tw.reserve(tgt.size());
        for (const Sentence& s : tgt) {
            te.push_back(encoder.encode(s.text).cast<double>());
            tw.push_back(static_cast<double>(codepoint_count(s.text)));
        }
        return EmbedCost(std::move(se), std::move(sw), std::move(te), std::move(tw));
    }

    std::size_t src_size() const { return src_.size(); }
    std::size_t tgt_size() const { return tgt_.size(); }

    double pair_sim(std::size_t i, std::size_t j) const { return cos(src_[i], tgt_[j]); }

    double sub_sim(std::size_t i, int a, std::size_t j, int b) const {
        if (a == 1 && b == 1) return pair_sim(i, j);
        return cos(segment(src_, sw_, i, a), segment(tgt_, tw_, j, b));
    }

private:
    static Eigen::VectorXd segment(const std::vector<Eigen::VectorXd>& embs, const std::vector<double>& w,
                                   std::size_t at, int count) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(embs[at].size());
        double total = 0.0;
        for (int k = 0; k < count; ++k) {
            const std::size_t idx = at + static_cast<std::size_t>(k);
            const double wk = w[idx] > 0.0 ? w[idx] : 1.0;
            acc += wk * embs[idx];
            total += wk;
        }
        return acc / total;
    }

    static double cos(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const double na = a.norm(), nb = b.norm();
        if (na == 0.0 || nb == 0.0) return 0.0;
        return a.dot(b) / (na * nb);
    }

    std::vector<Eigen::VectorXd> src_;
    std::vector<double> sw_;
    std::vector<Eigen::VectorXd> tgt_;
    std::vector<double> tw_;
};

namespace detail {

/// Maximum-total-similarity bead DP over src[si, si+sn) x tgt[tj, tj+tn).
/// Substitution beads contribute their segment cosine; gaps contribute 0 and
/// score 0 in the emitted links. Indices in the result are global.
inline std::vector<AlignmentLink> embed_window_dp(const EmbedCost& cost, std::size_t si, std::size_t sn,
                                                  std::size_t tj, std::size_t tn, int max_bead) {
    const std::vector<std::pair<int, int>> beads = bead_order(max_bead);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(sn + 1, std::vector<double>(tn + 1, neg_inf));
    std::vector<std::vector<std::pair<int, int>>> back(sn + 1, std::vector<std::pair<int, int>>(tn + 1, {0, 0}));
    dp[0][0] = 0.0;
    for (std::size_t i = 0; i <= sn; ++i) {
        for (std::size_t j = 0; j <= tn; ++j) {
            if (i == 0 && j == 0) continue;
            for (const auto& [a, b] : beads) {
                if (i < static_cast<std::size_t>(a) || j < static_cast<std::size_t>(b)) continue;
                const std::size_t pi = i - static_cast<std::size_t>(a), pj = j - static_cast<std::size_t>(b);
                if (dp[pi][pj] == neg_inf) continue;
                const double gain = (a == 0 || b == 0) ? 0.0 : cost.sub_sim(si + pi, a, tj + pj, b);
                const double total = dp[pi][pj] + gain;
                if (total > dp[i][j]) {
                    dp[i][j] = total;
                    back[i][j] = {a, b};
                }
            }
        }
    }

    std::vector<AlignmentLink> links;
    std::size_t i = sn, j = tn;
    while (i != 0 || j != 0) {
        const auto [a, b] = back[i][j];
        AlignmentLink link;
        for (int k = a; k > 0; --k)
            link.src_indices.push_back(static_cast<int>(si + i - static_cast<std::size_t>(k)));
        for (int k = b; k > 0; --k)
            link.tgt_indices.push_back(static_cast<int>(tj + j - static_cast<std::size_t>(k)));
        link.score = (a == 0 || b == 0)
                         ? 0.0
                         : cost.sub_sim(si + i - static_cast<std::size_t>(a), a, tj + j - static_cast<std::size_t>(b), b);
        links.push_back(std::move(link));
        i -= static_cast<std::size_t>(a);
        j -= static_cast<std::size_t>(b);
    }
    std::reverse(links.begin(), links.end());
    return links;
}

} // namespace detail

/// Single-window bead alignment over precomputed embeddings (the second pass
/// of embed_align applied to a whole range).
inline std::vector<AlignmentLink> embed_bead_align(const EmbedCost& cost, int max_bead) {
    if (cost.src_size() == 0 || cost.tgt_size() == 0) throw data_error("embed_bead_align: empty input");
    if (max_bead <= 0) throw data_error("embed_bead_align: max_bead must be positive");
    return detail::embed_window_dp(cost, 0, cost.src_size(), 0, cost.tgt_size(), max_bead);
}

/// Exact maximum total similarity of embed_bead_align's search space.
inline double embed_bead_optimal_total(const EmbedCost& cost, int max_bead) {
    if (cost.src_size() == 0 || cost.tgt_size() == 0) throw data_error("embed_bead_align: empty input");
    double total = 0.0;
    for (const AlignmentLink& l : embed_bead_align(cost, max_bead)) {
        if (!l.src_indices.empty() && !l.tgt_indices.empty()) total += l.score;
    }
    return total;
}

/// Two-pass embedding aligner. Pass 1 selects anchor cells (each a row and
/// column maximum of the cosine matrix with similarity >= anchor_threshold)
/// and chains them with a monotone DP maximizing total similarity; anchors
/// become fixed 1-1 links. Pass 2 runs the bead DP inside each inter-anchor
/// window. Link scores are segment cosines; gap links score 0.
inline std::vector<AlignmentLink> embed_align(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                              const Encoder& encoder, const AlignConfig& cfg = {}) {
    validate(cfg);
    if (src.empty() || tgt.empty()) throw data_error("embed_align: empty input");
    const int max_bead = cfg.max_bead == 0 ? 3 : cfg.max_bead;
    const std::size_t n = src.size(), m = tgt.size();
    const EmbedCost cost = EmbedCost::from_sentences(src, tgt, encoder);

    std::vector<std::vector<double>> sims(n, std::vector<double>(m));
    std::vector<double> row_max(n, -std::numeric_limits<double>::infinity());
    std::vector<double> col_max(m, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            sims[i][j] = cost.pair_sim(i, j);
            row_max[i] = std::max(row_max[i], sims[i][j]);
            col_max[j] = std::max(col_max[j], sims[i][j]);
        }

    struct Cand {
        std::size_t i, j;
        double sim;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (sims[i][j] >= cfg.anchor_threshold && sims[i][j] >= row_max[i] && sims[i][j] >= col_max[j])
                cands.push_back({i, j, sims[i][j]});
        }

    // Monotone chain over candidates (strictly increasing in both indices)
    // maximizing total similarity; first-found optimum kept on ties.
    std::vector<double> best(cands.size());
    std::vector<std::ptrdiff_t> parent(cands.size(), -1);
    double global_best = 0.0;
    std::ptrdiff_t global_end = -1;
    for (std::size_t k = 0; k < cands.size(); ++k) {
        best[k] = cands[k].sim;
        for (std::size_t l = 0; l < k; ++l) {
            if (cands[l].i < cands[k].i && cands[l].j < cands[k].j && best[l] + cands[k].sim > best[k]) {
                best[k] = best[l] + cands[k].sim;
                parent[k] = static_cast<std::ptrdiff_t>(l);
            }
        }
        if (best[k] > global_best) {
            global_best = best[k];
            global_end = static_cast<std::ptrdiff_t>(k);
        }
    }
    std::vector<Cand> anchors;
    for (std::ptrdiff_t k = global_end; k != -1; k = parent[static_cast<std::size_t>(k)])
        anchors.push_back(cands[static_cast<std::size_t>(k)]);
    std::reverse(anchors.begin(), anchors.end());

    std::vector<AlignmentLink> links;
    auto window = [&](std::size_t si, std::size_t s_end, std::size_t tj, std::size_t t_end) {
        const std::size_t sn = s_end - si, tn = t_end - tj;
        if (sn == 0 && tn == 0) return;
        for (AlignmentLink& l : detail::embed_window_dp(cost, si, sn, tj, tn, max_bead))
            links.push_back(std::move(l));
    };

    std::size_t pi = 0, pj = 0;
    for (const Cand& a : anchors) {
        window(pi, a.i, pj, a.j);
        AlignmentLink link;
        link.src_indices.push_back(static_cast<int>(a.i));
        link.tgt_indices.push_back(static_cast<int>(a.j));
        link.score = a.sim;
        links.push_back(std::move(link));
        pi = a.i + 1;
        pj = a.j + 1;
    }
    window(pi, n, pj, m);
    return links;
}

/// Retains links with score >= threshold, order preserved.
inline std::vector<AlignmentLink> filter_links(const std::vector<AlignmentLink>& links, double threshold) {
    std::vector<AlignmentLink> out;
    for (const AlignmentLink& l : links)
        if (l.score >= threshold) out.push_back(l);
    return out;
}

/// Per-section alignment. When both documents have more than one section the
/// counts must match and each section pair is aligned independently (links
/// never cross section boundaries, indices stay global); otherwise the whole
/// documents are aligned in one call. Empty sections on either side are
/// skipped.
inline std::vector<AlignmentLink> align_sections(
    const SegmentedDocument& src, const SegmentedDocument& tgt,
    const std::function<std::vector<AlignmentLink>(const std::vector<Sentence>&, const std::vector<Sentence>&)>&
        aligner) {
    auto spans = [](const SegmentedDocument& doc) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        const std::vector<std::size_t>& starts = doc.section_starts;
        for (std::size_t s = 0; s < starts.size(); ++s) {
            const std::size_t end = s + 1 < starts.size() ? starts[s + 1] : doc.sentences.size();
            out.emplace_back(starts[s], end);
        }
        if (out.empty()) out.emplace_back(0, doc.sentences.size());
        return out;
    };
    const auto src_spans = spans(src), tgt_spans = spans(tgt);

    if (src_spans.size() <= 1 || tgt_spans.size() <= 1) {
        if (src.sentences.empty() || tgt.sentences.empty()) throw data_error("align_sections: empty document");
        return aligner(src.sentences, tgt.sentences);
    }
    if (src_spans.size() != tgt_spans.size())
        throw data_error("align_sections: section count mismatch (" + std::to_string(src_spans.size()) + " vs " +
                         std::to_string(tgt_spans.size()) + ")");

    std::vector<AlignmentLink> all;
    for (std::size_t s = 0; s < src_spans.size(); ++s) {
        const auto [si, se] = src_spans[s];
        const auto [ti, te] = tgt_spans[s];
        if (si == se || ti == te) continue;
        const std::vector<Sentence> sub_src(src.sentences.begin() + static_cast<std::ptrdiff_t>(si),
                                            src.sentences.begin() + static_cast<std::ptrdiff_t>(se));
        const std::vector<Sentence> sub_tgt(tgt.sentences.begin() + static_cast<std::ptrdiff_t>(ti),
                                            tgt.sentences.begin() + static_cast<std::ptrdiff_t>(te));
        for (AlignmentLink link : aligner(sub_src, sub_tgt)) {
            for (int& idx : link.src_indices) idx += static_cast<int>(si);
            for (int& idx : link.tgt_indices) idx += static_cast<int>(ti);
            all.push_back(std::move(link));
        }
    }
    return all;
}

/// Converts substitution links to parallel training pairs; multi-sentence
/// sides are joined with single spaces, gap links are dropped.
inline std::vector<ParallelPair> links_to_pairs(const std::vector<AlignmentLink>& links,
                                                const std::vector<Sentence>& src,
                                                const std::vector<Sentence>& tgt) {
    auto join = [](const std::vector<int>& idx, const std::vector<Sentence>& sents) {
        std::string out;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (k > 0) out += ' ';
            out += sents.at(static_cast<std::size_t>(idx[k])).text;
        }
        return out;
    };
    std::vector<ParallelPair> pairs;
    for (const AlignmentLink& l : links) {
        if (l.src_indices.empty() || l.tgt_indices.empty()) continue;
        pairs.push_back({join(l.src_indices, src), join(l.tgt_indices, tgt), l.score});
    }
    return pairs;
}

} // namespace logos
