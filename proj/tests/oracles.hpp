// Independent naive reference implementations used to cross-check the
// library. Deliberately written with different algorithms (quadratic scans,
// explicit enumeration) than the production code.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "logos/align.hpp"
#include "logos/embedding.hpp"

namespace oracle {

// Fractional ranks without sorting: rank = 1 + #smaller + (#equal - 1)/2.
inline std::vector<double> ranks(const std::vector<double>& xs) {
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] < xs[i]) ++smaller;
            if (xs[j] == xs[i]) ++equal;
        }
        r[i] = 1.0 + static_cast<double>(smaller) + (static_cast<double>(equal) - 1.0) / 2.0;
    }
    return r;
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
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

inline double recall_at_k(const std::vector<std::string>& ranked,
                          const std::unordered_set<std::string>& relevant, std::size_t k) {
    double hits = 0.0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        for (const std::string& r : relevant)
            if (r == ranked[i]) hits += 1.0;
    }
    return hits / static_cast<double>(relevant.size());
}

inline double ap_at_k(const std::vector<std::string>& ranked,
                      const std::unordered_set<std::string>& relevant, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        if (relevant.count(ranked[i]) == 0) continue;
        // precision@(i+1) recomputed from scratch
        double rel_so_far = 0.0;
        for (std::size_t j = 0; j <= i; ++j)
            if (relevant.count(ranked[j]) > 0) rel_so_far += 1.0;
        sum += rel_so_far / static_cast<double>(i + 1);
    }
    const std::size_t denom = relevant.size() < k ? relevant.size() : k;
    return sum / static_cast<double>(denom);
}

// Bidirectional retrieval accuracy by explicit full scans. Ties resolve to
// the lowest index, mirroring a stable first-max rule.
inline double search_accuracy(const std::vector<std::vector<double>>& sim) {
    const std::size_t n = sim.size();
    double fwd = 0.0, bwd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (sim[i][j] > sim[i][arg]) arg = j;
        if (arg == i) fwd += 1.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (sim[i][j] > sim[arg][j]) arg = i;
        if (arg == j) bwd += 1.0;
    }
    return 0.5 * (fwd + bwd) / static_cast<double>(n);
}

// All monotone bead decompositions of an n x m lattice, invoking visit on
// each complete path. Beads come from the caller so the searched space is
// exactly the aligner's.
inline void enumerate_paths(std::size_t n, std::size_t m, const std::vector<std::pair<int, int>>& beads,
                            std::vector<logos::AlignmentLink>& path,
                            const std::function<void(const std::vector<logos::AlignmentLink>&)>& visit,
                            std::size_t i = 0, std::size_t j = 0) {
    if (i == n && j == m) {
        visit(path);
        return;
    }
    for (const auto& [a, b] : beads) {
        if (i + static_cast<std::size_t>(a) > n || j + static_cast<std::size_t>(b) > m) continue;
        logos::AlignmentLink link;
        for (int k = 0; k < a; ++k) link.src_indices.push_back(static_cast<int>(i) + k);
        for (int k = 0; k < b; ++k) link.tgt_indices.push_back(static_cast<int>(j) + k);
        path.push_back(std::move(link));
        enumerate_paths(n, m, beads, path, visit, i + static_cast<std::size_t>(a),
                        j + static_cast<std::size_t>(b));
        path.pop_back();
    }
}

// Exhaustive minimum over monotone decompositions, costed with the same
// accumulation routine the DP's result is costed with.
inline double brute_min_cost(const logos::LengthDictCost& cost, std::size_t n, std::size_t m, int max_bead) {
    const std::vector<std::pair<int, int>> beads = logos::detail::bead_order(max_bead);
    double best = std::numeric_limits<double>::infinity();
    std::vector<logos::AlignmentLink> path;
    enumerate_paths(n, m, beads, path, [&](const std::vector<logos::AlignmentLink>& p) {
        const double c = logos::alignment_cost(p, cost);
        if (c < best) best = c;
    });
    return best;
}

// Exhaustive maximum total segment similarity (gaps contribute zero).
inline double brute_max_similarity(const logos::EmbedCost& cost, int max_bead) {
    const std::vector<std::pair<int, int>> beads = logos::detail::bead_order(max_bead);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<logos::AlignmentLink> path;
    enumerate_paths(cost.src_size(), cost.tgt_size(), beads, path,
                    [&](const std::vector<logos::AlignmentLink>& p) {
                        double total = 0.0;
                        for (const logos::AlignmentLink& l : p) {
                            if (l.src_indices.empty() || l.tgt_indices.empty()) {
                                total += 0.0;
                            } else {
                                total += cost.sub_sim(static_cast<std::size_t>(l.src_indices.front()),
                                                      static_cast<int>(l.src_indices.size()),
                                                      static_cast<std::size_t>(l.tgt_indices.front()),
                                                      static_cast<int>(l.tgt_indices.size()));
                            }
                        }
                        if (total > best) best = total;
                    });
    return best;
}

} // namespace oracle
