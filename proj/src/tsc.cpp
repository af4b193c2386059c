#include "bapg/tsc.hpp"

#include <limits>
#include <string>

#include "bapg/error.hpp"

namespace bapg {

double PrefixTable::block_sum(std::size_t a, std::size_t b) const {
    const std::size_t w = size + 1;
    return block[(b + 1) * w + (b + 1)] - block[a * w + (b + 1)] -
           block[(b + 1) * w + a] + block[a * w + a];
}

double PrefixTable::diag_sum(std::size_t a, std::size_t b) const {
    return diag[b + 1] - diag[a];
}

PrefixTable build_prefix_table(const SimilarityMatrix& sim) {
    sim.validate();
    const std::size_t l = sim.size();
    const std::size_t w = l + 1;
    PrefixTable table;
    table.size = l;
    table.block.assign(w * w, 0.0);
    table.diag.assign(w, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            table.block[(i + 1) * w + (j + 1)] = sim.values(i, j) +
                                                 table.block[i * w + (j + 1)] +
                                                 table.block[(i + 1) * w + j] -
                                                 table.block[i * w + j];
        }
        table.diag[i + 1] = table.diag[i] + sim.values(i, i);
    }
    return table;
}

double segment_cost(const PrefixTable& table, std::size_t a, std::size_t b) {
    if (a > b || b >= table.size) {
        throw ValidationError("segment_cost: indices (" + std::to_string(a) + ", " +
                              std::to_string(b) + ") out of range for l = " +
                              std::to_string(table.size));
    }
    const double len = static_cast<double>(b - a + 1);
    return table.diag_sum(a, b) - table.block_sum(a, b) / len;
}

namespace {

void check_m(std::size_t l, std::size_t m) {
    if (m > l - 1) {
        throw ValidationError("change points: m = " + std::to_string(m) +
                              " out of range [0, " + std::to_string(l - 1) + "]");
    }
}

void fill_costs(Segmentation& seg, const PrefixTable& table, std::size_t l) {
    seg.segment_costs.clear();
    std::size_t start = 0;
    for (std::size_t cp : seg.change_points) {
        seg.segment_costs.push_back(segment_cost(table, start, cp - 1));
        start = cp;
    }
    seg.segment_costs.push_back(segment_cost(table, start, l - 1));
}

double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return r;
}

// Advances an m-subset of {1, ..., l-1} to its lexicographic successor.
bool next_combination(std::vector<std::size_t>& cps, std::size_t l) {
    const std::size_t m = cps.size();
    for (std::size_t i = m; i-- > 0;) {
        if (cps[i] < l - 1 - (m - 1 - i)) {
            ++cps[i];
            for (std::size_t j = i + 1; j < m; ++j) cps[j] = cps[j - 1] + 1;
            return true;
        }
    }
    return false;
}

} // namespace

Segmentation optimal_change_points(const SimilarityMatrix& sim, std::size_t m) {
    const PrefixTable table = build_prefix_table(sim);
    const std::size_t l = table.size;
    check_m(l, m);

    // Suffix DP: best[k][t] = minimal cost of segmenting frames [t, l) with
    // exactly k interior change points. Costs accumulate right to left as
    // V + suffix, matching the oracle's fold so that tie comparisons see
    // bit-identical sums. The strict < update keeps the first (smallest)
    // minimizer, so front-to-back reconstruction through the back-pointers
    // yields the lexicographically smallest optimal change-point sequence.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(m + 1, std::vector<double>(l, inf));
    std::vector<std::vector<std::size_t>> next(m + 1, std::vector<std::size_t>(l, 0));
    for (std::size_t t = 0; t < l; ++t) best[0][t] = segment_cost(table, t, l - 1);
    for (std::size_t k = 1; k <= m; ++k) {
        // Segment [t, u) then k-1 change points in [u, l); u leaves room for
        // k-1 further boundaries.
        for (std::size_t t = 0; t + k < l; ++t) {
            double b = inf;
            for (std::size_t u = t + 1; u + (k - 1) < l; ++u) {
                const double cand = segment_cost(table, t, u - 1) + best[k - 1][u];
                if (cand < b) {
                    b = cand;
                    next[k][t] = u;
                }
            }
            best[k][t] = b;
        }
    }

    Segmentation seg;
    seg.video_id = sim.video_id;
    seg.total_cost = best[m][0];

    std::size_t t = 0;
    for (std::size_t k = m; k >= 1; --k) {
        t = next[k][t];
        seg.change_points.push_back(t);
    }

    fill_costs(seg, table, l);
    return seg;
}

Segmentation brute_force_change_points(const SimilarityMatrix& sim, std::size_t m) {
    const PrefixTable table = build_prefix_table(sim);
    const std::size_t l = table.size;
    check_m(l, m);
    if (l > 20 || binomial(l - 1, m) > 1e6) {
        throw ValidationError("brute_force_change_points: instance too large (l = " +
                              std::to_string(l) + ", m = " + std::to_string(m) + ")");
    }

    // Cost of a candidate, folded right to match the DP's accumulation order.
    const auto fold_cost = [&](const std::vector<std::size_t>& cps) {
        double cost = segment_cost(table, cps.empty() ? 0 : cps.back(), l - 1);
        for (std::size_t k = cps.size(); k-- > 0;) {
            const std::size_t start = (k == 0) ? 0 : cps[k - 1];
            cost = segment_cost(table, start, cps[k] - 1) + cost;
        }
        return cost;
    };

    // Enumerate m-subsets of {1, ..., l-1} in lexicographic order; the first
    // strict minimum is therefore the lexicographically smallest optimum.
    std::vector<std::size_t> cps(m);
    for (std::size_t i = 0; i < m; ++i) cps[i] = i + 1;

    Segmentation bestSeg;
    bestSeg.video_id = sim.video_id;
    double bestCost = std::numeric_limits<double>::infinity();

    for (;;) {
        const double cost = fold_cost(cps);
        if (cost < bestCost) {
            bestCost = cost;
            bestSeg.change_points = cps;
        }
        if (m == 0 || !next_combination(cps, l)) break;
    }

    bestSeg.total_cost = bestCost;
    fill_costs(bestSeg, table, l);
    return bestSeg;
}

} // namespace bapg
