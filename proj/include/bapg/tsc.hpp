#ifndef BAPG_TSC_HPP
#define BAPG_TSC_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bapg/core.hpp"

namespace bapg {

// Summed-area table over the similarity matrix plus cumulative diagonal
// sums; block and diagonal range queries answer in O(1).
struct PrefixTable {
    std::size_t size = 0;        // l
    std::vector<double> block;   // (l+1)*(l+1), block[i*(l+1)+j] = sum S[a<i][b<j]
    std::vector<double> diag;    // l+1 cumulative diagonal sums

    // Sum of S over [a, b] x [a, b], indices inclusive.
    double block_sum(std::size_t a, std::size_t b) const;
    // Sum of S[i][i] for i in [a, b].
    double diag_sum(std::size_t a, std::size_t b) const;
};

// Exact minimum-scatter segmentation into m change points. Segments are
// half-open [c_k, c_k+1) over frame indices; a change point is the first
// frame of a new segment.
struct Segmentation {
    std::string video_id;
    std::vector<std::size_t> change_points; // strictly increasing, in (0, l)
    double total_cost = 0.0;
    std::vector<double> segment_costs;

    std::size_t num_change_points() const { return change_points.size(); }
};

PrefixTable build_prefix_table(const SimilarityMatrix& sim);

// Within-segment kernel scatter over frames [a, b] inclusive:
//   V(a, b) = sum_i S[i][i]  -  (1 / (b-a+1)) * sum_{i,j} S[i][j].
// Zero for a perfectly homogeneous segment.
double segment_cost(const PrefixTable& table, std::size_t a, std::size_t b);

// Exact DP minimizer over all segmentations with exactly m change points;
// ties broken toward the lexicographically smallest change-point sequence.
// O(m * l^2).
Segmentation optimal_change_points(const SimilarityMatrix& sim, std::size_t m);

// Exhaustive-enumeration oracle with the same tie-break. Guarded to
// l <= 20 and C(l-1, m) <= 1e6.
Segmentation brute_force_change_points(const SimilarityMatrix& sim, std::size_t m);

} // namespace bapg

#endif
