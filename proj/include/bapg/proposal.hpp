#ifndef BAPG_PROPOSAL_HPP
#define BAPG_PROPOSAL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bapg/core.hpp"
#include "bapg/matrix.hpp"

namespace bapg {

// Candidate temporal interval; t_end is the exclusive segment end, so
// adjacent proposals from one segmentation share boundaries without overlap.
struct Proposal {
    std::string video_id;
    double t_start = 0.0;
    double t_end = 0.0;
    double score = 0.0;
    std::size_t source_m = 0; // change-point count that produced it
};

using ProposalSet = std::vector<Proposal>;

// Video-level feature sequence F_v (and truncations of it).
struct FeatureSequence {
    std::string video_id;
    double stride_seconds = 1.0;
    Matrix rows; // L_f x c

    std::size_t length() const { return rows.rows; }
    void validate() const;
};

// Mean similarity over the block [a, b] x [a, b]; the proposal confidence.
double score_proposal(const SimilarityMatrix& sim, std::size_t a, std::size_t b);

// Runs the change-point DP once per m, turns every segment [a, b) into a
// proposal (t = frame * interval), deduplicates exact intervals keeping the
// highest score, and sorts by descending score.
ProposalSet generate_proposals(const SimilarityMatrix& sim,
                               const std::vector<std::size_t>& m_values);

// floor(t / stride) clamped to [0, num_rows - 1). Overshoot beyond one
// stride past the end sets *overshoot_warning when provided.
std::size_t map_time_to_feature_index(double t, double stride_seconds,
                                      std::size_t num_rows,
                                      bool* overshoot_warning = nullptr);

// Rows [map(t_start) .. map(t_end)] inclusive.
FeatureSequence truncate_features(const FeatureSequence& video_features,
                                  const Proposal& p);

// Adds alpha * (temporal mean of each top-k proposal's truncation) to every
// row inside that proposal's span; all deltas are computed from the original
// feature rows, so the result is independent of proposal order.
FeatureSequence refine_features(const FeatureSequence& video_features,
                                const ProposalSet& proposals, std::size_t top_k,
                                double alpha);

} // namespace bapg

#endif
