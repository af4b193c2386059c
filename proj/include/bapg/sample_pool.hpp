#ifndef BAPG_SAMPLE_POOL_HPP
#define BAPG_SAMPLE_POOL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bapg/core.hpp"
#include "bapg/rng.hpp"

namespace bapg {

// Per-video frame pools: one positive and one hard-negative pool per action
// instance, plus a shared easy-negative pool. Pools partition [0, l).
struct SamplePools {
    std::string video_id;
    std::size_t num_frames = 0;
    std::vector<std::vector<std::size_t>> positives;
    std::vector<std::vector<std::size_t>> hard_negatives;
    std::vector<std::size_t> easy_negatives;
    // Instances too short to contain a sampled frame; caller decides whether
    // to skip them.
    std::vector<std::size_t> empty_instances;

    std::size_t num_instances() const { return positives.size(); }
    bool instance_trainable(std::size_t n) const {
        return positives[n].size() >= 2 && !hard_negatives[n].empty();
    }
};

struct Triplet {
    std::string video_id;
    std::size_t instance_index = 0;
    std::size_t anchor = 0;
    std::size_t positive = 0;
    std::size_t hard_negative = 0;
};

// Assigns every frame to exactly one pool. Action frames (timestamp inside
// the closed span [t_s, t_e]) are positive; background frames within
// hard_window_seconds of an instance boundary are that instance's hard
// negatives (nearest boundary wins, earlier instance on ties); the rest are
// easy negatives. hard_window_seconds may be +infinity, which reproduces the
// whole-adjacent-clip rule.
SamplePools label_clips(const VideoAnnotation& annotation, std::size_t num_frames,
                        double interval_seconds, double hard_window_seconds);

// Uniform anchor/positive draw without replacement plus a uniform hard
// negative, all from the given instance's pools.
Triplet draw_triplet(const SamplePools& pools, std::size_t instance_index, Rng& rng);

} // namespace bapg

#endif
