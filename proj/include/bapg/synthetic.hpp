#ifndef BAPG_SYNTHETIC_HPP
#define BAPG_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bapg/core.hpp"

namespace bapg {

// Synthetic videos: a strong shared background channel, a weak semantic
// channel that distinguishes action frames from their flanking warm-up /
// cool-down frames, and per-frame noise. Scales are per-coordinate standard
// deviations; beta > sigma_s > sigma_n keeps frames near-duplicates in the
// background channel while the semantic channel still separates them.
struct SynthConfig {
    std::size_t num_videos = 50;
    double duration_min = 60.0;
    double duration_max = 120.0;
    double interval_seconds = 1.0;
    std::size_t actions_min = 1;
    std::size_t actions_max = 3;
    double action_len_min = 5.0;
    double action_len_max = 15.0;
    double hard_phase_min = 2.0;
    double hard_phase_max = 4.0;
    std::size_t background_dim = 32;
    std::size_t semantic_dim = 8;
    double background_scale = 1.0;  // beta
    double semantic_scale = 0.3;    // sigma_s
    double noise_scale = 0.05;      // sigma_n
    std::size_t num_classes = 5;
    std::uint64_t seed = 1;

    std::size_t feature_dim() const { return background_dim + semantic_dim; }
    void validate() const;
};

struct SyntheticVideo {
    FrameFeatureSequence features;
    VideoAnnotation annotation;
    std::uint64_t video_seed = 0;
    std::size_t num_actions = 0;
};

// Deterministic in (cfg.seed, video_index); actions and hard phases are laid
// out sequentially with random background gaps, so they never overlap and
// all planted boundaries land on the frame grid.
SyntheticVideo generate_video(const SynthConfig& cfg, std::size_t video_index);

std::vector<SyntheticVideo> generate_dataset(const SynthConfig& cfg);

// Manifest: one line per video, "<video_id> <seed> <num_frames> <num_actions>".
std::string manifest_text(const std::vector<SyntheticVideo>& dataset);

} // namespace bapg

#endif
