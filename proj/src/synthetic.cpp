#include "bapg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "bapg/error.hpp"
#include "bapg/rng.hpp"

namespace bapg {

namespace {

// Inclusive frame-count range for a duration range; lengths are whole
// multiples of the sampling interval so boundaries stay on the grid.
std::size_t frames_for(double seconds, double interval, bool round_up) {
    const double q = seconds / interval;
    return static_cast<std::size_t>(round_up ? std::ceil(q - 1e-9) : std::floor(q + 1e-9));
}

std::size_t draw_range(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + rng.uniform_index(hi - lo + 1);
}

} // namespace

void SynthConfig::validate() const {
    if (background_dim < 1 || semantic_dim < 1) {
        throw ValidationError("synth config: dims must be >= 1");
    }
    if (!(interval_seconds > 0.0) || !std::isfinite(interval_seconds)) {
        throw ValidationError("synth config: interval must be positive and finite");
    }
    if (!(duration_min > 0.0) || duration_min > duration_max ||
        !std::isfinite(duration_max)) {
        throw ValidationError("synth config: duration range empty, non-positive or "
                              "non-finite");
    }
    if (actions_min > actions_max) {
        throw ValidationError("synth config: actions range empty");
    }
    if (!(action_len_min > 0.0) || action_len_min > action_len_max ||
        !std::isfinite(action_len_max)) {
        throw ValidationError("synth config: action length range empty, non-positive or "
                              "non-finite");
    }
    if (!(hard_phase_min >= 0.0) || hard_phase_min > hard_phase_max ||
        !std::isfinite(hard_phase_max)) {
        throw ValidationError("synth config: hard phase range empty, negative or "
                              "non-finite");
    }
    if (num_classes < 1) throw ValidationError("synth config: num_classes must be >= 1");
    // sigma_n = 0 is allowed (noise-free generation); the strict ordering of
    // the other two keeps the background channel dominant.
    if (!(background_scale > semantic_scale) || !(semantic_scale > noise_scale) ||
        !(noise_scale >= 0.0) || !std::isfinite(background_scale)) {
        throw ValidationError("synth config: need background_scale > semantic_scale > "
                              "noise_scale >= 0");
    }
}

SyntheticVideo generate_video(const SynthConfig& cfg, std::size_t video_index) {
    cfg.validate();
    const double T = cfg.interval_seconds;
    const std::uint64_t video_seed = mix_seed(cfg.seed, video_index);
    Rng rng(video_seed);

    const std::size_t l_min = frames_for(cfg.duration_min, T, true);
    const std::size_t l_max = std::max(l_min, frames_for(cfg.duration_max, T, false));
    const std::size_t l = draw_range(rng, l_min, l_max);
    const double duration = static_cast<double>(l) * T;

    const std::size_t num_actions = draw_range(rng, cfg.actions_min, cfg.actions_max);

    // Block per action: [hard before][action frames][hard after].
    struct Block {
        std::size_t hard_before, action, hard_after;
        std::size_t start = 0; // filled after gap placement
    };
    const std::size_t act_lo = std::max<std::size_t>(1, frames_for(cfg.action_len_min, T, true));
    const std::size_t act_hi = std::max(act_lo, frames_for(cfg.action_len_max, T, false));
    const std::size_t hard_lo = frames_for(cfg.hard_phase_min, T, true);
    const std::size_t hard_hi = std::max(hard_lo, frames_for(cfg.hard_phase_max, T, false));

    const std::size_t min_total = num_actions * (2 * hard_lo + act_lo + 1);
    if (min_total > l) {
        throw ValidationError("generate_video: video " + std::to_string(video_index) +
                              " has no room for " + std::to_string(num_actions) +
                              " actions (at least " + std::to_string(min_total) +
                              " frames needed, " + std::to_string(l) + " available)");
    }

    // Unlucky draws may overflow short videos; redraw, falling back to the
    // minimal layout which is known to fit.
    std::vector<Block> blocks(num_actions);
    std::size_t total = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        total = 0;
        for (auto& b : blocks) {
            b.hard_before = draw_range(rng, hard_lo, hard_hi);
            // +1: the annotation span [t_s, t_e] is closed, so an action of
            // n seconds occupies n/T + 1 frames.
            b.action = draw_range(rng, act_lo, act_hi) + 1;
            b.hard_after = draw_range(rng, hard_lo, hard_hi);
            total += b.hard_before + b.action + b.hard_after;
        }
        if (total <= l) break;
    }
    if (total > l) {
        total = min_total;
        for (auto& b : blocks) {
            b.hard_before = hard_lo;
            b.action = act_lo + 1;
            b.hard_after = hard_lo;
        }
    }

    // Spread the slack into num_actions + 1 background gaps.
    const std::size_t slack = l - total;
    std::vector<double> weights(num_actions + 1);
    double weight_sum = 0.0;
    for (double& w : weights) {
        w = -std::log(1.0 - rng.uniform_real());
        weight_sum += w;
    }
    std::vector<std::size_t> gaps(num_actions + 1, 0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        gaps[i] = static_cast<std::size_t>(
            std::floor(static_cast<double>(slack) * weights[i] / weight_sum));
        assigned += gaps[i];
    }
    gaps.back() += slack - assigned;

    std::size_t cursor = 0;
    for (std::size_t k = 0; k < num_actions; ++k) {
        cursor += gaps[k];
        blocks[k].start = cursor;
        cursor += blocks[k].hard_before + blocks[k].action + blocks[k].hard_after;
    }

    // Per-video background vector plus per-action semantic and hard vectors.
    const std::vector<double> background =
        rng.normal_vector(cfg.background_dim, cfg.background_scale);
    std::vector<std::vector<double>> action_vec(num_actions);
    std::vector<std::vector<double>> hard_vec(num_actions);
    std::vector<std::size_t> action_class(num_actions);
    for (std::size_t k = 0; k < num_actions; ++k) {
        action_vec[k] = rng.normal_vector(cfg.semantic_dim, cfg.semantic_scale);
        hard_vec[k] = rng.normal_vector(cfg.semantic_dim, cfg.semantic_scale);
        action_class[k] = rng.uniform_index(cfg.num_classes);
    }

    char id[32];
    std::snprintf(id, sizeof(id), "vid_%04zu", video_index);

    SyntheticVideo video;
    video.video_seed = video_seed;
    video.num_actions = num_actions;
    video.features.video_id = id;
    video.features.interval_seconds = T;
    video.features.features = Matrix(l, cfg.feature_dim());
    video.annotation.video_id = id;
    video.annotation.duration_seconds = duration;

    for (std::size_t i = 0; i < l; ++i) {
        auto row = video.features.features.row(i);
        for (std::size_t j = 0; j < cfg.background_dim; ++j) row[j] = background[j];

        const std::vector<double>* semantic = nullptr;
        for (std::size_t k = 0; k < num_actions; ++k) {
            const Block& b = blocks[k];
            const std::size_t a0 = b.start + b.hard_before;
            const std::size_t a1 = a0 + b.action;
            if (i >= a0 && i < a1) semantic = &action_vec[k];
            else if (i >= b.start && i < a1 + b.hard_after) semantic = &hard_vec[k];
            if (semantic) break;
        }
        for (std::size_t j = 0; j < cfg.semantic_dim; ++j) {
            row[cfg.background_dim + j] = semantic ? (*semantic)[j] : 0.0;
        }
        if (cfg.noise_scale > 0.0) {
            for (std::size_t j = 0; j < cfg.feature_dim(); ++j) {
                row[j] += cfg.noise_scale * rng.normal();
            }
        }
    }

    for (std::size_t k = 0; k < num_actions; ++k) {
        const Block& b = blocks[k];
        const std::size_t first = b.start + b.hard_before;
        const std::size_t last = first + b.action - 1;
        ActionInstance inst;
        inst.t_start = static_cast<double>(first) * T;
        inst.t_end = static_cast<double>(last) * T;
        inst.label = "class_" + std::to_string(action_class[k]);
        video.annotation.instances.push_back(inst);
    }
    video.annotation.validate();
    video.features.validate();
    return video;
}

std::vector<SyntheticVideo> generate_dataset(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<SyntheticVideo> videos;
    videos.reserve(cfg.num_videos);
    for (std::size_t i = 0; i < cfg.num_videos; ++i) {
        videos.push_back(generate_video(cfg, i));
    }
    return videos;
}

std::string manifest_text(const std::vector<SyntheticVideo>& dataset) {
    std::string out;
    for (const auto& v : dataset) {
        out += v.features.video_id;
        out += ' ';
        out += std::to_string(v.video_seed);
        out += ' ';
        out += std::to_string(v.features.num_frames());
        out += ' ';
        out += std::to_string(v.num_actions);
        out += '\n';
    }
    return out;
}

} // namespace bapg
