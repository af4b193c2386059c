#include "bapg/sample_pool.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bapg/error.hpp"

namespace bapg {

SamplePools label_clips(const VideoAnnotation& annotation, std::size_t num_frames,
                        double interval_seconds, double hard_window_seconds) {
    annotation.validate();
    if (!(interval_seconds > 0.0)) {
        throw ValidationError("label_clips: interval must be positive");
    }
    if (!(hard_window_seconds >= 0.0)) { // +inf is allowed
        throw ValidationError("label_clips: hard window must be >= 0");
    }
    const std::size_t expected = frame_count(annotation.duration_seconds, interval_seconds);
    if (num_frames != expected) {
        throw ValidationError("label_clips: frame count " + std::to_string(num_frames) +
                              " does not match ceil(duration/interval) = " +
                              std::to_string(expected));
    }

    const std::size_t num_instances = annotation.instances.size();
    SamplePools pools;
    pools.video_id = annotation.video_id;
    pools.num_frames = num_frames;
    pools.positives.resize(num_instances);
    pools.hard_negatives.resize(num_instances);

    for (std::size_t i = 0; i < num_frames; ++i) {
        const double t = static_cast<double>(i) * interval_seconds;

        // Closed interval: frames exactly at t_s or t_e are positive.
        bool assigned = false;
        for (std::size_t n = 0; n < num_instances; ++n) {
            const ActionInstance& inst = annotation.instances[n];
            if (t >= inst.t_start && t <= inst.t_end) {
                pools.positives[n].push_back(i);
                assigned = true;
                break;
            }
        }
        if (assigned) continue;

        // Background frame: nearest instance boundary within the hard window,
        // ties resolved toward the earlier instance.
        std::size_t best_instance = num_instances;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < num_instances; ++n) {
            const ActionInstance& inst = annotation.instances[n];
            double dist;
            if (t < inst.t_start) {
                dist = inst.t_start - t;
            } else {
                dist = t - inst.t_end;
            }
            if (dist <= hard_window_seconds && dist < best_dist) {
                best_dist = dist;
                best_instance = n;
            }
        }
        if (best_instance < num_instances) {
            pools.hard_negatives[best_instance].push_back(i);
        } else {
            pools.easy_negatives.push_back(i);
        }
    }

    for (std::size_t n = 0; n < num_instances; ++n) {
        if (pools.positives[n].empty()) pools.empty_instances.push_back(n);
    }
    return pools;
}

Triplet draw_triplet(const SamplePools& pools, std::size_t instance_index, Rng& rng) {
    if (instance_index >= pools.num_instances()) {
        throw ValidationError("draw_triplet: instance " + std::to_string(instance_index) +
                              " out of range for video '" + pools.video_id + "'");
    }
    const auto& pos = pools.positives[instance_index];
    const auto& hard = pools.hard_negatives[instance_index];
    if (pos.size() < 2) {
        throw ValidationError("draw_triplet: instance " + std::to_string(instance_index) +
                              " of video '" + pools.video_id + "' has fewer than 2 positives");
    }
    if (hard.empty()) {
        throw ValidationError("draw_triplet: instance " + std::to_string(instance_index) +
                              " of video '" + pools.video_id + "' has no hard negatives");
    }

    const std::size_t ia = rng.uniform_index(pos.size());
    std::size_t ip = rng.uniform_index(pos.size() - 1);
    if (ip >= ia) ++ip; // without replacement
    const std::size_t ih = rng.uniform_index(hard.size());

    Triplet t;
    t.video_id = pools.video_id;
    t.instance_index = instance_index;
    t.anchor = pos[ia];
    t.positive = pos[ip];
    t.hard_negative = hard[ih];
    return t;
}

} // namespace bapg
