#include "bapg/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bapg/error.hpp"

namespace bapg {

namespace {

void require_finite_rows(const Matrix& m, const char* what) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (!std::isfinite(m(i, j))) {
                throw ValidationError(std::string(what) + ": non-finite entry at row " +
                                      std::to_string(i) + ", col " + std::to_string(j));
            }
        }
    }
}

} // namespace

void FrameFeatureSequence::validate() const {
    if (features.rows < 1 || features.cols < 1) {
        throw ValidationError("feature sequence '" + video_id + "': needs l >= 1 and d >= 1");
    }
    if (!(interval_seconds > 0.0) || !std::isfinite(interval_seconds)) {
        throw ValidationError("feature sequence '" + video_id + "': interval must be positive "
                              "and finite");
    }
    require_finite_rows(features, "feature sequence");
}

void EmbeddingSequence::validate() const {
    if (embeddings.rows < 1 || embeddings.cols < 1) {
        throw ValidationError("embedding sequence '" + video_id + "': needs l >= 1 and e >= 1");
    }
    if (!(interval_seconds > 0.0)) {
        throw ValidationError("embedding sequence '" + video_id + "': interval must be positive");
    }
    for (std::size_t i = 0; i < embeddings.rows; ++i) {
        const auto r = embeddings.row(i);
        for (double v : r) {
            if (!std::isfinite(v)) {
                throw ValidationError("embedding sequence '" + video_id +
                                      "': non-finite entry in row " + std::to_string(i));
            }
        }
        const double n = l2_norm(r);
        if (std::fabs(n - 1.0) > 1e-6) {
            throw ValidationError("embedding sequence '" + video_id + "': row " +
                                  std::to_string(i) + " norm " + std::to_string(n) +
                                  " is not unit within 1e-6");
        }
    }
}

void SimilarityMatrix::validate() const {
    const std::size_t l = values.rows;
    if (l < 1 || values.cols != l) {
        throw ValidationError("similarity matrix '" + video_id + "': must be square, l >= 1");
    }
    if (!(interval_seconds > 0.0)) {
        throw ValidationError("similarity matrix '" + video_id + "': interval must be positive");
    }
    for (std::size_t i = 0; i < l; ++i) {
        if (std::fabs(values(i, i) - 1.0) > 1e-9) {
            throw ValidationError("similarity matrix '" + video_id + "': diagonal entry " +
                                  std::to_string(i) + " is not 1 within 1e-9");
        }
        for (std::size_t j = 0; j < l; ++j) {
            const double v = values(i, j);
            if (!std::isfinite(v) || v < -1.0 - 1e-9 || v > 1.0 + 1e-9) {
                throw ValidationError("similarity matrix '" + video_id + "': entry (" +
                                      std::to_string(i) + "," + std::to_string(j) +
                                      ") outside [-1, 1]");
            }
            if (std::fabs(v - values(j, i)) > 1e-9) {
                throw ValidationError("similarity matrix '" + video_id +
                                      "': asymmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }
}

void VideoAnnotation::sort_and_validate() {
    std::stable_sort(instances.begin(), instances.end(),
                     [](const ActionInstance& a, const ActionInstance& b) {
                         return a.t_start < b.t_start;
                     });
    validate();
}

void VideoAnnotation::validate() const {
    if (!(duration_seconds > 0.0) || !std::isfinite(duration_seconds)) {
        throw ValidationError("annotation '" + video_id + "': duration must be positive "
                              "and finite");
    }
    for (std::size_t n = 0; n < instances.size(); ++n) {
        const ActionInstance& inst = instances[n];
        if (!(inst.t_start >= 0.0) || !(inst.t_start < inst.t_end) ||
            !(inst.t_end <= duration_seconds)) {
            throw ValidationError("annotation '" + video_id + "': instance " +
                                  std::to_string(n) + " violates 0 <= t_s < t_e <= duration");
        }
        if (n > 0) {
            if (instances[n - 1].t_start > inst.t_start) {
                throw ValidationError("annotation '" + video_id +
                                      "': instances not sorted by start time");
            }
            if (inst.t_start < instances[n - 1].t_end) {
                throw ValidationError("annotation '" + video_id + "': instances " +
                                      std::to_string(n - 1) + " and " + std::to_string(n) +
                                      " overlap");
            }
        }
    }
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("cosine_similarity: vectors must have equal nonzero length");
    }
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("cosine_similarity: degenerate zero-norm input");
    }
    // Rounding can push the ratio a few ulp past +-1; keep the contract exact.
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

SimilarityMatrix build_similarity_matrix(const EmbeddingSequence& emb) {
    emb.validate();
    const std::size_t l = emb.num_frames();
    SimilarityMatrix sim;
    sim.video_id = emb.video_id;
    sim.interval_seconds = emb.interval_seconds;
    sim.values = Matrix(l, l);
    for (std::size_t i = 0; i < l; ++i) {
        sim.values(i, i) = 1.0; // cosine of a row with itself
        for (std::size_t j = i + 1; j < l; ++j) {
            const double s = cosine_similarity(emb.embeddings.row(i), emb.embeddings.row(j));
            sim.values(i, j) = s;
            sim.values(j, i) = s;
        }
    }
    return sim;
}

std::vector<double> uniform_sample_times(double duration_seconds, double interval_seconds) {
    if (!(duration_seconds > 0.0) || !(interval_seconds > 0.0) ||
        !std::isfinite(duration_seconds) || !std::isfinite(interval_seconds)) {
        throw ValidationError("uniform_sample_times: duration and interval must be positive "
                              "and finite");
    }
    std::vector<double> times;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * interval_seconds;
        if (t >= duration_seconds) break;
        times.push_back(t);
    }
    return times;
}

std::size_t frame_count(double duration_seconds, double interval_seconds) {
    if (!(duration_seconds > 0.0) || !(interval_seconds > 0.0) ||
        !std::isfinite(duration_seconds) || !std::isfinite(interval_seconds)) {
        throw ValidationError("frame_count: duration and interval must be positive and finite");
    }
    std::size_t l = 0;
    while (static_cast<double>(l) * interval_seconds < duration_seconds) ++l;
    return l;
}

std::size_t index_from_time(double t, double interval_seconds, std::size_t num_frames) {
    if (!(interval_seconds > 0.0) || num_frames == 0) {
        throw ValidationError("index_from_time: need positive interval and l >= 1");
    }
    const double idx = std::floor(t / interval_seconds);
    if (idx <= 0.0) return 0;
    const std::size_t i = static_cast<std::size_t>(idx);
    return std::min(i, num_frames - 1);
}

} // namespace bapg
