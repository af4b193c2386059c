#ifndef BAPG_CORE_HPP
#define BAPG_CORE_HPP

#include <span>
#include <string>
#include <vector>

#include "bapg/matrix.hpp"

namespace bapg {

// Raw per-frame feature vectors of one video, sampled uniformly every
// interval_seconds; row i was taken at time i * interval_seconds.
struct FrameFeatureSequence {
    std::string video_id;
    double interval_seconds = 1.0;
    Matrix features; // l x d

    std::size_t num_frames() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
    double timestamp(std::size_t i) const {
        return static_cast<double>(i) * interval_seconds;
    }
    void validate() const;
};

// Encoder outputs for one video; every row has unit L2 norm (within 1e-6).
struct EmbeddingSequence {
    std::string video_id;
    double interval_seconds = 1.0;
    Matrix embeddings; // l x e

    std::size_t num_frames() const { return embeddings.rows; }
    std::size_t dim() const { return embeddings.cols; }
    void validate() const;
};

// Symmetric l x l frame-to-frame cosine similarity matrix with unit diagonal.
struct SimilarityMatrix {
    std::string video_id;
    double interval_seconds = 1.0;
    Matrix values; // l x l

    std::size_t size() const { return values.rows; }
    void validate() const;
};

struct ActionInstance {
    double t_start = 0.0;
    double t_end = 0.0;
    std::string label;
};

// Ground-truth action instances of one video, sorted by start time and
// non-overlapping (touching endpoints are allowed).
struct VideoAnnotation {
    std::string video_id;
    double duration_seconds = 0.0;
    std::vector<ActionInstance> instances;

    void sort_and_validate();
    void validate() const;
};

// (a . b) / (|a| |b|). Throws ValidationError on zero-norm input rather
// than returning NaN.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

SimilarityMatrix build_similarity_matrix(const EmbeddingSequence& emb);

// Timestamps [0, T, 2T, ...] strictly below duration; length ceil(duration/T).
std::vector<double> uniform_sample_times(double duration_seconds,
                                         double interval_seconds);

// Number of uniformly sampled frames, consistent with uniform_sample_times.
std::size_t frame_count(double duration_seconds, double interval_seconds);

// Frames are taken at the start of each interval: floor(t/T) clamped to [0, l-1].
std::size_t index_from_time(double t, double interval_seconds, std::size_t num_frames);

} // namespace bapg

#endif
