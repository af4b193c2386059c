#include "bapg/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "bapg/error.hpp"
#include "bapg/tsc.hpp"

namespace bapg {

void FeatureSequence::validate() const {
    if (rows.rows < 1 || rows.cols < 1) {
        throw ValidationError("feature sequence '" + video_id + "': needs L_f >= 1, c >= 1");
    }
    if (!(stride_seconds > 0.0)) {
        throw ValidationError("feature sequence '" + video_id + "': stride must be positive");
    }
    for (double v : rows.data) {
        if (!std::isfinite(v)) {
            throw ValidationError("feature sequence '" + video_id + "': non-finite entry");
        }
    }
}

double score_proposal(const SimilarityMatrix& sim, std::size_t a, std::size_t b) {
    const std::size_t l = sim.size();
    if (a > b || b >= l) {
        throw ValidationError("score_proposal: indices (" + std::to_string(a) + ", " +
                              std::to_string(b) + ") out of range for l = " +
                              std::to_string(l));
    }
    double sum = 0.0;
    for (std::size_t i = a; i <= b; ++i) {
        for (std::size_t j = a; j <= b; ++j) sum += sim.values(i, j);
    }
    const double len = static_cast<double>(b - a + 1);
    return sum / (len * len);
}

// Deterministic proposal order: descending score, then earlier start,
// earlier end, smaller m.
static bool proposal_before(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    if (a.t_end != b.t_end) return a.t_end < b.t_end;
    return a.source_m < b.source_m;
}

ProposalSet generate_proposals(const SimilarityMatrix& sim,
                               const std::vector<std::size_t>& m_values) {
    if (m_values.empty()) {
        throw ValidationError("generate_proposals: m_values must be nonempty");
    }
    sim.validate();
    const double interval = sim.interval_seconds;

    std::vector<std::size_t> ms = m_values;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

    std::map<std::pair<double, double>, Proposal> unique;
    for (std::size_t m : ms) {
        const Segmentation seg = optimal_change_points(sim, m);
        std::size_t start = 0;
        for (std::size_t k = 0; k <= seg.num_change_points(); ++k) {
            const std::size_t end =
                k < seg.num_change_points() ? seg.change_points[k] : sim.size();
            Proposal p;
            p.video_id = sim.video_id;
            p.t_start = static_cast<double>(start) * interval;
            p.t_end = static_cast<double>(end) * interval;
            p.score = score_proposal(sim, start, end - 1);
            p.source_m = m;
            auto [it, inserted] = unique.try_emplace({p.t_start, p.t_end}, p);
            if (!inserted && p.score > it->second.score) it->second = p;
            start = end;
        }
    }

    ProposalSet out;
    out.reserve(unique.size());
    for (auto& [key, p] : unique) out.push_back(p);
    std::sort(out.begin(), out.end(), proposal_before);
    return out;
}

std::size_t map_time_to_feature_index(double t, double stride_seconds,
                                      std::size_t num_rows, bool* overshoot_warning) {
    if (!(t >= 0.0)) throw ValidationError("map_time_to_feature_index: t must be >= 0");
    if (!(stride_seconds > 0.0) || num_rows == 0) {
        throw ValidationError("map_time_to_feature_index: need positive stride, L_f >= 1");
    }
    if (overshoot_warning) {
        const double end = static_cast<double>(num_rows) * stride_seconds;
        *overshoot_warning = t > end + stride_seconds;
    }
    const double idx = std::floor(t / stride_seconds);
    if (idx <= 0.0) return 0;
    if (idx >= static_cast<double>(num_rows)) return num_rows - 1; // clamp, cast-safe
    return static_cast<std::size_t>(idx);
}

FeatureSequence truncate_features(const FeatureSequence& video_features, const Proposal& p) {
    video_features.validate();
    if (!(p.t_start >= 0.0) || !(p.t_start < p.t_end) || !std::isfinite(p.t_end)) {
        throw ValidationError("truncate_features: proposal needs finite 0 <= t_s < t_e");
    }
    const std::size_t first =
        map_time_to_feature_index(p.t_start, video_features.stride_seconds,
                                  video_features.length());
    const std::size_t last =
        map_time_to_feature_index(p.t_end, video_features.stride_seconds,
                                  video_features.length());
    if (first > last) {
        throw ValidationError("truncate_features: degenerate row range after clamping");
    }

    FeatureSequence out;
    out.video_id = video_features.video_id;
    out.stride_seconds = video_features.stride_seconds;
    out.rows = Matrix(last - first + 1, video_features.rows.cols);
    for (std::size_t i = first; i <= last; ++i) {
        const auto src = video_features.rows.row(i);
        std::copy(src.begin(), src.end(), out.rows.row(i - first).begin());
    }
    return out;
}

FeatureSequence refine_features(const FeatureSequence& video_features,
                                const ProposalSet& proposals, std::size_t top_k,
                                double alpha) {
    video_features.validate();
    FeatureSequence out = video_features;
    if (top_k == 0 || proposals.empty()) return out;

    ProposalSet ranked = proposals;
    std::sort(ranked.begin(), ranked.end(), proposal_before);
    if (ranked.size() > top_k) ranked.resize(top_k);

    const std::size_t cols = video_features.rows.cols;
    Matrix delta(video_features.length(), cols);
    for (const Proposal& p : ranked) {
        const FeatureSequence piece = truncate_features(video_features, p);
        std::vector<double> mean(cols, 0.0);
        for (std::size_t i = 0; i < piece.length(); ++i) {
            const auto r = piece.rows.row(i);
            for (std::size_t j = 0; j < cols; ++j) mean[j] += r[j];
        }
        for (std::size_t j = 0; j < cols; ++j) {
            mean[j] /= static_cast<double>(piece.length());
        }
        const std::size_t first = map_time_to_feature_index(
            p.t_start, video_features.stride_seconds, video_features.length());
        const std::size_t last = map_time_to_feature_index(
            p.t_end, video_features.stride_seconds, video_features.length());
        for (std::size_t i = first; i <= last; ++i) {
            for (std::size_t j = 0; j < cols; ++j) delta(i, j) += alpha * mean[j];
        }
    }
    for (std::size_t i = 0; i < out.rows.data.size(); ++i) {
        // Rows outside every span keep delta 0 and stay bitwise unchanged.
        if (delta.data[i] != 0.0) out.rows.data[i] += delta.data[i];
    }
    return out;
}

} // namespace bapg
