#include "bapg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bapg/error.hpp"

namespace bapg {

namespace {

void check_threshold(double threshold) {
    if (!(threshold > 0.0) || !(threshold <= 1.0)) {
        throw ValidationError("tIoU threshold must lie in (0, 1]");
    }
}

bool score_order(const Proposal& a, const Proposal& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.t_end < b.t_end;
}

// Greedy matching of one video's ranked proposals against its instances.
// Returns (gt index, proposal) pairs; each side is used at most once.
std::vector<std::pair<std::size_t, const Proposal*>> match_video(
    std::vector<const Proposal*> ranked, const VideoAnnotation& ann, double threshold) {
    std::vector<bool> taken(ann.instances.size(), false);
    std::vector<std::pair<std::size_t, const Proposal*>> matches;
    for (const Proposal* p : ranked) {
        double best_iou = 0.0;
        std::size_t best_gt = ann.instances.size();
        for (std::size_t g = 0; g < ann.instances.size(); ++g) {
            if (taken[g]) continue;
            const double iou = temporal_iou({p->t_start, p->t_end},
                                            {ann.instances[g].t_start, ann.instances[g].t_end});
            if (iou >= threshold && iou > best_iou) {
                best_iou = iou;
                best_gt = g;
            }
        }
        if (best_gt < ann.instances.size()) {
            taken[best_gt] = true;
            matches.emplace_back(best_gt, p);
        }
    }
    return matches;
}

// Ranked per-video proposal lists, truncated to top_n when top_n > 0.
std::map<std::string, std::vector<const Proposal*>> rank_by_video(
    const ProposalSet& proposals, std::size_t top_n) {
    std::map<std::string, std::vector<const Proposal*>> byVideo;
    for (const Proposal& p : proposals) byVideo[p.video_id].push_back(&p);
    for (auto& [id, list] : byVideo) {
        std::sort(list.begin(), list.end(),
                  [](const Proposal* a, const Proposal* b) { return score_order(*a, *b); });
        if (top_n > 0 && list.size() > top_n) list.resize(top_n);
    }
    return byVideo;
}

} // namespace

double temporal_iou(const Interval& a, const Interval& b) {
    if (!(a.start < a.end) || !(b.start < b.end)) {
        throw ValidationError("temporal_iou: intervals must satisfy start < end");
    }
    const double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
    if (inter <= 0.0) return 0.0;
    const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
    return inter / uni;
}

double average_recall(const ProposalSet& proposals,
                      const std::vector<VideoAnnotation>& ground_truth,
                      double threshold, std::size_t top_n) {
    check_threshold(threshold);
    if (top_n < 1) throw ValidationError("average_recall: top_n must be >= 1");
    std::size_t total_gt = 0;
    for (const auto& ann : ground_truth) total_gt += ann.instances.size();
    if (total_gt == 0) {
        throw ValidationError("average_recall: no ground-truth instances (undefined)");
    }

    const auto byVideo = rank_by_video(proposals, top_n);
    std::size_t matched = 0;
    for (const auto& ann : ground_truth) {
        const auto it = byVideo.find(ann.video_id);
        if (it == byVideo.end()) continue;
        matched += match_video(it->second, ann, threshold).size();
    }
    return static_cast<double>(matched) / static_cast<double>(total_gt);
}

ApResult detection_average_precision(const std::vector<Detection>& detections,
                                     const std::vector<VideoAnnotation>& ground_truth,
                                     double threshold) {
    check_threshold(threshold);

    // Ground truth indexed by (class, video).
    std::map<std::string, std::map<std::string, std::vector<Interval>>> gt;
    std::map<std::string, std::size_t> gt_count;
    for (const auto& ann : ground_truth) {
        for (const auto& inst : ann.instances) {
            gt[inst.label][ann.video_id].push_back({inst.t_start, inst.t_end});
            ++gt_count[inst.label];
        }
    }

    std::map<std::string, std::vector<const Detection*>> dets_by_class;
    std::set<std::string> ignored;
    for (const Detection& d : detections) {
        if (!(d.t_start < d.t_end) || !std::isfinite(d.t_start) ||
            !std::isfinite(d.t_end) || !std::isfinite(d.score)) {
            throw ValidationError("detection_average_precision: invalid detection in video '" +
                                  d.video_id + "'");
        }
        if (gt.count(d.label) == 0) {
            ignored.insert(d.label);
            continue;
        }
        dets_by_class[d.label].push_back(&d);
    }

    ApResult result;
    result.ignored_classes.assign(ignored.begin(), ignored.end());

    double ap_sum = 0.0;
    for (const auto& [label, videos] : gt) {
        const std::size_t npos = gt_count[label];
        double ap = 0.0;
        auto it = dets_by_class.find(label);
        if (it != dets_by_class.end()) {
            auto dets = it->second;
            std::stable_sort(dets.begin(), dets.end(),
                             [](const Detection* a, const Detection* b) {
                                 if (a->score != b->score) return a->score > b->score;
                                 if (a->video_id != b->video_id) return a->video_id < b->video_id;
                                 if (a->t_start != b->t_start) return a->t_start < b->t_start;
                                 return a->t_end < b->t_end;
                             });

            std::map<std::string, std::vector<bool>> taken;
            for (const auto& [vid, spans] : videos) taken[vid].assign(spans.size(), false);

            std::vector<bool> is_tp(dets.size(), false);
            for (std::size_t i = 0; i < dets.size(); ++i) {
                const Detection* d = dets[i];
                const auto vit = videos.find(d->video_id);
                if (vit == videos.end()) continue;
                const auto& spans = vit->second;
                auto& used = taken[d->video_id];
                double best_iou = 0.0;
                std::size_t best = spans.size();
                for (std::size_t g = 0; g < spans.size(); ++g) {
                    if (used[g]) continue;
                    const double iou = temporal_iou({d->t_start, d->t_end}, spans[g]);
                    if (iou >= threshold && iou > best_iou) {
                        best_iou = iou;
                        best = g;
                    }
                }
                if (best < spans.size()) {
                    used[best] = true;
                    is_tp[i] = true;
                }
            }

            // All-point interpolated area under the precision-recall curve.
            std::vector<double> precision(dets.size()), recall(dets.size());
            std::size_t tp = 0;
            for (std::size_t i = 0; i < dets.size(); ++i) {
                if (is_tp[i]) ++tp;
                precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
                recall[i] = static_cast<double>(tp) / static_cast<double>(npos);
            }
            for (std::size_t i = dets.size(); i-- > 1;) {
                precision[i - 1] = std::max(precision[i - 1], precision[i]);
            }
            double prev_recall = 0.0;
            for (std::size_t i = 0; i < dets.size(); ++i) {
                ap += (recall[i] - prev_recall) * precision[i];
                prev_recall = recall[i];
            }
        }
        result.per_class[label] = ap;
        ap_sum += ap;
    }

    result.mean = gt.empty() ? 0.0 : ap_sum / static_cast<double>(gt.size());
    return result;
}

namespace {

EvalReport report_from_values(std::string name,
                              const std::vector<std::pair<double, double>>& values) {
    EvalReport rep;
    rep.metric_name = std::move(name);
    rep.per_threshold = values;
    double sum = 0.0;
    for (const auto& [t, v] : values) sum += v;
    rep.average = sum / static_cast<double>(values.size());
    return rep;
}

} // namespace

EvalReport evaluate_recall_over_thresholds(const ProposalSet& proposals,
                                           const std::vector<VideoAnnotation>& ground_truth,
                                           const std::vector<double>& thresholds,
                                           std::size_t top_n) {
    if (thresholds.empty()) {
        throw ValidationError("evaluate_over_thresholds: thresholds must be nonempty");
    }
    std::vector<std::pair<double, double>> values;
    for (double t : thresholds) {
        values.emplace_back(t, average_recall(proposals, ground_truth, t, top_n));
    }
    EvalReport rep = report_from_values("AR@" + std::to_string(top_n), values);
    for (const auto& ann : ground_truth) rep.num_ground_truth += ann.instances.size();
    rep.num_predictions = proposals.size();
    return rep;
}

EvalReport evaluate_map_over_thresholds(const std::vector<Detection>& detections,
                                        const std::vector<VideoAnnotation>& ground_truth,
                                        const std::vector<double>& thresholds) {
    if (thresholds.empty()) {
        throw ValidationError("evaluate_over_thresholds: thresholds must be nonempty");
    }
    std::vector<std::pair<double, double>> values;
    std::vector<std::string> ignored;
    for (double t : thresholds) {
        const ApResult ap = detection_average_precision(detections, ground_truth, t);
        values.emplace_back(t, ap.mean);
        ignored = ap.ignored_classes;
    }
    EvalReport rep = report_from_values("mAP", values);
    for (const auto& ann : ground_truth) rep.num_ground_truth += ann.instances.size();
    rep.num_predictions = detections.size();
    rep.classes_without_ground_truth = std::move(ignored);
    return rep;
}

BoundaryErrorResult boundary_error(const ProposalSet& proposals,
                                   const std::vector<VideoAnnotation>& ground_truth,
                                   double threshold) {
    check_threshold(threshold);
    const auto byVideo = rank_by_video(proposals, 0); // no top-n cut

    BoundaryErrorResult res;
    double sum_start = 0.0;
    double sum_end = 0.0;
    for (const auto& ann : ground_truth) {
        const auto it = byVideo.find(ann.video_id);
        if (it == byVideo.end()) continue;
        for (const auto& [g, p] : match_video(it->second, ann, threshold)) {
            sum_start += std::fabs(p->t_start - ann.instances[g].t_start);
            sum_end += std::fabs(p->t_end - ann.instances[g].t_end);
            ++res.num_matches;
        }
    }
    if (res.num_matches > 0) {
        res.mean_abs_start = sum_start / static_cast<double>(res.num_matches);
        res.mean_abs_end = sum_end / static_cast<double>(res.num_matches);
    }
    return res;
}

const std::vector<double>& default_iou_thresholds() {
    static const std::vector<double> grid = {0.3, 0.4, 0.5, 0.6, 0.7};
    return grid;
}

const std::vector<double>& dense_iou_thresholds() {
    static const std::vector<double> grid = {0.5, 0.55, 0.6, 0.65, 0.7,
                                             0.75, 0.8, 0.85, 0.9, 0.95};
    return grid;
}

} // namespace bapg
