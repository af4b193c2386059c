#ifndef BAPG_EVAL_HPP
#define BAPG_EVAL_HPP

#include <map>
#include <string>
#include <vector>

#include "bapg/core.hpp"
#include "bapg/proposal.hpp"

namespace bapg {

struct Interval {
    double start = 0.0;
    double end = 0.0;
};

struct Detection {
    std::string video_id;
    double t_start = 0.0;
    double t_end = 0.0;
    std::string label;
    double score = 0.0;
};

// Per-threshold metric values plus their arithmetic mean, Table-style.
struct EvalReport {
    std::string metric_name;
    std::vector<std::pair<double, double>> per_threshold; // (threshold, value)
    double average = 0.0;
    std::size_t num_ground_truth = 0;
    std::size_t num_predictions = 0;
    std::vector<std::string> classes_without_ground_truth;
};

struct ApResult {
    std::map<std::string, double> per_class;
    double mean = 0.0;
    // Detection labels with no ground-truth instance anywhere; excluded
    // from the mean.
    std::vector<std::string> ignored_classes;
};

struct BoundaryErrorResult {
    std::size_t num_matches = 0;
    double mean_abs_start = 0.0; // seconds; meaningful only when matched
    double mean_abs_end = 0.0;
};

// Intersection over union of two time intervals, in [0, 1].
double temporal_iou(const Interval& a, const Interval& b);

// Fraction of ground-truth instances matched by one of each video's top_n
// proposals (by score) at tIoU >= threshold. Greedy highest-score-first,
// best-IoU assignment, one match per proposal and per instance.
double average_recall(const ProposalSet& proposals,
                      const std::vector<VideoAnnotation>& ground_truth,
                      double threshold, std::size_t top_n);

// Per-class all-point-interpolated AP with greedy matching; mean over
// classes that have at least one ground-truth instance.
ApResult detection_average_precision(const std::vector<Detection>& detections,
                                     const std::vector<VideoAnnotation>& ground_truth,
                                     double threshold);

EvalReport evaluate_recall_over_thresholds(const ProposalSet& proposals,
                                           const std::vector<VideoAnnotation>& ground_truth,
                                           const std::vector<double>& thresholds,
                                           std::size_t top_n);

EvalReport evaluate_map_over_thresholds(const std::vector<Detection>& detections,
                                        const std::vector<VideoAnnotation>& ground_truth,
                                        const std::vector<double>& thresholds);

// Mean |delta t_s| and |delta t_e| over matched (proposal, ground truth)
// pairs at the given threshold; num_matches == 0 signals "no matches".
BoundaryErrorResult boundary_error(const ProposalSet& proposals,
                                   const std::vector<VideoAnnotation>& ground_truth,
                                   double threshold);

// Threshold grid used by the report tables: {0.3, 0.4, 0.5, 0.6, 0.7}.
const std::vector<double>& default_iou_thresholds();
// Alternative grid {0.5, 0.55, ..., 0.95}.
const std::vector<double>& dense_iou_thresholds();

} // namespace bapg

#endif
