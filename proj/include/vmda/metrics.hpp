#pragma once

#include <optional>
#include <vector>

#include "vmda/box.hpp"

namespace vmda::metrics {

// One entry per frame; std::nullopt marks an absent box (reported target loss
// for predictions, invisible target for ground truth).
using BoxSequence = std::vector<std::optional<BoundingBox>>;

inline constexpr double kDefaultPrThreshold = 20.0;
inline constexpr double kDefaultSrThreshold = 0.5;
inline constexpr std::size_t kAucThresholds = 21;

using vmda::iou;

double center_error(const BoundingBox& a, const BoundingBox& b);

// Fraction of ground-truth-visible frames whose center error is strictly
// below `threshold` pixels. Missing predictions count as failures.
double precision_rate(const BoxSequence& res, const BoxSequence& gt,
                      double threshold = kDefaultPrThreshold);

// Fraction of ground-truth-visible frames whose IoU strictly exceeds
// `iou_threshold`.
double success_rate(const BoxSequence& res, const BoxSequence& gt,
                    double iou_threshold = kDefaultSrThreshold);

// Success rate at thresholds 0, 0.05, ..., 1.
std::vector<double> success_curve(const BoxSequence& res, const BoxSequence& gt);
// Mean of success_curve. Perfect tracking scores 20/21 because no IoU exceeds 1.
double success_auc(const BoxSequence& res, const BoxSequence& gt);

struct LongTermScores {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  bool degenerate = false;  // a denominator was zero and its metric defaulted to 0
};

LongTermScores precision_recall_f(const BoxSequence& res, const BoxSequence& gt);

struct Report {
  std::size_t frames = 0;
  double pr_threshold = kDefaultPrThreshold;
  double sr_threshold = kDefaultSrThreshold;
  double precision_rate = 0.0;
  double success_rate = 0.0;
  double success_auc = 0.0;
  LongTermScores long_term;
};

Report evaluate(const BoxSequence& res, const BoxSequence& gt,
                double pr_threshold = kDefaultPrThreshold,
                double sr_threshold = kDefaultSrThreshold);

}  // namespace vmda::metrics
