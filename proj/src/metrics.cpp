#include "vmda/metrics.hpp"

#include <cmath>

#include "vmda/errors.hpp"

namespace vmda::metrics {

namespace {

void require_paired(const BoxSequence& res, const BoxSequence& gt) {
  if (res.size() != gt.size()) {
    throw ArgumentError("prediction and ground truth lengths differ (" +
                        std::to_string(res.size()) + " vs " + std::to_string(gt.size()) + ")");
  }
  if (gt.empty()) throw ArgumentError("empty sequence");
}

template <typename Hit>
double visible_fraction(const BoxSequence& res, const BoxSequence& gt, Hit hit) {
  require_paired(res, gt);
  std::size_t counted = 0, hits = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    if (!gt[t]) continue;
    ++counted;
    if (res[t] && hit(*res[t], *gt[t])) ++hits;
  }
  if (counted == 0) throw ArgumentError("no frame with a visible ground-truth target");
  return static_cast<double>(hits) / static_cast<double>(counted);
}

}  // namespace

double center_error(const BoundingBox& a, const BoundingBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

double precision_rate(const BoxSequence& res, const BoxSequence& gt, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("precision threshold must be non-negative");
  return visible_fraction(res, gt, [threshold](const BoundingBox& a, const BoundingBox& g) {
    return center_error(a, g) < threshold;
  });
}

double success_rate(const BoxSequence& res, const BoxSequence& gt, double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw ArgumentError("IoU threshold must lie in [0, 1]");
  }
  return visible_fraction(res, gt, [iou_threshold](const BoundingBox& a, const BoundingBox& g) {
    return iou(a, g) > iou_threshold;
  });
}

std::vector<double> success_curve(const BoxSequence& res, const BoxSequence& gt) {
  std::vector<double> curve;
  curve.reserve(kAucThresholds);
  for (std::size_t i = 0; i < kAucThresholds; ++i) {
    curve.push_back(success_rate(res, gt, static_cast<double>(i) / (kAucThresholds - 1)));
  }
  return curve;
}

double success_auc(const BoxSequence& res, const BoxSequence& gt) {
  double sum = 0.0;
  for (double v : success_curve(res, gt)) sum += v;
  return sum / static_cast<double>(kAucThresholds);
}

LongTermScores precision_recall_f(const BoxSequence& res, const BoxSequence& gt) {
  if (res.size() != gt.size()) throw ArgumentError("prediction and ground truth lengths differ");
  std::size_t n_pred = 0, n_gt = 0;
  double overlap_pred = 0.0, overlap_gt = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const double omega = (res[t] && gt[t]) ? iou(*res[t], *gt[t]) : 0.0;
    if (res[t]) {
      ++n_pred;
      overlap_pred += omega;
    }
    if (gt[t]) {
      ++n_gt;
      overlap_gt += omega;
    }
  }
  LongTermScores s;
  if (n_pred > 0) {
    s.precision = overlap_pred / static_cast<double>(n_pred);
  } else {
    s.degenerate = true;
  }
  if (n_gt > 0) {
    s.recall = overlap_gt / static_cast<double>(n_gt);
  } else {
    s.degenerate = true;
  }
  if (s.precision + s.recall > 0.0) {
    s.f_score = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  if (s.degenerate) warn("precision/recall: empty denominator, metric reported as 0");
  return s;
}

Report evaluate(const BoxSequence& res, const BoxSequence& gt, double pr_threshold,
                double sr_threshold) {
  Report r;
  r.frames = gt.size();
  r.pr_threshold = pr_threshold;
  r.sr_threshold = sr_threshold;
  r.precision_rate = precision_rate(res, gt, pr_threshold);
  r.success_rate = success_rate(res, gt, sr_threshold);
  r.success_auc = success_auc(res, gt);
  r.long_term = precision_recall_f(res, gt);
  return r;
}

}  // namespace vmda::metrics
