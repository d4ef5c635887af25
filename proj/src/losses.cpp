#include "vmda/losses.hpp"

#include <algorithm>
#include <cmath>

#include "vmda/errors.hpp"

namespace vmda::losses {

void LossConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("focal alpha must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw ArgumentError("focal gamma must be non-negative");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw ArgumentError("loss weights must be positive");
}

double true_class_prob(double foreground_prob, int label) {
  if (label != 0 && label != 1) throw ArgumentError("class labels must be 0 or 1");
  if (!(foreground_prob >= 0.0 && foreground_prob <= 1.0)) {
    throw ArgumentError("probabilities must lie in [0, 1]");
  }
  return label == 1 ? foreground_prob : 1.0 - foreground_prob;
}

namespace {
double clamp_prob(double p_t) {
  if (!(p_t <= 1.0) || std::isnan(p_t)) throw ArgumentError("probability above 1");
  if (p_t < kMinProbability) {
    warn("focal loss: probability " + std::to_string(p_t) + " clamped to 1e-12");
    return kMinProbability;
  }
  return p_t;
}
}  // namespace

double focal_term(double p_t, const LossConfig& cfg) {
  cfg.validate();
  const double p = clamp_prob(p_t);
  return -cfg.alpha * std::pow(1.0 - p, cfg.gamma) * std::log(p);
}

double focal_loss(std::span<const double> foreground_prob, std::span<const int> labels,
                  const LossConfig& cfg) {
  if (foreground_prob.size() != labels.size()) {
    throw ArgumentError("focal loss: probabilities and labels differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += focal_term(true_class_prob(foreground_prob[i], labels[i]), cfg);
  }
  return sum;
}

double regression_loss(const BoundingBox& b, const BoundingBox& b_hat, const LossConfig& cfg) {
  cfg.validate();
  const double g = giou(b, b_hat);
  const double l1 = std::abs(b.x - b_hat.x) + std::abs(b.y - b_hat.y) + std::abs(b.w - b_hat.w) +
                    std::abs(b.h - b_hat.h);
  return cfg.lambda1 * l1 + cfg.lambda2 * (1.0 - g);
}

double total_loss(const ClassificationInputs& cls, std::span<const BoxPair> reg,
                  const LossConfig& cfg) {
  double reg_sum = 0.0;
  for (const auto& pair : reg) reg_sum += regression_loss(pair.predicted, pair.truth, cfg);
  return focal_loss(cls.foreground_prob, cls.labels, cfg) + reg_sum;
}

double focal_gradient(double p_t, const LossConfig& cfg) {
  cfg.validate();
  const double p = clamp_prob(p_t);
  if (p == 1.0) return cfg.gamma == 0.0 ? -cfg.alpha : 0.0;
  const double q = 1.0 - p;
  return cfg.alpha * cfg.gamma * std::pow(q, cfg.gamma - 1.0) * std::log(p) -
         cfg.alpha * std::pow(q, cfg.gamma) / p;
}

namespace {

// Partial derivatives of an overlap-like extent min(hi_a, hi_b) - max(lo_a, lo_b)
// and an enclosing extent max(hi_a, hi_b) - min(lo_a, lo_b) with respect to
// box a's low and high edges along one axis.
struct AxisTerms {
  double overlap = 0.0;
  double d_overlap_lo = 0.0;
  double d_overlap_hi = 0.0;
  double enclosing = 0.0;
  double d_enclosing_lo = 0.0;
  double d_enclosing_hi = 0.0;
  bool smooth = true;
};

AxisTerms axis_terms(double lo, double hi, double lo_t, double hi_t) {
  AxisTerms t;
  const double raw = std::min(hi, hi_t) - std::max(lo, lo_t);
  t.overlap = std::max(0.0, raw);
  if (raw > 0.0) {
    t.d_overlap_hi = hi < hi_t ? 1.0 : 0.0;
    t.d_overlap_lo = lo > lo_t ? -1.0 : 0.0;
  }
  t.enclosing = std::max(hi, hi_t) - std::min(lo, lo_t);
  t.d_enclosing_hi = hi > hi_t ? 1.0 : 0.0;
  t.d_enclosing_lo = lo < lo_t ? -1.0 : 0.0;
  t.smooth = std::abs(hi - hi_t) > kKinkTolerance && std::abs(lo - lo_t) > kKinkTolerance &&
             std::abs(raw) > kKinkTolerance;
  return t;
}

}  // namespace

BoxGradient regression_gradient(const BoundingBox& b, const BoundingBox& b_hat,
                                const LossConfig& cfg) {
  cfg.validate();
  require_positive_area(b, "regression_gradient");
  require_positive_area(b_hat, "regression_gradient");

  const auto ax = axis_terms(b.x, b.right(), b_hat.x, b_hat.right());
  const auto ay = axis_terms(b.y, b.bottom(), b_hat.y, b_hat.bottom());

  const double inter = ax.overlap * ay.overlap;
  const double uni = b.area() + b_hat.area() - inter;
  const double enc = ax.enclosing * ay.enclosing;

  // Derivatives with respect to the edges (x1, x2, y1, y2) of the predicted box.
  const std::array<double, 4> d_inter{ax.d_overlap_lo * ay.overlap, ax.d_overlap_hi * ay.overlap,
                                      ay.d_overlap_lo * ax.overlap, ay.d_overlap_hi * ax.overlap};
  const std::array<double, 4> d_area{-b.h, b.h, -b.w, b.w};
  const std::array<double, 4> d_enc{ax.d_enclosing_lo * ay.enclosing,
                                    ax.d_enclosing_hi * ay.enclosing,
                                    ay.d_enclosing_lo * ax.enclosing,
                                    ay.d_enclosing_hi * ax.enclosing};
  std::array<double, 4> d_giou_edge{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double d_uni = d_area[k] - d_inter[k];
    d_giou_edge[k] = d_inter[k] / uni - inter * d_uni / (uni * uni) + d_uni / enc -
                     uni * d_enc[k] / (enc * enc);
  }
  // x moves both x-edges, w only the right edge; same for y / h.
  const std::array<double, 4> d_giou{d_giou_edge[0] + d_giou_edge[1],
                                     d_giou_edge[2] + d_giou_edge[3], d_giou_edge[1],
                                     d_giou_edge[3]};

  const std::array<double, 4> diff{b.x - b_hat.x, b.y - b_hat.y, b.w - b_hat.w, b.h - b_hat.h};
  BoxGradient g;
  for (std::size_t k = 0; k < 4; ++k) {
    const double sign = diff[k] > 0.0 ? 1.0 : (diff[k] < 0.0 ? -1.0 : 0.0);
    g.d[k] = cfg.lambda1 * sign - cfg.lambda2 * d_giou[k];
    g.smooth[k] = std::abs(diff[k]) > kKinkTolerance && (k % 2 == 0 ? ax.smooth : ay.smooth);
  }
  return g;
}

LossGradients loss_gradients(const ClassificationInputs& cls, std::span<const BoxPair> reg,
                             const LossConfig& cfg) {
  if (cls.foreground_prob.size() != cls.labels.size()) {
    throw ArgumentError("loss_gradients: probabilities and labels differ in length");
  }
  LossGradients out;
  for (const auto& pair : reg) {
    out.boxes.push_back(regression_gradient(pair.predicted, pair.truth, cfg));
    out.differentiable = out.differentiable && out.boxes.back().differentiable();
  }
  for (std::size_t i = 0; i < cls.labels.size(); ++i) {
    const double p_t = true_class_prob(cls.foreground_prob[i], cls.labels[i]);
    if (p_t < kMinProbability) out.differentiable = false;
    out.true_class_prob.push_back(focal_gradient(p_t, cfg));
  }
  return out;
}

}  // namespace vmda::losses
