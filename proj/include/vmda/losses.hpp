#pragma once

#include <array>
#include <span>
#include <vector>

#include "vmda/box.hpp"

namespace vmda::losses {

struct LossConfig {
  double alpha = 0.25;
  double gamma = 2.0;
  double lambda1 = 5.0;  // L1 weight
  double lambda2 = 2.0;  // GIoU weight

  void validate() const;
};

// Probabilities at or below zero are clamped to this value (with a warning).
inline constexpr double kMinProbability = 1e-12;
// Distance to a kink below which a point is reported as non-differentiable.
inline constexpr double kKinkTolerance = 1e-6;

struct ClassificationInputs {
  std::vector<double> foreground_prob;  // p
  std::vector<int> labels;              // 1 = foreground, 0 = background
};

struct BoxPair {
  BoundingBox predicted;
  BoundingBox truth;
};

// Probability the model assigns to the true class.
double true_class_prob(double foreground_prob, int label);

// -alpha (1 - p_t)^gamma log(p_t) for a single sample.
double focal_term(double p_t, const LossConfig& cfg);
double focal_loss(std::span<const double> foreground_prob, std::span<const int> labels,
                  const LossConfig& cfg);

// lambda1 * |b - b_hat|_1 + lambda2 * (1 - GIoU(b, b_hat))
double regression_loss(const BoundingBox& b, const BoundingBox& b_hat, const LossConfig& cfg);

double total_loss(const ClassificationInputs& cls, std::span<const BoxPair> reg,
                  const LossConfig& cfg);

// d(focal_term)/d(p_t).
double focal_gradient(double p_t, const LossConfig& cfg);

struct BoxGradient {
  std::array<double, 4> d{};  // d/dx, d/dy, d/dw, d/dh of the predicted box
  std::array<bool, 4> smooth{true, true, true, true};

  bool differentiable() const { return smooth[0] && smooth[1] && smooth[2] && smooth[3]; }
};

// Analytic gradient of regression_loss with respect to the predicted box.
// Components sitting on an L1 or min/max kink are flagged in `smooth`.
BoxGradient regression_gradient(const BoundingBox& b, const BoundingBox& b_hat,
                                const LossConfig& cfg);

struct LossGradients {
  std::vector<BoxGradient> boxes;       // one per regression pair
  std::vector<double> true_class_prob;  // d total / d p_t per classification sample
  bool differentiable = true;
};

LossGradients loss_gradients(const ClassificationInputs& cls, std::span<const BoxPair> reg,
                             const LossConfig& cfg);

}  // namespace vmda::losses
