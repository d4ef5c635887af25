#pragma once

// Brute-force reference implementations. Written against plain nested
// vectors and direct formulas so they share no code path with vmda::ops.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "vmda/box.hpp"
#include "vmda/freq_selector.hpp"
#include "vmda/fusion.hpp"
#include "vmda/metrics.hpp"

namespace vmda::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;    // rows
using Map = std::vector<Mat>;    // [c][y][x]

Map to_map(const Tensor& t);
Tensor from_map(const Map& m);
Mat to_mat(const Tensor& t);

// e^x_i / sum e^x_j evaluated literally (no max subtraction).
Vec softmax_direct(const Vec& x);
double sigmoid_direct(double x);
// x * Phi(x) with Phi integrated by composite Simpson's rule.
double gelu_quadrature(double x);

Map conv2d_naive(const Map& x, const Tensor& kernel, const Tensor& bias, std::size_t stride,
                 std::size_t padding);
Map avg_pool_naive(const Map& x, std::size_t window, std::size_t stride);
Vec gap_naive(const Map& x);
Vec matvec_naive(const Mat& w, const Vec& x, const Vec& b);
Mat matmul_naive(const Mat& a, const Mat& b);

// Frequency selector traced step by step.
struct FreqTrace {
  Map attention;
  Map high;
  Map low;
  Vec gate_high;
  Vec gate_low;
  Map fused;
};
FreqTrace frequency_select_trace(const Map& f, const freq::FreqSelectorParams& p);
Map mfm_trace(const Map& rgb, const Map& x, const fusion::MfmParams& p);
Map fmfm_trace(const Map& rgb, const Map& x, const fusion::FmfmParams& p);

// (n, C*p*p) patch rows, projected.
Mat patch_embed_naive(const Map& image, std::size_t patch, const Mat& w, const Vec& b);

// softmax(Q K^T * scale) V with every row computed independently.
Mat attention_dense(const Mat& q, const Mat& k, const Mat& v, double scale);

// Dense re-implementation of the three-tier memory.
class DensePool {
 public:
  DensePool(std::size_t short_cap, std::size_t long_cap, std::size_t perm_cap);
  void init(const Vec& c0);
  void update(const Vec& c);
  struct Read {
    std::array<Vec, 3> weights;
    std::array<Vec, 3> reads;
    Vec combined;
  };
  Read retrieve(const Vec& q) const;
  const std::array<Mat, 3>& tiers() const { return tiers_; }

 private:
  static void refine(Mat& target, const Mat& source);
  std::array<std::size_t, 3> caps_;
  std::array<Mat, 3> tiers_;
};

Vec filter_naive(const Vec& c, const Mat& down_w, const Vec& down_b, const Mat& up_w,
                 const Vec& up_b);

// Box geometry from first principles.
double iou_direct(const BoundingBox& a, const BoundingBox& b);
double giou_direct(const BoundingBox& a, const BoundingBox& b);
// Unit-cell count of the intersection of integer-aligned boxes.
double iou_raster(const BoundingBox& a, const BoundingBox& b);

double focal_direct(double p_t, double alpha, double gamma);
double regression_direct(const BoundingBox& b, const BoundingBox& g, double l1, double l2);

double central_difference(const std::function<double(double)>& f, double x, double h);

// Counting oracles for the tracking metrics. Boxes must be integer-aligned.
struct MetricCounts {
  double pr = 0.0;
  double sr = 0.0;
  double pre = 0.0;
  double re = 0.0;
  double f = 0.0;
};
MetricCounts metrics_bruteforce(const metrics::BoxSequence& res, const metrics::BoxSequence& gt,
                                double pr_threshold, double sr_threshold);

// Random fixtures shared by the self-test and the test suites.
using Rng = std::mt19937_64;
Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);
ConvParams random_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k, Rng& rng);
LinearParams random_linear(std::size_t out, std::size_t in, Rng& rng);
freq::FreqSelectorParams random_freq(std::size_t channels, std::size_t window, std::size_t k, Rng& rng);
fusion::MfmParams random_mfm(std::size_t channels, std::size_t k, Rng& rng);
fusion::FmfmParams random_fmfm(std::size_t channels, std::size_t window, std::size_t k, Rng& rng);

}  // namespace vmda::oracle
