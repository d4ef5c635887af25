#pragma once

// Numeric kernels used by the adapters. All functions are pure; feature maps
// are rank-3 tensors laid out as (channels, height, width).

#include <cstddef>

#include "vmda/tensor.hpp"

namespace vmda {

struct ConvParams {
  Tensor kernel;  // (out_ch, in_ch, k, k)
  Tensor bias;    // (out_ch)
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_channels() const { return kernel.dim(0); }
  std::size_t in_channels() const { return kernel.dim(1); }
  std::size_t kernel_size() const { return kernel.dim(2); }
  void validate() const;
};

struct BatchNormParams {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double epsilon = 1e-5;

  std::size_t channels() const { return gamma.size(); }
  void validate() const;
};

struct LinearParams {
  Tensor weight;  // (out, in)
  Tensor bias;    // (out)

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
  void validate() const;
};

// Identity-initialised helpers, mostly for tests and zeroed adapters.
ConvParams identity_conv(std::size_t channels);
ConvParams zero_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k);
BatchNormParams unit_batch_norm(std::size_t channels, double epsilon = 1e-5);
LinearParams identity_linear(std::size_t n);
LinearParams zero_linear(std::size_t out, std::size_t in);

namespace ops {

Tensor softmax(const Tensor& x, std::size_t axis);

// Softmax over the spatial positions of each channel of a (C, H, W) map.
Tensor spatial_softmax(const Tensor& x);

Tensor conv2d(const Tensor& x, const ConvParams& p);
Tensor avg_pool2d(const Tensor& x, std::size_t window, std::size_t stride);
Tensor upsample_nearest(const Tensor& x, std::size_t height, std::size_t width);
Tensor global_avg_pool(const Tensor& x);
Tensor batch_norm_infer(const Tensor& x, const BatchNormParams& p);

Tensor linear(const Tensor& x, const LinearParams& p);
// Applies the linear map to every row of an (n, in) matrix.
Tensor linear_rows(const Tensor& x, const LinearParams& p);

double sigmoid(double x);
double gelu(double x);
Tensor sigmoid(const Tensor& x);
Tensor gelu(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// Multiplies channel c of a (C, H, W) map by gains[c].
Tensor scale_channels(const Tensor& x, const Tensor& gains);
// Broadcasts a length-C vector to a (C, H, W) map.
Tensor broadcast_channels(const Tensor& v, std::size_t height, std::size_t width);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace ops
}  // namespace vmda
