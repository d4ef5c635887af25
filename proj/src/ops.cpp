#include "vmda/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vmda/errors.hpp"

namespace vmda {

namespace {

void require_map(const Tensor& x, const char* what) {
  if (x.rank() != 3) {
    throw ArgumentError(std::string(what) + ": expected a (C, H, W) map, got " +
                        shape_str(x.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ArgumentError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) +
                        " vs " + shape_str(b.shape()));
  }
}

void require_vector(const Tensor& t, std::size_t n, const char* what) {
  if (t.rank() != 1 || t.size() != n) {
    throw ArgumentError(std::string(what) + ": expected a vector of length " +
                        std::to_string(n));
  }
}

}  // namespace

void ConvParams::validate() const {
  if (kernel.rank() != 4 || kernel.dim(2) != kernel.dim(3)) {
    throw ArgumentError("conv kernel must be (out, in, k, k)");
  }
  if (kernel.dim(0) < 1 || kernel.dim(1) < 1 || kernel.dim(2) < 1) {
    throw ArgumentError("conv kernel extents must be positive");
  }
  require_vector(bias, kernel.dim(0), "conv bias");
  if (stride < 1) throw ArgumentError("conv stride must be positive");
}

void BatchNormParams::validate() const {
  const auto c = gamma.size();
  require_vector(gamma, c, "batch norm gamma");
  require_vector(beta, c, "batch norm beta");
  require_vector(running_mean, c, "batch norm mean");
  require_vector(running_var, c, "batch norm var");
  for (double v : running_var.values()) {
    if (v < 0.0) throw ArgumentError("batch norm running variance must be non-negative");
  }
  if (!(epsilon > 0.0)) throw ArgumentError("batch norm epsilon must be positive");
}

void LinearParams::validate() const {
  if (weight.rank() != 2) throw ArgumentError("linear weight must be a matrix");
  require_vector(bias, weight.dim(0), "linear bias");
}

ConvParams identity_conv(std::size_t channels) {
  std::vector<double> k(channels * channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) k[c * channels + c] = 1.0;
  return {Tensor({channels, channels, 1, 1}, std::move(k)), Tensor::zeros({channels}), 1, 0};
}

ConvParams zero_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k) {
  return {Tensor::zeros({out_ch, in_ch, k, k}), Tensor::zeros({out_ch}), 1, k / 2};
}

BatchNormParams unit_batch_norm(std::size_t channels, double epsilon) {
  return {Tensor::full({channels}, 1.0), Tensor::zeros({channels}), Tensor::zeros({channels}),
          Tensor::full({channels}, 1.0), epsilon};
}

LinearParams identity_linear(std::size_t n) {
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return {Tensor({n, n}, std::move(w)), Tensor::zeros({n})};
}

LinearParams zero_linear(std::size_t out, std::size_t in) {
  return {Tensor::zeros({out, in}), Tensor::zeros({out})};
}

namespace ops {

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) throw ArgumentError("softmax: invalid axis " + std::to_string(axis));
  const auto& shape = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const auto n = shape[axis];
  const auto in = x.values();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const auto base = o * n * inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, in[base + k * inner]);
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(in[base + k * inner] - mx);
        out[base + k * inner] = e;
        sum += e;
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k * inner] /= sum;
    }
  }
  return Tensor(shape, std::move(out));
}

Tensor spatial_softmax(const Tensor& x) {
  require_map(x, "spatial_softmax");
  const auto c = x.dim(0);
  return softmax(x.reshaped({c, x.dim(1) * x.dim(2)}), 1).reshaped(x.shape());
}

Tensor conv2d(const Tensor& x, const ConvParams& p) {
  require_map(x, "conv2d");
  p.validate();
  const auto in_ch = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (p.in_channels() != in_ch) {
    throw ArgumentError("conv2d: kernel expects " + std::to_string(p.in_channels()) +
                        " input channels, got " + std::to_string(in_ch));
  }
  const auto k = p.kernel_size();
  const auto ph = h + 2 * p.padding, pw = w + 2 * p.padding;
  if (ph < k || pw < k) throw ArgumentError("conv2d: non-positive output size");
  const auto oh = (ph - k) / p.stride + 1, ow = (pw - k) / p.stride + 1;
  const auto out_ch = p.out_channels();
  const auto in = x.values();
  const auto ker = p.kernel.values();
  std::vector<double> out(out_ch * oh * ow);
  for (std::size_t o = 0; o < out_ch; ++o) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = p.bias[o];
        for (std::size_t i = 0; i < in_ch; ++i) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            // signed arithmetic for the padded border
            const auto iy = static_cast<std::ptrdiff_t>(oy * p.stride + ky) -
                            static_cast<std::ptrdiff_t>(p.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * p.stride + kx) -
                              static_cast<std::ptrdiff_t>(p.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              acc += ker[((o * in_ch + i) * k + ky) * k + kx] *
                     in[(i * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
            }
          }
        }
        out[(o * oh + oy) * ow + ox] = acc;
      }
    }
  }
  return Tensor({out_ch, oh, ow}, std::move(out));
}

Tensor avg_pool2d(const Tensor& x, std::size_t window, std::size_t stride) {
  require_map(x, "avg_pool2d");
  if (window < 1 || stride < 1) throw ArgumentError("avg_pool2d: window and stride must be positive");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (window > h || window > w) {
    throw ArgumentError("avg_pool2d: window " + std::to_string(window) + " larger than input " +
                        shape_str(x.shape()));
  }
  const auto oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
  const double norm = 1.0 / static_cast<double>(window * window);
  std::vector<double> out(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < window; ++ky) {
          for (std::size_t kx = 0; kx < window; ++kx) {
            acc += x.at(ch, oy * stride + ky, ox * stride + kx);
          }
        }
        out[(ch * oh + oy) * ow + ox] = acc * norm;
      }
    }
  }
  return Tensor({c, oh, ow}, std::move(out));
}

Tensor upsample_nearest(const Tensor& x, std::size_t height, std::size_t width) {
  require_map(x, "upsample_nearest");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (height == 0 || width == 0) throw ArgumentError("upsample_nearest: empty target size");
  std::vector<double> out(c * height * width);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < height; ++y) {
      const auto sy = std::min(y * h / height, h - 1);
      for (std::size_t xx = 0; xx < width; ++xx) {
        const auto sx = std::min(xx * w / width, w - 1);
        out[(ch * height + y) * width + xx] = x.at(ch, sy, sx);
      }
    }
  }
  return Tensor({c, height, width}, std::move(out));
}

Tensor global_avg_pool(const Tensor& x) {
  require_map(x, "global_avg_pool");
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  if (c == 0 || hw == 0) throw ArgumentError("global_avg_pool: empty tensor");
  const auto in = x.values();
  std::vector<double> out(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += in[ch * hw + i];
    out[ch] = acc / static_cast<double>(hw);
  }
  return Tensor(std::move(out));
}

Tensor batch_norm_infer(const Tensor& x, const BatchNormParams& p) {
  require_map(x, "batch_norm_infer");
  p.validate();
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  if (p.channels() != c) throw ArgumentError("batch_norm_infer: channel mismatch");
  const auto in = x.values();
  std::vector<double> out(x.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double inv = p.gamma[ch] / std::sqrt(p.running_var[ch] + p.epsilon);
    for (std::size_t i = 0; i < hw; ++i) {
      out[ch * hw + i] = (in[ch * hw + i] - p.running_mean[ch]) * inv + p.beta[ch];
    }
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor linear(const Tensor& x, const LinearParams& p) {
  p.validate();
  if (x.rank() != 1 || x.size() != p.in_features()) {
    throw ArgumentError("linear: expected input of length " + std::to_string(p.in_features()) +
                        ", got " + shape_str(x.shape()));
  }
  const auto rows = p.out_features(), cols = p.in_features();
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = p.bias[r];
    for (std::size_t c = 0; c < cols; ++c) acc += p.weight[r * cols + c] * x[c];
    out[r] = acc;
  }
  return Tensor(std::move(out));
}

Tensor linear_rows(const Tensor& x, const LinearParams& p) {
  p.validate();
  if (x.rank() != 2 || x.dim(1) != p.in_features()) {
    throw ArgumentError("linear_rows: expected (n, " + std::to_string(p.in_features()) +
                        ") input, got " + shape_str(x.shape()));
  }
  const auto n = x.dim(0), in_f = p.in_features(), out_f = p.out_features();
  std::vector<double> out(n * out_f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < out_f; ++r) {
      double acc = p.bias[r];
      for (std::size_t c = 0; c < in_f; ++c) acc += p.weight[r * in_f + c] * x[i * in_f + c];
      out[i * out_f + r] = acc;
    }
  }
  return Tensor({n, out_f}, std::move(out));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

namespace {
template <typename F>
Tensor map_values(const Tensor& x, F f) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return Tensor(x.shape(), std::move(out));
}

template <typename F>
Tensor zip_values(const Tensor& a, const Tensor& b, const char* what, F f) {
  require_same_shape(a, b, what);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return Tensor(a.shape(), std::move(out));
}
}  // namespace

Tensor sigmoid(const Tensor& x) { return map_values(x, [](double v) { return sigmoid(v); }); }
Tensor gelu(const Tensor& x) { return map_values(x, [](double v) { return gelu(v); }); }

Tensor add(const Tensor& a, const Tensor& b) {
  return zip_values(a, b, "add", [](double u, double v) { return u + v; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return zip_values(a, b, "sub", [](double u, double v) { return u - v; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return zip_values(a, b, "mul", [](double u, double v) { return u * v; });
}
Tensor scale(const Tensor& a, double s) {
  return map_values(a, [s](double v) { return v * s; });
}

Tensor scale_channels(const Tensor& x, const Tensor& gains) {
  require_map(x, "scale_channels");
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  require_vector(gains, c, "scale_channels gains");
  std::vector<double> out(x.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < hw; ++i) out[ch * hw + i] = x[ch * hw + i] * gains[ch];
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor broadcast_channels(const Tensor& v, std::size_t height, std::size_t width) {
  if (v.rank() != 1) throw ArgumentError("broadcast_channels: expected a vector");
  const auto c = v.size(), hw = height * width;
  std::vector<double> out(c * hw);
  for (std::size_t ch = 0; ch < c; ++ch) std::fill_n(out.begin() + ch * hw, hw, v[ch]);
  return Tensor({c, height, width}, std::move(out));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ArgumentError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                        shape_str(b.shape()));
  }
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * b[p * n + j];
    }
  }
  return Tensor({m, n}, std::move(out));
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ArgumentError("transpose: expected a matrix");
  const auto m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  }
  return Tensor({n, m}, std::move(out));
}

}  // namespace ops
}  // namespace vmda
