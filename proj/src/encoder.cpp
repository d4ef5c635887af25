#include "vmda/encoder.hpp"

#include <cmath>

#include "vmda/errors.hpp"
#include "vmda/memory.hpp"

namespace vmda {

void EncoderConfig::validate() const {
  if (dim < 1 || layers < 1 || patch < 1 || in_channels < 1 || mlp_ratio < 1) {
    throw ArgumentError("encoder: dim, layers, patch, channels and mlp ratio must be positive");
  }
}

Tensor patch_embed(const Tensor& image, std::size_t patch, const LinearParams& proj) {
  if (image.rank() != 3) throw ArgumentError("patch_embed: expected a (C, H, W) image");
  const auto c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (patch == 0 || h % patch != 0 || w % patch != 0) {
    throw ArgumentError("patch_embed: image " + shape_str(image.shape()) +
                        " is not divisible by patch size " + std::to_string(patch));
  }
  const auto gh = h / patch, gw = w / patch, features = c * patch * patch;
  std::vector<double> patches(gh * gw * features);
  for (std::size_t gy = 0; gy < gh; ++gy) {
    for (std::size_t gx = 0; gx < gw; ++gx) {
      auto* dst = patches.data() + (gy * gw + gx) * features;
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t py = 0; py < patch; ++py) {
          for (std::size_t px = 0; px < patch; ++px) {
            *dst++ = image.at(ch, gy * patch + py, gx * patch + px);
          }
        }
      }
    }
  }
  return ops::linear_rows(Tensor({gh * gw, features}, std::move(patches)), proj);
}

Tensor layer_norm_rows(const Tensor& x, const LayerNormParams& p) {
  if (x.rank() != 2 || p.gamma.size() != x.dim(1) || p.beta.size() != x.dim(1)) {
    throw ArgumentError("layer_norm: width mismatch");
  }
  const auto n = x.dim(0), d = x.dim(1);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += x[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (x[i * d + j] - mean) * (x[i * d + j] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + p.epsilon);
    for (std::size_t j = 0; j < d; ++j) {
      out[i * d + j] = (x[i * d + j] - mean) * inv * p.gamma[j] + p.beta[j];
    }
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor encoder_block(const Tensor& tokens, const BlockParams& p) {
  const auto normed = layer_norm_rows(tokens, p.norm1);
  const auto attended = scaled_dot_attention(ops::linear_rows(normed, p.query),
                                             ops::linear_rows(normed, p.key),
                                             ops::linear_rows(normed, p.value));
  const auto h = ops::add(tokens, ops::linear_rows(attended, p.proj));
  const auto mlp = ops::linear_rows(
      ops::gelu(ops::linear_rows(layer_norm_rows(h, p.norm2), p.fc1)), p.fc2);
  return ops::add(h, mlp);
}

}  // namespace vmda
