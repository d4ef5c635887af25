#pragma once

// Surrogate transformer encoder standing in for the frozen foundation
// tracker: pre-norm single-head self-attention plus a GELU MLP per layer.

#include <cstddef>
#include <vector>

#include "vmda/ops.hpp"

namespace vmda {

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t layers = 4;
  std::size_t patch = 8;
  std::size_t in_channels = 2;
  std::size_t mlp_ratio = 2;

  std::size_t patch_features() const { return in_channels * patch * patch; }
  void validate() const;
};

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;
  double epsilon = 1e-6;
};

struct BlockParams {
  LayerNormParams norm1;
  LinearParams query;
  LinearParams key;
  LinearParams value;
  LinearParams proj;
  LayerNormParams norm2;
  LinearParams fc1;
  LinearParams fc2;
};

struct EncoderParams {
  LinearParams embed_rgb;
  LinearParams embed_aux;
  std::vector<BlockParams> blocks;
};

// Splits a (C, H, W) image into non-overlapping patch x patch tiles in
// row-major tile order, flattens each as (c, py, px) and projects it.
Tensor patch_embed(const Tensor& image, std::size_t patch, const LinearParams& proj);

Tensor layer_norm_rows(const Tensor& x, const LayerNormParams& p);

Tensor encoder_block(const Tensor& tokens, const BlockParams& p);

}  // namespace vmda
