#pragma once

#include <cstddef>

#include "vmda/ops.hpp"

namespace vmda::freq {

// Parameters of the frequency selector. decomp_conv preserves the channel
// count; fc_global maps C -> D and both gates map D -> C (one gate per channel).
struct FreqSelectorParams {
  ConvParams decomp_conv;
  BatchNormParams decomp_bn;
  std::size_t pool_window = 2;
  LinearParams fc_global;
  LinearParams fc_high;
  LinearParams fc_low;

  std::size_t channels() const { return decomp_conv.out_channels(); }
  void validate() const;
};

struct FreqPair {
  Tensor high;
  Tensor low;
};

struct Gates {
  Tensor high;  // per-channel, in (0, 1)
  Tensor low;
};

// Identity conv, unit BN and zero FC layers (both gates 0.5).
FreqSelectorParams neutral_params(std::size_t channels, std::size_t pool_window = 2);
// Every weight and bias zero; BN gamma/beta zero.
FreqSelectorParams zero_params(std::size_t channels, std::size_t pool_window = 2);

// Spatial attention map softmax(BN(Conv(AvgPool(f)))) brought back to the
// resolution of f by nearest-neighbour upsampling.
Tensor attention_map(const Tensor& f_ori, const FreqSelectorParams& p);

// high = f * attention, low = f - high.
FreqPair decompose(const Tensor& f_ori, const FreqSelectorParams& p);

Gates gates(const FreqPair& pair, const FreqSelectorParams& p);

// sigma(FC_high(g)) * high + sigma(FC_low(g)) * low with g = FC(GAP(high + low)).
Tensor select_fuse(const FreqPair& pair, const FreqSelectorParams& p);

Tensor frequency_select(const Tensor& f_ori, const FreqSelectorParams& p);

}  // namespace vmda::freq
