#pragma once

#include <cstddef>

#include "vmda/freq_selector.hpp"
#include "vmda/tokens.hpp"

namespace vmda::fusion {

// conv_rgb / conv_x: C -> C', fc_channel: C' -> C', conv_out: C' -> C.
struct MfmParams {
  ConvParams conv_rgb;
  ConvParams conv_x;
  LinearParams fc_channel;
  ConvParams conv_out;

  void validate() const;
};

struct FmfmParams {
  freq::FreqSelectorParams freq_rgb;
  freq::FreqSelectorParams freq_x;
  MfmParams mfm;

  void validate() const;
};

MfmParams zero_mfm(std::size_t channels, std::size_t kernel = 1);
FmfmParams zero_fmfm(std::size_t channels, std::size_t pool_window = 2, std::size_t kernel = 1);

// Intermediate branches, exposed for inspection and tests.
struct MfmBranches {
  Tensor spatial_rgb;  // F^s_RGB
  Tensor spatial_x;    // F^s_X
  Tensor channel;      // F^c, length C'
};

MfmBranches mfm_branches(const Tensor& i_rgb, const Tensor& i_x, const MfmParams& p);
Tensor mfm(const Tensor& i_rgb, const Tensor& i_x, const MfmParams& p);
Tensor fmfm(const Tensor& i_rgb, const Tensor& i_x, const FmfmParams& p);

// Residual-adds the flattened fused map onto one region of the sequence.
TokenSequence inject(const Tensor& fused, const TokenSequence& seq, std::size_t region);

}  // namespace vmda::fusion
