#include "vmda/freq_selector.hpp"

#include "vmda/errors.hpp"

namespace vmda::freq {

void FreqSelectorParams::validate() const {
  decomp_conv.validate();
  decomp_bn.validate();
  fc_global.validate();
  fc_high.validate();
  fc_low.validate();
  const auto c = decomp_conv.in_channels();
  if (decomp_conv.out_channels() != c) {
    throw ArgumentError("frequency selector: decomposition conv must preserve channel count");
  }
  if (decomp_conv.kernel_size() % 2 == 0 || decomp_conv.padding != decomp_conv.kernel_size() / 2 ||
      decomp_conv.stride != 1) {
    throw ArgumentError("frequency selector: decomposition conv must be size-preserving");
  }
  if (decomp_bn.channels() != c) throw ArgumentError("frequency selector: BN channel mismatch");
  if (pool_window < 1) throw ArgumentError("frequency selector: pool window must be positive");
  if (fc_global.in_features() != c) throw ArgumentError("frequency selector: FC input mismatch");
  const auto d = fc_global.out_features();
  if (fc_high.in_features() != d || fc_low.in_features() != d || fc_high.out_features() != c ||
      fc_low.out_features() != c) {
    throw ArgumentError("frequency selector: gate layers must map the global vector to C logits");
  }
}

FreqSelectorParams neutral_params(std::size_t channels, std::size_t pool_window) {
  return {identity_conv(channels),   unit_batch_norm(channels),
          pool_window,               identity_linear(channels),
          zero_linear(channels, channels), zero_linear(channels, channels)};
}

FreqSelectorParams zero_params(std::size_t channels, std::size_t pool_window) {
  BatchNormParams bn = unit_batch_norm(channels);
  bn.gamma = Tensor::zeros({channels});
  return {zero_conv(channels, channels, 1), std::move(bn), pool_window,
          zero_linear(channels, channels), zero_linear(channels, channels),
          zero_linear(channels, channels)};
}

Tensor attention_map(const Tensor& f_ori, const FreqSelectorParams& p) {
  p.validate();
  if (f_ori.rank() != 3 || f_ori.dim(0) != p.channels()) {
    throw ArgumentError("frequency selector: expected " + std::to_string(p.channels()) +
                        "-channel map, got " + shape_str(f_ori.shape()));
  }
  const auto pooled = ops::avg_pool2d(f_ori, p.pool_window, p.pool_window);
  const auto logits = ops::batch_norm_infer(ops::conv2d(pooled, p.decomp_conv), p.decomp_bn);
  const auto attn = ops::spatial_softmax(logits);
  if (attn.dim(1) == f_ori.dim(1) && attn.dim(2) == f_ori.dim(2)) return attn;
  return ops::upsample_nearest(attn, f_ori.dim(1), f_ori.dim(2));
}

FreqPair decompose(const Tensor& f_ori, const FreqSelectorParams& p) {
  auto high = ops::mul(f_ori, attention_map(f_ori, p));
  auto low = ops::sub(f_ori, high);
  return {std::move(high), std::move(low)};
}

Gates gates(const FreqPair& pair, const FreqSelectorParams& p) {
  p.validate();
  if (pair.high.shape() != pair.low.shape()) {
    throw ArgumentError("frequency selector: high/low shape mismatch");
  }
  const auto g = ops::linear(ops::global_avg_pool(ops::add(pair.high, pair.low)), p.fc_global);
  return {ops::sigmoid(ops::linear(g, p.fc_high)), ops::sigmoid(ops::linear(g, p.fc_low))};
}

Tensor select_fuse(const FreqPair& pair, const FreqSelectorParams& p) {
  const auto g = gates(pair, p);
  return ops::add(ops::scale_channels(pair.high, g.high), ops::scale_channels(pair.low, g.low));
}

Tensor frequency_select(const Tensor& f_ori, const FreqSelectorParams& p) {
  return select_fuse(decompose(f_ori, p), p);
}

}  // namespace vmda::freq
