#include "vmda/fusion.hpp"

#include "vmda/errors.hpp"

namespace vmda::fusion {

namespace {
void require_same_padding(const ConvParams& c, const char* what) {
  if (c.kernel_size() % 2 == 0 || c.padding != c.kernel_size() / 2 || c.stride != 1) {
    throw ArgumentError(std::string("MFM: ") + what + " must be a size-preserving odd conv");
  }
}
}  // namespace

void MfmParams::validate() const {
  conv_rgb.validate();
  conv_x.validate();
  fc_channel.validate();
  conv_out.validate();
  require_same_padding(conv_rgb, "conv_rgb");
  require_same_padding(conv_x, "conv_x");
  require_same_padding(conv_out, "conv_out");
  const auto branch = conv_rgb.out_channels();
  if (conv_x.out_channels() != branch || conv_x.in_channels() != conv_rgb.in_channels()) {
    throw ArgumentError("MFM: conv_rgb and conv_x must share channel counts");
  }
  if (fc_channel.in_features() != branch || fc_channel.out_features() != branch) {
    throw ArgumentError("MFM: fc_channel must map C' -> C'");
  }
  if (conv_out.in_channels() != branch) throw ArgumentError("MFM: conv_out input mismatch");
}

void FmfmParams::validate() const {
  freq_rgb.validate();
  freq_x.validate();
  mfm.validate();
  if (freq_rgb.channels() != mfm.conv_rgb.in_channels() ||
      freq_x.channels() != mfm.conv_x.in_channels()) {
    throw ArgumentError("FMFM: frequency selector channels do not match MFM input");
  }
}

MfmParams zero_mfm(std::size_t channels, std::size_t kernel) {
  return {zero_conv(channels, channels, kernel), zero_conv(channels, channels, kernel),
          zero_linear(channels, channels), zero_conv(channels, channels, kernel)};
}

FmfmParams zero_fmfm(std::size_t channels, std::size_t pool_window, std::size_t kernel) {
  return {freq::zero_params(channels, pool_window), freq::zero_params(channels, pool_window),
          zero_mfm(channels, kernel)};
}

MfmBranches mfm_branches(const Tensor& i_rgb, const Tensor& i_x, const MfmParams& p) {
  p.validate();
  if (i_rgb.shape() != i_x.shape()) {
    throw ArgumentError("MFM: modality shape mismatch " + shape_str(i_rgb.shape()) + " vs " +
                        shape_str(i_x.shape()));
  }
  const auto f_rgb = ops::conv2d(i_rgb, p.conv_rgb);
  const auto f_x = ops::conv2d(i_x, p.conv_x);
  auto s_rgb = ops::mul(f_rgb, ops::spatial_softmax(f_rgb));
  auto s_x = ops::mul(f_x, ops::spatial_softmax(f_x));
  const auto g = ops::global_avg_pool(ops::add(f_rgb, f_x));
  auto c = ops::mul(g, ops::sigmoid(ops::linear(g, p.fc_channel)));
  return {std::move(s_rgb), std::move(s_x), std::move(c)};
}

Tensor mfm(const Tensor& i_rgb, const Tensor& i_x, const MfmParams& p) {
  const auto b = mfm_branches(i_rgb, i_x, p);
  const auto channel = ops::broadcast_channels(b.channel, b.spatial_rgb.dim(1), b.spatial_rgb.dim(2));
  return ops::conv2d(ops::add(ops::add(b.spatial_rgb, b.spatial_x), channel), p.conv_out);
}

Tensor fmfm(const Tensor& i_rgb, const Tensor& i_x, const FmfmParams& p) {
  p.validate();
  return mfm(freq::frequency_select(i_rgb, p.freq_rgb), freq::frequency_select(i_x, p.freq_x),
             p.mfm);
}

TokenSequence inject(const Tensor& fused, const TokenSequence& seq, std::size_t region) {
  if (region >= seq.regions().size() || seq.regions()[region].kind == Region::kCue) {
    throw ArgumentError("inject: target must be a search or template region");
  }
  const auto flat = map_to_tokens(fused);
  const auto current = seq.region_tokens(region);
  if (flat.shape() != current.shape()) {
    throw ArgumentError("inject: fused map flattens to " + shape_str(flat.shape()) +
                        " but region holds " + shape_str(current.shape()));
  }
  return seq.with_region(region, ops::add(current, flat));
}

}  // namespace vmda::fusion
