#include "vmda/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vmda/errors.hpp"

namespace vmda {

void TrackerConfig::validate() const {
  encoder.validate();
  memory.validate();
  if (memory.dim != encoder.dim) throw ArgumentError("memory H must equal the encoder width");
  if (filter_ratio < 1 || encoder.dim % filter_ratio != 0) {
    throw ArgumentError("filter ratio " + std::to_string(filter_ratio) + " must divide H = " +
                        std::to_string(encoder.dim));
  }
  if (template_size == 0 || template_size % encoder.patch != 0) {
    throw ArgumentError("template size must be a positive multiple of the patch size");
  }
  if (max_templates < 1) throw ArgumentError("at least one template is required");
  if (pool_window < 1) throw ArgumentError("pool window must be positive");
  if (decomp_kernel % 2 == 0 || mfm_kernel % 2 == 0) {
    throw ArgumentError("adapter convolution kernels must have odd size");
  }
  if (adapters && pool_window > template_size / encoder.patch) {
    throw ArgumentError("pool window does not fit the template token grid");
  }
}

void TrackerConfig::validate_frame(std::size_t height, std::size_t width) const {
  validate();
  const auto p = encoder.patch;
  if (height % p != 0 || width % p != 0) {
    throw ArgumentError("frame " + std::to_string(height) + "x" + std::to_string(width) +
                        " is not divisible by patch size " + std::to_string(p));
  }
  if (!is_perfect_square((height / p) * (width / p)) || height != width) {
    throw ArgumentError("search region token count must form a square grid");
  }
  if (template_size > height || template_size > width) {
    throw ArgumentError("template size exceeds the frame");
  }
}

namespace {

LayerNormParams unit_layer_norm(std::size_t d) {
  return {Tensor::full({d}, 1.0), Tensor::zeros({d}), 1e-6};
}

freq::FreqSelectorParams zero_freq(const TrackerConfig& cfg) {
  auto p = freq::zero_params(cfg.encoder.dim, cfg.pool_window);
  p.decomp_conv = zero_conv(cfg.encoder.dim, cfg.encoder.dim, cfg.decomp_kernel);
  return p;
}

fusion::MfmParams zero_layer_mfm(const TrackerConfig& cfg) {
  return fusion::zero_mfm(cfg.encoder.dim, cfg.mfm_kernel);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void visit_linear(const std::string& name, LinearParams& p,
                  const std::function<void(const std::string&, Tensor&)>& f) {
  f(name + ".weight", p.weight);
  f(name + ".bias", p.bias);
}

void visit_conv(const std::string& name, ConvParams& p,
                const std::function<void(const std::string&, Tensor&)>& f) {
  f(name + ".kernel", p.kernel);
  f(name + ".bias", p.bias);
}

void visit_freq(const std::string& name, freq::FreqSelectorParams& p,
                const std::function<void(const std::string&, Tensor&)>& f) {
  visit_conv(name + ".decomp_conv", p.decomp_conv, f);
  f(name + ".decomp_bn.gamma", p.decomp_bn.gamma);
  f(name + ".decomp_bn.beta", p.decomp_bn.beta);
  f(name + ".decomp_bn.running_mean", p.decomp_bn.running_mean);
  f(name + ".decomp_bn.running_var", p.decomp_bn.running_var);
  visit_linear(name + ".fc_global", p.fc_global, f);
  visit_linear(name + ".fc_high", p.fc_high, f);
  visit_linear(name + ".fc_low", p.fc_low, f);
}

void visit_mfm(const std::string& name, fusion::MfmParams& p,
               const std::function<void(const std::string&, Tensor&)>& f) {
  visit_conv(name + ".conv_rgb", p.conv_rgb, f);
  visit_conv(name + ".conv_x", p.conv_x, f);
  visit_linear(name + ".fc_channel", p.fc_channel, f);
  visit_conv(name + ".conv_out", p.conv_out, f);
}

}  // namespace

void for_each_tensor(TrackerParams& params,
                     const std::function<void(const std::string&, Tensor&)>& f) {
  auto& enc = params.encoder;
  visit_linear("encoder.embed_rgb", enc.embed_rgb, f);
  visit_linear("encoder.embed_aux", enc.embed_aux, f);
  for (std::size_t i = 0; i < enc.blocks.size(); ++i) {
    const auto base = "encoder.blocks." + std::to_string(i);
    auto& b = enc.blocks[i];
    f(base + ".norm1.gamma", b.norm1.gamma);
    f(base + ".norm1.beta", b.norm1.beta);
    visit_linear(base + ".query", b.query, f);
    visit_linear(base + ".key", b.key, f);
    visit_linear(base + ".value", b.value, f);
    visit_linear(base + ".proj", b.proj, f);
    f(base + ".norm2.gamma", b.norm2.gamma);
    f(base + ".norm2.beta", b.norm2.beta);
    visit_linear(base + ".fc1", b.fc1, f);
    visit_linear(base + ".fc2", b.fc2, f);
  }
  visit_freq("adapters.fmfm.freq_rgb", params.adapters.fmfm.freq_rgb, f);
  visit_freq("adapters.fmfm.freq_x", params.adapters.fmfm.freq_x, f);
  visit_mfm("adapters.fmfm.mfm", params.adapters.fmfm.mfm, f);
  for (std::size_t i = 0; i < params.adapters.layers.size(); ++i) {
    visit_mfm("adapters.layers." + std::to_string(i), params.adapters.layers[i], f);
  }
  visit_linear("filter.down", params.filter.down, f);
  visit_linear("filter.up", params.filter.up, f);
  visit_linear("head.score", params.head.score, f);
  visit_linear("head.size", params.head.size, f);
}

TrackerParams zero_params(const TrackerConfig& cfg) {
  cfg.validate();
  const auto d = cfg.encoder.dim, hidden = d * cfg.encoder.mlp_ratio;
  TrackerParams p;
  p.encoder.embed_rgb = zero_linear(d, cfg.encoder.patch_features());
  p.encoder.embed_aux = zero_linear(d, cfg.encoder.patch_features());
  for (std::size_t l = 0; l < cfg.encoder.layers; ++l) {
    p.encoder.blocks.push_back({unit_layer_norm(d), zero_linear(d, d), zero_linear(d, d),
                                zero_linear(d, d), zero_linear(d, d), unit_layer_norm(d),
                                zero_linear(hidden, d), zero_linear(d, hidden)});
  }
  p.adapters.fmfm = {zero_freq(cfg), zero_freq(cfg), zero_layer_mfm(cfg)};
  for (std::size_t l = 0; l < cfg.encoder.layers; ++l) p.adapters.layers.push_back(zero_layer_mfm(cfg));
  p.filter = zero_filter(d, cfg.filter_ratio);
  p.head = {zero_linear(1, d), zero_linear(2, d), 1.0};
  return p;
}

TrackerParams random_params(const TrackerConfig& cfg, std::uint64_t seed) {
  auto p = zero_params(cfg);
  std::mt19937_64 rng(seed);
  for_each_tensor(p, [&](const std::string& name, Tensor& t) {
    if (ends_with(name, ".gamma") || ends_with(name, ".running_var")) {
      t = Tensor::full(t.shape(), 1.0);
      return;
    }
    if (ends_with(name, ".beta") || ends_with(name, ".running_mean")) return;
    // fan-in: every axis but the first for weights/kernels
    std::size_t fan_in = 1;
    for (std::size_t a = 1; a < t.rank(); ++a) fan_in *= t.dim(a);
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    if (ends_with(name, ".bias")) bound = 0.02;
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<double> v(t.size());
    for (auto& x : v) x = u(rng);
    t = Tensor(t.shape(), std::move(v));
  });
  return p;
}

TrackerParams with_zero_adapters(TrackerParams params, const TrackerConfig& cfg) {
  const auto zeros = zero_params(cfg);
  params.adapters = zeros.adapters;
  params.filter = zeros.filter;
  return params;
}

Tracker::Tracker(TrackerConfig config, TrackerParams params)
    : config_([&] {
        config.memory.dim = config.encoder.dim;
        config.validate();
        return config;
      }()),
      params_(std::move(params)),
      pool_(config_.memory, params_.filter) {
  if (params_.encoder.blocks.size() != config_.encoder.layers) {
    throw ArgumentError("encoder parameters hold " + std::to_string(params_.encoder.blocks.size()) +
                        " blocks, config asks for " + std::to_string(config_.encoder.layers));
  }
  if (config_.adapters) {
    if (params_.adapters.layers.size() != config_.encoder.layers) {
      throw ArgumentError("one fusion module per encoder layer is required");
    }
    params_.adapters.fmfm.validate();
    for (const auto& m : params_.adapters.layers) m.validate();
  }
  params_.head.score.validate();
  params_.head.size.validate();
  if (params_.head.score.in_features() != config_.encoder.dim || params_.head.score.out_features() != 1 ||
      params_.head.size.in_features() != config_.encoder.dim || params_.head.size.out_features() != 2) {
    throw ArgumentError("head parameters do not match H");
  }
}

Tracker::EmbeddedTemplate Tracker::embed_template(const Frame& frame, const BoundingBox& box) const {
  const auto t = make_template(frame, box, config_.template_size);
  return {patch_embed(t.rgb, config_.encoder.patch, params_.encoder.embed_rgb),
          patch_embed(t.aux, config_.encoder.patch, params_.encoder.embed_aux)};
}

void Tracker::initialize(const Frame& first, const BoundingBox& init_box) {
  if (initialized_) throw StateError("tracker is already initialized");
  first.validate();
  config_.validate_frame(first.rgb.dim(1), first.rgb.dim(2));
  if (first.rgb.dim(0) != config_.encoder.in_channels) {
    throw ArgumentError("frame channel count does not match the encoder");
  }
  templates_.push_back(embed_template(first, init_box));
  const auto& z = templates_.front().rgb;
  std::vector<double> mean(z.dim(1), 0.0);
  for (std::size_t i = 0; i < z.dim(0); ++i) {
    for (std::size_t j = 0; j < z.dim(1); ++j) mean[j] += z[i * z.dim(1) + j];
  }
  for (auto& m : mean) m /= static_cast<double>(z.dim(0));
  cue_ = Tensor(std::move(mean));
  pool_.init(cue_);
  init_box_ = init_box;
  initialized_ = true;
}

void Tracker::add_template(const Frame& frame, const BoundingBox& box) {
  if (!initialized_) throw StateError("tracker must be initialized before adding templates");
  if (config_.max_templates == 1) throw StateError("template list is fixed at one entry");
  if (templates_.size() == config_.max_templates) templates_.erase(templates_.begin() + 1);
  templates_.push_back(embed_template(frame, box));
}

BoundingBox Tracker::head(const TokenSequence& seq, std::size_t grid_w) {
  const auto search = seq.region_tokens(0);
  const auto tmpl = seq.region_tokens(1);
  const auto n = search.dim(0), d = search.dim(1);

  std::vector<double> ref(d, 0.0);
  for (std::size_t i = 0; i < tmpl.dim(0); ++i) {
    for (std::size_t j = 0; j < d; ++j) ref[j] += tmpl[i * d + j];
  }
  double ref_norm = 0.0;
  for (double v : ref) ref_norm += v * v;
  ref_norm = std::sqrt(ref_norm);

  const auto scores = ops::linear_rows(search, params_.head.score);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      dot += search[i * d + j] * ref[j];
      norm += search[i * d + j] * search[i * d + j];
    }
    const double denom = std::sqrt(norm) * ref_norm;
    const double match = denom > 0.0 ? dot / denom : 0.0;
    const double s = scores[i] + params_.head.match_weight * match;
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  trace_.best_token = best;

  const auto patch = static_cast<double>(config_.encoder.patch);
  const double cx = (static_cast<double>(best % grid_w) + 0.5) * patch;
  const double cy = (static_cast<double>(best / grid_w) + 0.5) * patch;
  const auto logits = ops::linear(search.row(best), params_.head.size);
  const double w = init_box_.w * std::exp(std::tanh(logits[0]));
  const double h = init_box_.h * std::exp(std::tanh(logits[1]));
  return {cx - 0.5 * w, cy - 0.5 * h, w, h};
}

void Tracker::check_runtime_invariants() const {
  const auto sizes = pool_.sizes();
  const std::array<std::size_t, 3> caps{config_.memory.short_capacity,
                                        config_.memory.long_capacity,
                                        config_.memory.permanent_capacity};
  for (std::size_t i = 0; i < 3; ++i) {
    if (sizes[i] < 1 || sizes[i] > caps[i]) throw InvariantError("memory tier size out of bounds");
  }
  if (cue_.size() != config_.encoder.dim) throw InvariantError("cue token width changed");
}

BoundingBox Tracker::track(const Frame& frame) {
  if (!initialized_) throw StateError("tracker used before initialize");
  frame.validate();
  config_.validate_frame(frame.rgb.dim(1), frame.rgb.dim(2));
  const auto dim = config_.encoder.dim;
  const auto patch = config_.encoder.patch;
  const bool adapters = config_.adapters;
  trace_ = {};

  // Cue for this frame: read the memory with the previous cue, then filter.
  const Tensor cue_in = adapters ? pool_.filter(pool_.retrieve(cue_)) : Tensor::zeros({dim});

  const auto search_rgb = patch_embed(frame.rgb, patch, params_.encoder.embed_rgb);
  std::vector<Tensor> template_rgb;
  for (const auto& t : templates_) template_rgb.push_back(t.rgb);
  auto seq = TokenSequence::assemble(search_rgb, template_rgb, cue_in);
  const auto regions = 1 + templates_.size();

  // Per-region auxiliary stream: the fused prompt of the previous stage.
  std::vector<Tensor> prompts;
  if (adapters) {
    const auto search_aux = patch_embed(frame.aux, patch, params_.encoder.embed_aux);
    for (std::size_t r = 0; r < regions; ++r) {
      const auto& aux = r == 0 ? search_aux : templates_[r - 1].aux;
      auto fused = fusion::fmfm(tokens_to_map(seq.region_tokens(r)), tokens_to_map(aux),
                                params_.adapters.fmfm);
      seq = fusion::inject(fused, seq, r);
      prompts.push_back(std::move(fused));
    }
  }

  const Tensor zero_cue = Tensor::zeros({dim});
  for (std::size_t l = 0; l < config_.encoder.layers; ++l) {
    seq = seq.with_tokens(encoder_block(seq.tokens(), params_.encoder.blocks[l]));
    if (adapters) {
      for (std::size_t r = 0; r < regions; ++r) {
        auto fused = fusion::mfm(tokens_to_map(seq.region_tokens(r)), prompts[r],
                                 params_.adapters.layers[l]);
        seq = fusion::inject(fused, seq, r);
        prompts[r] = std::move(fused);
      }
      seq = seq.with_cue(pool_.filter(seq.cue()));
    } else {
      seq = seq.with_cue(zero_cue);
    }
    trace_.cue_slots_per_layer.push_back(seq.cue_slot_count());
    if (seq.cue_slot_count() != 1) throw InvariantError("cue slot lost at layer " + std::to_string(l));
  }

  const auto box = head(seq, frame.rgb.dim(2) / patch);
  if (adapters) {
    cue_ = seq.cue();
    pool_.update(cue_);
  }
  trace_.memory_sizes = pool_.sizes();
  check_runtime_invariants();
  return box;
}

std::vector<BoundingBox> track_sequence(Tracker& tracker, const std::vector<Frame>& frames,
                                        const BoundingBox& init_box,
                                        const std::function<void(std::size_t, const Tracker&)>& on_frame) {
  if (frames.empty()) throw ArgumentError("cannot track an empty sequence");
  std::vector<BoundingBox> out;
  out.reserve(frames.size());
  tracker.initialize(frames.front(), init_box);
  out.push_back(init_box);
  if (on_frame) on_frame(0, tracker);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    out.push_back(tracker.track(frames[t]));
    if (on_frame) on_frame(t, tracker);
  }
  return out;
}

}  // namespace vmda
