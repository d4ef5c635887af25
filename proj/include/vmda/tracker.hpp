#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vmda/box.hpp"
#include "vmda/encoder.hpp"
#include "vmda/frame.hpp"
#include "vmda/fusion.hpp"
#include "vmda/memory.hpp"
#include "vmda/tokens.hpp"

namespace vmda {

struct TrackerConfig {
  EncoderConfig encoder;
  MemoryConfig memory{64};    // memory.dim is kept equal to encoder.dim
  std::size_t filter_ratio = 4;
  std::size_t template_size = 32;
  std::size_t max_templates = 1;
  std::size_t pool_window = 2;     // frequency selector average pooling
  std::size_t decomp_kernel = 3;   // frequency selector convolution
  std::size_t mfm_kernel = 1;      // fusion module convolutions
  bool adapters = true;            // false runs the surrogate encoder alone

  // Checks internal consistency and, when given, compatibility with a frame size.
  void validate() const;
  void validate_frame(std::size_t height, std::size_t width) const;
};

// Frozen head: center score per search token, box size regressed from the
// winning token relative to the initial box size.
struct HeadParams {
  LinearParams score;  // H -> 1
  LinearParams size;   // H -> 2
  double match_weight = 1.0;  // weight of template-similarity in the score
};

struct AdapterParams {
  fusion::FmfmParams fmfm;
  std::vector<fusion::MfmParams> layers;  // one MFM after each encoder block
};

struct TrackerParams {
  EncoderParams encoder;
  AdapterParams adapters;
  FilterParams filter;
  HeadParams head;
};

// Seeded uniform initialisation of every parameter.
TrackerParams random_params(const TrackerConfig& cfg, std::uint64_t seed);
// Same shapes with all-zero values (BN statistics stay valid).
TrackerParams zero_params(const TrackerConfig& cfg);
// Replaces the visual adapters and memory filter with zeros, keeping the rest.
TrackerParams with_zero_adapters(TrackerParams params, const TrackerConfig& cfg);

// Visits every tensor with a stable dotted name.
void for_each_tensor(TrackerParams& params, const std::function<void(const std::string&, Tensor&)>& f);

// Per-frame diagnostics collected while tracking.
struct FrameTrace {
  std::vector<std::size_t> cue_slots_per_layer;
  std::array<std::size_t, 3> memory_sizes{};
  std::size_t best_token = 0;
};

// One tracking session. Mutable, single writer.
class Tracker {
 public:
  Tracker(TrackerConfig config, TrackerParams params);

  const TrackerConfig& config() const { return config_; }
  bool initialized() const { return initialized_; }
  const MemoryPool& memory() const { return pool_; }
  const Tensor& cue() const { return cue_; }
  std::size_t template_count() const { return templates_.size(); }
  const FrameTrace& last_trace() const { return trace_; }

  // Builds the first template from `init_box` and seeds the memory with the
  // mean template token.
  void initialize(const Frame& first, const BoundingBox& init_box);

  // Appends a template; once the list is full the oldest non-initial template
  // is dropped. Throws StateError when only one template is allowed.
  void add_template(const Frame& frame, const BoundingBox& box);

  BoundingBox track(const Frame& frame);

 private:
  struct EmbeddedTemplate {
    Tensor rgb;  // (n, H) tokens
    Tensor aux;
  };

  EmbeddedTemplate embed_template(const Frame& frame, const BoundingBox& box) const;
  BoundingBox head(const TokenSequence& seq, std::size_t grid_w);
  void check_runtime_invariants() const;

  TrackerConfig config_;
  TrackerParams params_;
  MemoryPool pool_;
  std::vector<EmbeddedTemplate> templates_;
  Tensor cue_;
  BoundingBox init_box_;
  bool initialized_ = false;
  FrameTrace trace_;
};

// Tracks every frame after the first, which is initialised from `init_box`
// and reported as-is.
std::vector<BoundingBox> track_sequence(Tracker& tracker, const std::vector<Frame>& frames,
                                        const BoundingBox& init_box,
                                        const std::function<void(std::size_t, const Tracker&)>&
                                            on_frame = {});

}  // namespace vmda
