#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vmda/frame.hpp"
#include "vmda/metrics.hpp"

namespace vmda::synth {

enum class PathKind { kLinear, kSinusoidal };

// Top-left corner trajectory of the target.
//   linear:     start + velocity * t
//   sinusoidal: start + amplitude * sin(2 pi t / period + phase)  (phase applies to y only)
struct MotionPath {
  PathKind kind = PathKind::kLinear;
  double start_x = 26.0;
  double start_y = 26.0;
  double velocity_x = 0.0;
  double velocity_y = 0.0;
  double amplitude_x = 0.0;
  double amplitude_y = 0.0;
  double period = 32.0;
  double phase = 0.0;
};

// Inclusive frame range during which the target is hidden.
struct OcclusionWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct SceneConfig {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t channels = 2;
  std::size_t frames = 64;
  double target_w = 12.0;
  double target_h = 12.0;
  MotionPath path;
  std::vector<OcclusionWindow> occlusions;
  double noise_rgb = 0.05;
  double noise_aux = 0.02;
  std::uint64_t seed = 7;

  bool occluded(std::size_t t) const;
  void validate() const;
};

struct Sequence {
  std::vector<Frame> frames;
  metrics::BoxSequence ground_truth;
};

// Box of the target at frame t, ignoring occlusion.
BoundingBox target_box(const SceneConfig& cfg, std::size_t t);

Sequence generate(const SceneConfig& cfg);

}  // namespace vmda::synth
