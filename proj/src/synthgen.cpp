#include "vmda/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "vmda/errors.hpp"

namespace vmda::synth {

bool SceneConfig::occluded(std::size_t t) const {
  for (const auto& w : occlusions) {
    if (t >= w.first && t <= w.last) return true;
  }
  return false;
}

void SceneConfig::validate() const {
  if (width == 0 || height == 0 || channels == 0 || frames == 0) {
    throw ArgumentError("scene: image size, channels and frame count must be positive");
  }
  if (!(target_w > 0.0) || !(target_h > 0.0) || target_w > static_cast<double>(width) ||
      target_h > static_cast<double>(height)) {
    throw ArgumentError("scene: target size must be positive and fit in the image");
  }
  if (!(noise_rgb >= 0.0) || !(noise_aux >= 0.0)) {
    throw ArgumentError("scene: noise levels must be non-negative");
  }
  if (path.kind == PathKind::kSinusoidal && !(path.period > 0.0)) {
    throw ArgumentError("scene: sinusoidal path needs a positive period");
  }
  for (const auto& w : occlusions) {
    if (w.first > w.last) throw ArgumentError("scene: occlusion window ends before it starts");
  }
  if (occluded(0)) throw ArgumentError("scene: the first frame must show the target");
  for (std::size_t t = 0; t < frames; ++t) {
    if (occluded(t)) continue;
    const auto b = target_box(*this, t);
    if (!std::isfinite(b.x) || !std::isfinite(b.y) || b.x < 0.0 || b.y < 0.0 ||
        b.right() > static_cast<double>(width) || b.bottom() > static_cast<double>(height)) {
      throw ArgumentError("scene: target leaves the image at frame " + std::to_string(t));
    }
  }
}

BoundingBox target_box(const SceneConfig& cfg, std::size_t t) {
  const double tt = static_cast<double>(t);
  const auto& p = cfg.path;
  double x = p.start_x, y = p.start_y;
  if (p.kind == PathKind::kLinear) {
    x += p.velocity_x * tt;
    y += p.velocity_y * tt;
  } else {
    const double angle = 2.0 * std::numbers::pi * tt / p.period;
    x += p.amplitude_x * std::sin(angle);
    y += p.amplitude_y * std::sin(angle + p.phase);
  }
  return {x, y, cfg.target_w, cfg.target_h};
}

namespace {

// Background clutter: a fixed low-amplitude pattern so frames are not flat.
double background(std::size_t ch, double px, double py) {
  return 0.1 * std::sin(0.37 * px + 0.11 * static_cast<double>(ch)) * std::cos(0.23 * py);
}

void render(const SceneConfig& cfg, std::size_t t, std::mt19937_64& rng, Frame& frame) {
  const auto c = cfg.channels, h = cfg.height, w = cfg.width;
  std::vector<double> rgb(c * h * w), aux(c * h * w);
  const bool visible = !cfg.occluded(t);
  const auto box = target_box(cfg, t);
  const double sigma = 0.4 * std::min(box.w, box.h);

  for (std::size_t ch = 0; ch < c; ++ch) {
    // aux channels get progressively wider blobs
    const double s = sigma * (1.0 + 0.5 * static_cast<double>(ch));
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
        double r = background(ch, px, py);
        double a = 0.0;
        if (visible) {
          if (px >= box.x && px < box.right() && py >= box.y && py < box.bottom()) {
            // fine checkerboard texture, phase-shifted per channel
            const auto u = static_cast<std::size_t>(std::floor(px - box.x));
            const auto v = static_cast<std::size_t>(std::floor(py - box.y));
            r = ((u + v + ch) % 2 == 0) ? 1.0 : 0.4;
          }
          const double dx = px - box.center_x(), dy = py - box.center_y();
          a = std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
        }
        rgb[(ch * h + y) * w + x] = r;
        aux[(ch * h + y) * w + x] = a;
      }
    }
  }
  if (cfg.noise_rgb > 0.0) {
    std::normal_distribution<double> n(0.0, cfg.noise_rgb);
    for (auto& v : rgb) v += n(rng);
  }
  if (cfg.noise_aux > 0.0) {
    std::normal_distribution<double> n(0.0, cfg.noise_aux);
    for (auto& v : aux) v += n(rng);
  }
  frame.rgb = Tensor({c, h, w}, std::move(rgb));
  frame.aux = Tensor({c, h, w}, std::move(aux));
  frame.index = t;
}

}  // namespace

Sequence generate(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Sequence seq;
  seq.frames.resize(cfg.frames);
  seq.ground_truth.resize(cfg.frames);
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    render(cfg, t, rng, seq.frames[t]);
    if (!cfg.occluded(t)) seq.ground_truth[t] = target_box(cfg, t);
  }
  return seq;
}

}  // namespace vmda::synth
