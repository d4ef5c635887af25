#pragma once

// Run configuration and the end-to-end `run` / `gen` drivers.
//
// Config files are INI documents (format_version = 1):
//
//   format_version = 1
//   seed = 7
//   [scene]    source (synthetic | <sequence dir>), sequences, width, height,
//              channels, frames, target_w, target_h, path (linear | sinusoidal),
//              start_x, start_y, velocity_x, velocity_y, amplitude_x,
//              amplitude_y, period, phase, occlusions ("a-b, c-d"),
//              noise_rgb, noise_aux
//   [encoder]  layers, dim, patch, mlp_ratio
//   [adapters] enabled, params (random | zero | <json file>), pool_window,
//              decomp_kernel, mfm_kernel
//   [memory]   short_capacity, long_capacity, permanent_capacity,
//              filter_ratio, long_stride, permanent_stride, renormalize
//   [tracker]  template_size, max_templates
//   [output]   dir, snapshot_every
//
// Missing keys keep their defaults; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vmda/metrics.hpp"
#include "vmda/synthgen.hpp"
#include "vmda/tracker.hpp"

namespace vmda {

inline constexpr int kConfigVersion = 1;

struct RunConfig {
  std::uint64_t seed = 7;
  std::string scene_source = "synthetic";
  std::size_t sequences = 1;
  synth::SceneConfig scene;
  TrackerConfig tracker;
  std::string params_source = "random";
  std::filesystem::path output_dir = "vmda_out";
  std::size_t snapshot_every = 16;

  // Throws ArgumentError describing the first violated constraint.
  void validate() const;
  // Scene for sequence i, seeded from the run seed.
  synth::SceneConfig scene_for(std::size_t i) const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string default_config_text();

TrackerParams build_params(const RunConfig& cfg);

struct SequenceResult {
  std::string name;
  metrics::BoxSequence predictions;
  metrics::BoxSequence ground_truth;
  metrics::Report report;
  std::array<std::size_t, 3> final_memory_sizes{};
};

// Tracks every configured sequence and writes, under output_dir:
//   <seq>/boxes.txt, <seq>/groundtruth.txt, <seq>/snapshots/frame_NNNNNN.mem,
//   report.json (one record per sequence plus an aggregate).
// Sequences run on up to `jobs` threads; output does not depend on `jobs`.
std::vector<SequenceResult> execute_run(const RunConfig& cfg, std::size_t jobs = 1);

// Tracks one sequence without touching the filesystem.
SequenceResult track_one(const RunConfig& cfg, const synth::Sequence& seq, const std::string& name,
                         const std::filesystem::path& snapshot_dir = {});

std::string report_json(const std::vector<SequenceResult>& results);

// Writes the configured synthetic sequences as sequence directories.
void generate_sequences(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace vmda
