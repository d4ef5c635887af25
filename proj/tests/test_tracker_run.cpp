#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/params_io.hpp"
#include "vmda/run.hpp"
#include "vmda/tracker.hpp"

using namespace vmda;
namespace fs = std::filesystem;

namespace {

RunConfig short_run(std::size_t frames) {
  auto cfg = parse_run_config(default_config_text());
  cfg.scene.frames = frames;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("encoder block shapes and patch embedding") {
  oracle::Rng rng(81);
  TrackerConfig cfg;
  const auto params = random_params(cfg, 3);
  const auto x = oracle::random_tensor({2, 64, 64}, rng);
  const auto tokens = patch_embed(x, 8, params.encoder.embed_rgb);
  CHECK(tokens.shape() == Shape{64, 64});
  const auto want = oracle::patch_embed_naive(oracle::to_map(x), 8, oracle::to_mat(params.encoder.embed_rgb.weight),
                                              params.encoder.embed_rgb.bias.vec());
  for (std::size_t i = 0; i < 64; i += 9)
    for (std::size_t h = 0; h < 64; h += 7) CHECK(tokens.at(i, h) == doctest::Approx(want[i][h]).epsilon(1e-13));
  CHECK(encoder_block(tokens, params.encoder.blocks[0]).shape() == tokens.shape());
  CHECK_THROWS_AS(patch_embed(oracle::random_tensor({2, 12, 12}, rng), 8, params.encoder.embed_rgb), ArgumentError);
}

TEST_CASE("layer norm rows are standardized") {
  oracle::Rng rng(82);
  LayerNormParams p{Tensor::full({6}, 1.0), Tensor::zeros({6})};
  const auto y = layer_norm_rows(oracle::random_tensor({3, 6}, rng, -4, 9), p);
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0, var = 0;
    for (std::size_t j = 0; j < 6; ++j) mean += y.at(r, j) / 6;
    for (std::size_t j = 0; j < 6; ++j) var += (y.at(r, j) - mean) * (y.at(r, j) - mean) / 6;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12).scale(1));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("tracker contracts") {
  TrackerConfig cfg;
  auto scene = short_run(3).scene;
  const auto seq = synth::generate(scene);
  Tracker tracker(cfg, random_params(cfg, 1));
  CHECK_THROWS_AS(tracker.track(seq.frames[1]), StateError);
  tracker.initialize(seq.frames[0], *seq.ground_truth[0]);
  CHECK_THROWS_AS(tracker.initialize(seq.frames[0], *seq.ground_truth[0]), StateError);
  CHECK_THROWS_AS(tracker.add_template(seq.frames[0], *seq.ground_truth[0]), StateError);
  tracker.track(seq.frames[1]);
  const auto& trace = tracker.last_trace();
  CHECK(trace.cue_slots_per_layer == std::vector<std::size_t>(4, 1));
  CHECK(trace.memory_sizes == std::array<std::size_t, 3>{2, 1, 1});
  Frame wrong{Tensor::zeros({2, 60, 60}), Tensor::zeros({2, 60, 60}), 0};
  CHECK_THROWS_AS(tracker.track(wrong), ArgumentError);
}

TEST_CASE("extra templates replace the oldest non-initial one") {
  TrackerConfig cfg;
  cfg.max_templates = 3;
  const auto seq = synth::generate(short_run(6).scene);
  Tracker tracker(cfg, random_params(cfg, 2));
  tracker.initialize(seq.frames[0], *seq.ground_truth[0]);
  for (std::size_t t = 1; t < 5; ++t) tracker.add_template(seq.frames[t], *seq.ground_truth[t]);
  CHECK(tracker.template_count() == 3);
  CHECK_NOTHROW(tracker.track(seq.frames[5]));
}

TEST_CASE("tracker config validation") {
  TrackerConfig cfg;
  cfg.filter_ratio = 3;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.template_size = 24;  // 3x3 tokens, not divisible by the pool window
  CHECK_NOTHROW(cfg.encoder.validate());
  cfg = {};
  CHECK_THROWS_AS(cfg.validate_frame(64, 48), ArgumentError);
  CHECK_THROWS_AS(cfg.validate_frame(60, 60), ArgumentError);
}

TEST_CASE("adapter-off equivalence over a short run") {
  auto run = short_run(12);
  const auto seq = synth::generate(run.scene);
  auto off_cfg = run.tracker;
  off_cfg.adapters = false;
  const auto params = with_zero_adapters(random_params(run.tracker, 11), run.tracker);
  Tracker on(run.tracker, params), off(off_cfg, params);
  CHECK(track_sequence(on, seq.frames, *seq.ground_truth[0]) == track_sequence(off, seq.frames, *seq.ground_truth[0]));
  // with random adapters the outputs move
  Tracker live(run.tracker, random_params(run.tracker, 11));
  Tracker base(off_cfg, random_params(run.tracker, 11));
  CHECK_FALSE(track_sequence(live, seq.frames, *seq.ground_truth[0]) ==
              track_sequence(base, seq.frames, *seq.ground_truth[0]));
}

TEST_CASE("params json round trip") {
  TrackerConfig cfg;
  const auto params = random_params(cfg, 5);
  const auto text = io::params_to_json(params);
  auto back = io::params_from_json(text, cfg);
  auto copy = params;
  std::size_t n = 0;
  for_each_tensor(copy, [&](const std::string&, Tensor&) { ++n; });
  CHECK(n > 50);
  std::vector<Tensor> a, b;
  for_each_tensor(copy, [&](const std::string&, Tensor& t) { a.push_back(t); });
  for_each_tensor(back, [&](const std::string&, Tensor& t) { b.push_back(t); });
  CHECK(a == b);
  TrackerConfig wide = cfg;
  wide.encoder.dim = 32;
  CHECK_THROWS_AS(io::params_from_json(text, wide), ArgumentError);
  CHECK_THROWS(io::params_from_json("{\"format\":\"other\"}", cfg));
}

TEST_CASE("run config parsing") {
  const auto cfg = parse_run_config(default_config_text());
  CHECK(cfg.tracker.memory.short_capacity == 8);
  CHECK(cfg.tracker.memory.permanent_capacity == 3);
  CHECK(cfg.tracker.encoder.layers == 4);
  CHECK(cfg.scene.occlusions.size() == 1);
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(parse_run_config("format_version = 2\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("[scene]\nframes = many\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("[bogus]\nx = 1\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("[scene]\noccluisons = 1-2\n"), ArgumentError);
  CHECK_THROWS_AS(parse_run_config("[memory]\nfilter_ratio = 5\n").validate(), ArgumentError);
}

TEST_CASE("execute_run writes deterministic outputs independent of jobs") {
  auto cfg = short_run(20);
  cfg.sequences = 2;
  cfg.snapshot_every = 8;
  const auto root = fs::temp_directory_path() / "vmda_test_run";
  fs::remove_all(root);
  cfg.output_dir = root / "a";
  const auto a = execute_run(cfg, 1);
  cfg.output_dir = root / "b";
  execute_run(cfg, 2);
  REQUIRE(a.size() == 2);
  for (const auto* seq : {"seq_000", "seq_001"}) {
    CHECK(slurp(root / "a" / seq / "boxes.txt") == slurp(root / "b" / seq / "boxes.txt"));
    CHECK(slurp(root / "a" / seq / "snapshots" / "frame_000019.mem") ==
          slurp(root / "b" / seq / "snapshots" / "frame_000019.mem"));
    CHECK(fs::exists(root / "a" / seq / "snapshots" / "frame_000008.mem"));
    CHECK(io::load_boxes(root / "a" / seq / "boxes.txt").size() == 20);
  }
  CHECK(slurp(root / "a" / "report.json") == slurp(root / "b" / "report.json"));
  CHECK(a[0].predictions != a[1].predictions);  // sequences differ by seed
  fs::remove_all(root);
}

TEST_CASE("loaded sequences track like generated ones") {
  auto cfg = short_run(6);
  const auto root = fs::temp_directory_path() / "vmda_test_gen";
  fs::remove_all(root);
  generate_sequences(cfg, root);
  const auto dir = root / "seq_000";
  REQUIRE(fs::exists(dir / "groundtruth.txt"));
  const auto from_disk = track_one(cfg, io::load_sequence(dir), "disk");
  const auto direct = track_one(cfg, synth::generate(cfg.scene_for(0)), "direct");
  CHECK(from_disk.predictions == direct.predictions);
  fs::remove_all(root);
}
