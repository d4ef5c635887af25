#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/frame.hpp"
#include "vmda/synthgen.hpp"

using namespace vmda;
namespace fs = std::filesystem;

TEST_CASE("zero noise static scene repeats itself") {
  synth::SceneConfig cfg;
  cfg.frames = 5;
  cfg.noise_rgb = cfg.noise_aux = 0;
  const auto seq = synth::generate(cfg);
  REQUIRE(seq.frames.size() == 5);
  for (std::size_t t = 1; t < 5; ++t) {
    CHECK(seq.frames[t].rgb == seq.frames[0].rgb);
    CHECK(seq.frames[t].aux == seq.frames[0].aux);
    CHECK(seq.ground_truth[t] == seq.ground_truth[0]);
  }
}

TEST_CASE("seeds drive the noise") {
  synth::SceneConfig cfg;
  cfg.frames = 3;
  auto other = cfg;
  other.seed = 8;
  CHECK(synth::generate(cfg).frames[2].rgb == synth::generate(cfg).frames[2].rgb);
  CHECK_FALSE(synth::generate(cfg).frames[2].rgb == synth::generate(other).frames[2].rgb);
}

TEST_CASE("paths and occlusions") {
  synth::SceneConfig cfg;
  cfg.frames = 40;
  cfg.path = {synth::PathKind::kSinusoidal, 26, 26, 0, 0, 10, 8, 20, 0.3};
  cfg.occlusions = {{5, 7}, {20, 20}};
  const auto seq = synth::generate(cfg);
  for (std::size_t t = 0; t < 40; ++t) {
    const bool hidden = (t >= 5 && t <= 7) || t == 20;
    CHECK(seq.ground_truth[t].has_value() == !hidden);
    const auto b = synth::target_box(cfg, t);
    CHECK(b.w > 0);
    CHECK(b.x >= 0);
    CHECK(b.right() <= 64);
  }
  CHECK(synth::target_box(cfg, 20).x == doctest::Approx(26 + 10 * std::sin(2 * M_PI * 20 / 20)));
}

TEST_CASE("scene validation") {
  synth::SceneConfig cfg;
  cfg.occlusions = {{0, 2}};
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.occlusions = {};
  cfg.path.velocity_x = 5;  // leaves the frame
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.target_w = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("template crops stay inside the frame") {
  synth::SceneConfig cfg;
  cfg.frames = 1;
  const auto seq = synth::generate(cfg);
  const auto t = make_template(seq.frames[0], {58, 58, 6, 6}, 32);
  CHECK(t.rgb.shape() == Shape{2, 32, 32});
  CHECK(t.source.right() <= 64);
  CHECK_THROWS_AS(make_template(seq.frames[0], {0, 0, 4, 4}, 80), ArgumentError);
}

TEST_CASE("box file round trip and diagnostics") {
  const metrics::BoxSequence boxes{BoundingBox{0.1, 0.2, 3, 4}, std::nullopt, BoundingBox{1e-300, 1.0 / 3, 7, 1}};
  std::stringstream ss;
  io::write_boxes(ss, boxes);
  CHECK(ss.str().find("1 absent\n") != std::string::npos);
  CHECK(io::read_boxes(ss) == boxes);

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream is(text);
    try {
      io::read_boxes(is);
    } catch (const io::ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("0 1 2 3 4\n1 1 2 x 4\n") == 2);
  CHECK(line_of("0 1 2 3\n") == 1);
  CHECK(line_of("0 1 2 3 4\n2 1 2 3 4\n") == 2);
  CHECK(line_of("0 1 2 -3 4\n") == 1);
  CHECK(line_of("0 absent\n\n1 absent\n") == 0);  // blank lines are skipped
}

TEST_CASE("tensor files round trip bit for bit") {
  oracle::Rng rng(71);
  const auto t = oracle::random_tensor({2, 3, 4}, rng, -1e6, 1e6);
  std::stringstream ss;
  io::write_tensor(ss, t);
  CHECK(io::read_tensor(ss) == t);
  std::istringstream bad("2 2 2\n1 2\n3\n");
  CHECK_THROWS_AS(io::read_tensor(bad), io::ParseError);
}

TEST_CASE("snapshots") {
  oracle::Rng rng(72);
  MemoryPool pool({3, 8, 8, 3}, identity_filter(3));
  pool.init(oracle::random_tensor({3}, rng));
  for (int i = 0; i < 11; ++i) pool.update(oracle::random_tensor({3}, rng));
  std::stringstream ss;
  io::write_snapshot(ss, pool);
  const std::string text = ss.str();
  CHECK(text.rfind("3 8 1 1\n", 0) == 0);
  CHECK(text.find("capacity 8 8 3") != std::string::npos);
  const auto snap = io::read_snapshot(ss);
  CHECK(snap.dim == 3);
  const auto restored = io::restore_pool(snap, pool.config(), identity_filter(3));
  for (auto tier : {Tier::kShort, Tier::kLong, Tier::kPermanent}) CHECK(restored.bank(tier) == pool.bank(tier));
  std::istringstream truncated("3 2 1 1\n1 2 3\n");
  CHECK_THROWS_AS(io::read_snapshot(truncated), io::ParseError);
}

TEST_CASE("sequence directories") {
  const auto dir = fs::temp_directory_path() / "vmda_test_seq";
  fs::remove_all(dir);
  synth::SceneConfig cfg;
  cfg.frames = 3;
  cfg.occlusions = {{1, 1}};
  const auto seq = synth::generate(cfg);
  io::save_sequence(dir, seq);
  const auto back = io::load_sequence(dir);
  REQUIRE(back.frames.size() == 3);
  CHECK(back.ground_truth == seq.ground_truth);
  CHECK(back.frames[2].rgb == seq.frames[2].rgb);
  CHECK(back.frames[1].aux == seq.frames[1].aux);
  fs::remove_all(dir);
}
