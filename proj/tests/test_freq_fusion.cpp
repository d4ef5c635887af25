#include <doctest.h>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/freq_selector.hpp"
#include "vmda/fusion.hpp"
#include "vmda/ops.hpp"
#include "vmda/tokens.hpp"

using namespace vmda;

TEST_CASE("frequency selector matches the step-by-step trace") {
  oracle::Rng rng(31);
  for (std::size_t c : {1, 3}) {
    for (std::size_t window : {1, 2, 4}) {
      const auto p = oracle::random_freq(c, window, 3, rng);
      const auto f = oracle::random_tensor({c, 8, 8}, rng);
      const auto tr = oracle::frequency_select_trace(oracle::to_map(f), p);
      CHECK(max_abs_diff(freq::attention_map(f, p), oracle::from_map(tr.attention)) < 1e-14);
      const auto pair = freq::decompose(f, p);
      const auto g = freq::gates(pair, p);
      for (std::size_t ch = 0; ch < c; ++ch) {
        CHECK(g.high[ch] == doctest::Approx(tr.gate_high[ch]).epsilon(1e-14));
        CHECK(g.low[ch] == doctest::Approx(tr.gate_low[ch]).epsilon(1e-14));
      }
      CHECK(max_abs_diff(freq::frequency_select(f, p), oracle::from_map(tr.fused)) < 1e-13);
    }
  }
}

TEST_CASE("odd sizes upsample back to the input extent") {
  oracle::Rng rng(32);
  const auto p = oracle::random_freq(2, 2, 1, rng);
  const auto f = oracle::random_tensor({2, 5, 7}, rng);
  const auto pair = freq::decompose(f, p);
  CHECK(pair.high.shape() == f.shape());
  CHECK(max_abs_diff(ops::add(pair.high, pair.low), f) <= 1e-12);
}

TEST_CASE("attention map is a spatial distribution per pooled channel") {
  oracle::Rng rng(33);
  const auto p = oracle::random_freq(3, 2, 3, rng);
  const auto a = freq::attention_map(oracle::random_tensor({3, 8, 8}, rng), p);
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0;
    for (std::size_t y = 0; y < 8; y += 2)
      for (std::size_t x = 0; x < 8; x += 2) sum += a.at(c, y, x);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gate extremes") {
  oracle::Rng rng(34);
  auto p = freq::neutral_params(2, 2);
  const auto f = oracle::random_tensor({2, 4, 4}, rng);
  p.fc_high.bias = Tensor::full({2}, -20.0);
  p.fc_low.bias = Tensor::full({2}, 20.0);
  const auto pair = freq::decompose(f, p);
  CHECK(max_abs_diff(freq::select_fuse(pair, p), pair.low) < 1e-8);
  // neutral gates are exactly one half
  const auto n = freq::neutral_params(2, 2);
  const auto g = freq::gates(freq::decompose(f, n), n);
  CHECK(g.high[0] == 0.5);
  CHECK(g.low[1] == 0.5);
}

TEST_CASE("freq params validation") {
  auto p = freq::neutral_params(2, 2);
  p.fc_high = zero_linear(3, 2);
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  CHECK_THROWS_AS(freq::decompose(Tensor::zeros({3, 4, 4}), freq::neutral_params(2, 2)), ArgumentError);
}

TEST_CASE("mfm matches the trace and exposes its branches") {
  oracle::Rng rng(35);
  for (std::size_t k : {1, 3}) {
    const auto p = oracle::random_mfm(4, k, rng);
    const auto a = oracle::random_tensor({4, 3, 3}, rng), b = oracle::random_tensor({4, 3, 3}, rng);
    CHECK(max_abs_diff(fusion::mfm(a, b, p), oracle::from_map(oracle::mfm_trace(oracle::to_map(a), oracle::to_map(b), p))) <
          1e-13);
    const auto br = fusion::mfm_branches(a, b, p);
    CHECK(br.channel.shape() == Shape{4});
  }
  CHECK_THROWS_AS(fusion::mfm(Tensor::zeros({2, 2, 2}), Tensor::zeros({2, 3, 3}), fusion::zero_mfm(2)), ArgumentError);
}

TEST_CASE("zero fusion parameters give an exactly zero map") {
  oracle::Rng rng(36);
  const auto a = oracle::random_tensor({3, 4, 4}, rng), b = oracle::random_tensor({3, 4, 4}, rng);
  const auto out = fusion::fmfm(a, b, fusion::zero_fmfm(3, 2, 1));
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("inject adds onto one region only") {
  oracle::Rng rng(37);
  const auto search = oracle::random_tensor({9, 3}, rng), tmpl = oracle::random_tensor({4, 3}, rng);
  const auto seq = TokenSequence::assemble(search, {tmpl}, oracle::random_tensor({3}, rng));
  const auto fused = oracle::random_tensor({3, 2, 2}, rng);
  const auto out = fusion::inject(fused, seq, 1);
  CHECK(out.region_tokens(0) == search);
  CHECK(out.cue() == seq.cue());
  const auto delta = ops::sub(out.region_tokens(1), tmpl);
  CHECK(max_abs_diff(delta, map_to_tokens(fused)) < 1e-15);
  CHECK(out.region_tokens(1) == ops::add(tmpl, map_to_tokens(fused)));
  CHECK_THROWS_AS(fusion::inject(Tensor::zeros({3, 3, 3}), seq, 1), ArgumentError);
  CHECK_THROWS(fusion::inject(Tensor::zeros({3, 1, 1}), seq, seq.cue_region()));
}
