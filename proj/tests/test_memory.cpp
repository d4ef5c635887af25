#include <doctest.h>

#include <cmath>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/memory.hpp"

using namespace vmda;

namespace {
Tensor v2(double a, double b) { return Tensor(std::vector<double>{a, b}); }
MemoryConfig small(std::size_t dim) { return {dim, 8, 8, 3}; }
}  // namespace

TEST_CASE("bank FIFO eviction") {
  MemoryBank bank(3, 2);
  for (int i = 0; i < 5; ++i) bank.push(v2(i, 0));
  REQUIRE(bank.size() == 3);
  CHECK(bank.token(0)[0] == 2);
  CHECK(bank.token(2)[0] == 4);
  CHECK_THROWS_AS(bank.push(Tensor::zeros({3})), ArgumentError);
}

TEST_CASE("attn_update against the dense oracle") {
  oracle::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + trial % 6, nt = 1 + trial % 4, ns = 1 + (trial / 4) % 4;
    MemoryBank target(8, dim), source(8, dim);
    oracle::Mat t, s;
    for (std::size_t i = 0; i < nt; ++i) {
      target.push(oracle::random_tensor({dim}, rng, -2, 2));
      t.push_back(target.tokens().back().vec());
    }
    for (std::size_t i = 0; i < ns; ++i) {
      source.push(oracle::random_tensor({dim}, rng, -2, 2));
      s.push_back(source.tokens().back().vec());
    }
    const auto delta = oracle::attention_dense(t, s, s, 1.0 / std::sqrt(static_cast<double>(dim)));
    attn_update(target, source);
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t h = 0; h < dim; ++h) CHECK(std::fabs(target.token(i)[h] - (t[i][h] + delta[i][h])) <= 1e-12);
  }
}

TEST_CASE("attn_update convexity examples") {
  MemoryBank target(8, 2), source(8, 2);
  target.push(v2(1, 1));
  target.push(v2(-3, 0.5));
  for (int i = 0; i < 3; ++i) source.push(v2(0.25, -2));
  attn_update(target, source);
  CHECK(target.token(0) == v2(1.25, -1));
  CHECK(target.token(1) == v2(-2.75, -1.5));
  MemoryBank empty(8, 2);
  CHECK_THROWS_AS(attn_update(target, empty), StateError);
}

TEST_CASE("pool lifecycle") {
  MemoryPool pool(small(2), identity_filter(2));
  CHECK_THROWS_AS(pool.retrieve(v2(0, 0)), StateError);
  CHECK_THROWS_AS(pool.update(v2(0, 0)), StateError);
  const auto c0 = v2(0.5, -1.5);
  pool.init(c0);
  CHECK(pool.sizes() == std::array<std::size_t, 3>{1, 1, 1});
  CHECK_THROWS_AS(pool.init(c0), StateError);
  pool.update(c0);
  CHECK(pool.bank(Tier::kShort).size() == 2);
  CHECK(pool.bank(Tier::kLong).token(0) == v2(1.0, -3.0));
  // permanent reads the already refreshed long tier: c0 + 2 c0
  CHECK(pool.bank(Tier::kPermanent).token(0) == v2(1.5, -4.5));
  CHECK_THROWS_AS(pool.retrieve(Tensor::zeros({3})), ArgumentError);
}

TEST_CASE("push_short keeps the most recent eight") {
  MemoryPool pool(small(2), identity_filter(2));
  pool.init(v2(-1, -1));
  for (int i = 0; i < 9; ++i) pool.push_short(v2(i, i));
  const auto& bank = pool.bank(Tier::kShort);
  REQUIRE(bank.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(bank.token(i)[0] == static_cast<double>(i + 1));
}

TEST_CASE("replay against the dense pool") {
  oracle::Rng rng(42);
  for (std::size_t dim : {2, 5, 8}) {
    MemoryPool pool(small(dim), identity_filter(dim));
    oracle::DensePool dense(8, 8, 3);
    // the tiers accumulate without bound; small tokens keep the oracle's
    // literal exponentials finite over 20 updates
    const auto c0 = oracle::random_tensor({dim}, rng, -0.05, 0.05);
    pool.init(c0);
    dense.init(c0.vec());
    for (int step = 0; step < 20; ++step) {
      const auto c = oracle::random_tensor({dim}, rng, -0.05, 0.05);
      pool.update(c);
      dense.update(c.vec());
      const auto q = oracle::random_tensor({dim}, rng);
      const auto want = dense.retrieve(q.vec());
      const auto got = pool.retrieve_detail(q);
      for (std::size_t h = 0; h < dim; ++h)
        CHECK(std::fabs(got.combined[h] - want.combined[h]) <= 1e-12 * std::max(1.0, std::fabs(want.combined[h])));
      for (std::size_t t = 0; t < 3; ++t) {
        const auto m = pool.bank(static_cast<Tier>(t)).matrix();
        for (std::size_t i = 0; i < m.dim(0); ++i)
          for (std::size_t h = 0; h < dim; ++h)
            CHECK(std::fabs(m.at(i, h) - dense.tiers()[t][i][h]) <= 1e-12 * std::max(1.0, std::fabs(m.at(i, h))));
      }
    }
  }
}

TEST_CASE("update strides") {
  MemoryConfig cfg = small(2);
  cfg.long_stride = 2;
  cfg.permanent_stride = 3;
  MemoryPool pool(cfg, identity_filter(2));
  pool.init(v2(1, 0));
  pool.update(v2(1, 0));
  CHECK(pool.bank(Tier::kLong).token(0) == v2(1, 0));
  pool.update(v2(1, 0));
  CHECK(pool.bank(Tier::kLong).token(0) == v2(2, 0));
  CHECK(pool.bank(Tier::kPermanent).token(0) == v2(1, 0));
  pool.update(v2(1, 0));
  CHECK(pool.bank(Tier::kPermanent).token(0)[0] > 1.0);
}

TEST_CASE("renormalization keeps long-tier norms bounded") {
  MemoryConfig cfg = small(4);
  cfg.renormalize = true;
  MemoryConfig plain = small(4);
  MemoryPool a(cfg, identity_filter(4)), b(plain, identity_filter(4));
  const auto c = Tensor(std::vector<double>{1, 1, 1, 1});
  a.init(c);
  b.init(c);
  for (int i = 0; i < 50; ++i) {
    a.update(c);
    b.update(c);
  }
  auto norm = [](const Tensor& t) {
    double s = 0;
    for (double v : t.values()) s += v * v;
    return std::sqrt(s);
  };
  CHECK(norm(a.bank(Tier::kLong).token(0)) < 2.5);
  CHECK(norm(b.bank(Tier::kLong).token(0)) > 50.0);
}

TEST_CASE("filter") {
  oracle::Rng rng(43);
  CHECK_THROWS_AS(MemoryPool(small(6), zero_filter(6, 4)), ArgumentError);
  const FilterParams f{oracle::random_linear(2, 8, rng), oracle::random_linear(8, 2, rng), 4};
  MemoryPool pool(small(8), f);
  const auto c = oracle::random_tensor({8}, rng);
  const auto want = oracle::filter_naive(c.vec(), oracle::to_mat(f.down.weight), f.down.bias.vec(),
                                         oracle::to_mat(f.up.weight), f.up.bias.vec());
  const auto got = pool.filter(c);
  for (std::size_t i = 0; i < 8; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  MemoryPool zero(small(8), zero_filter(8, 4));
  const auto filtered = zero.filter(c);
  for (double v : filtered.values()) CHECK(v == 0.0);
}

TEST_CASE("restore rebuilds an equal pool") {
  oracle::Rng rng(44);
  MemoryPool pool(small(3), identity_filter(3));
  pool.init(oracle::random_tensor({3}, rng));
  for (int i = 0; i < 10; ++i) pool.update(oracle::random_tensor({3}, rng));
  std::array<std::vector<Tensor>, 3> tiers;
  for (std::size_t t = 0; t < 3; ++t)
    for (const auto& tok : pool.bank(static_cast<Tier>(t)).tokens()) tiers[t].push_back(tok);
  const auto copy = MemoryPool::restore(pool.config(), identity_filter(3), tiers);
  CHECK(copy.bank(Tier::kShort) == pool.bank(Tier::kShort));
  CHECK(copy.bank(Tier::kPermanent) == pool.bank(Tier::kPermanent));
  tiers[2].resize(4, tiers[2][0]);
  CHECK_THROWS_AS(MemoryPool::restore(pool.config(), identity_filter(3), tiers), ArgumentError);
}
