// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Usage: vmda_acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/losses.hpp"
#include "vmda/memory.hpp"
#include "vmda/metrics.hpp"
#include "vmda/ops.hpp"
#include "vmda/run.hpp"
#include "vmda/tracker.hpp"

using namespace vmda;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool ok = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Result frequency_reconstruction() {
  oracle::Rng rng(1001);
  std::uniform_int_distribution<std::size_t> ch(1, 8), side(2, 16);
  std::uniform_real_distribution<double> scale(0.1, 100.0);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = ch(rng);
    const auto p = oracle::random_freq(c, 2, 3, rng);
    const double s = scale(rng);
    const auto f = oracle::random_tensor({c, side(rng), side(rng)}, rng, -s, s);
    const auto pair = freq::decompose(f, p);
    worst = std::max(worst, max_abs_diff(ops::add(pair.high, pair.low), f));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0, fmt("1000 maps, max error %.3g, %.2f s", worst, secs)};
}

Result attention_oracle() {
  oracle::Rng rng(1002);
  std::uniform_int_distribution<std::size_t> count(1, 4), width(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto h = width(rng);
    MemoryBank target(4, h), source(4, h);
    oracle::Mat t, s;
    for (std::size_t i = 0, n = count(rng); i < n; ++i) {
      target.push(oracle::random_tensor({h}, rng, -2, 2));
      t.push_back(target.tokens().back().vec());
    }
    for (std::size_t i = 0, n = count(rng); i < n; ++i) {
      source.push(oracle::random_tensor({h}, rng, -2, 2));
      s.push_back(source.tokens().back().vec());
    }
    const auto delta = oracle::attention_dense(t, s, s, 1.0 / std::sqrt(static_cast<double>(h)));
    attn_update(target, source);
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t k = 0; k < h; ++k) worst = std::max(worst, std::fabs(target.token(i)[k] - (t[i][k] + delta[i][k])));

    // retrieval on a pool replayed by the dense oracle
    MemoryPool pool({h, 4, 4, 3}, identity_filter(h));
    oracle::DensePool dense(4, 4, 3);
    const auto c0 = oracle::random_tensor({h}, rng);
    pool.init(c0);
    dense.init(c0.vec());
    for (std::size_t u = 0, n = count(rng); u < n; ++u) {
      const auto c = oracle::random_tensor({h}, rng);
      pool.update(c);
      dense.update(c.vec());
    }
    for (std::size_t tier = 0; tier < 3; ++tier) {
      const auto m = pool.bank(static_cast<Tier>(tier)).matrix();
      for (std::size_t i = 0; i < m.dim(0); ++i)
        for (std::size_t k = 0; k < h; ++k) worst = std::max(worst, std::fabs(m.at(i, k) - dense.tiers()[tier][i][k]));
    }
    const auto q = oracle::random_tensor({h}, rng);
    const auto got = pool.retrieve_detail(q);
    const auto want = dense.retrieve(q.vec());
    for (std::size_t k = 0; k < h; ++k) worst = std::max(worst, std::fabs(got.combined[k] - want.combined[k]));
  }
  return {worst <= 1e-12, fmt("500 trials, max error %.3g", worst)};
}

Result retrieval_convexity() {
  oracle::Rng rng(1003);
  std::uniform_int_distribution<std::size_t> width(1, 8), updates(0, 20);
  double worst_sum = 0.0, worst_hull = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto h = width(rng);
    MemoryPool pool({h, 8, 8, 3}, identity_filter(h));
    pool.init(oracle::random_tensor({h}, rng, -3, 3));
    for (std::size_t u = 0, n = updates(rng); u < n; ++u) pool.update(oracle::random_tensor({h}, rng, -3, 3));
    const auto r = pool.retrieve_detail(oracle::random_tensor({h}, rng, -3, 3));
    for (std::size_t tier = 0; tier < 3; ++tier) {
      double sum = 0.0;
      for (double w : r.weights[tier].values()) sum += w;
      worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
      const auto& bank = pool.bank(static_cast<Tier>(tier));
      for (std::size_t k = 0; k < h; ++k) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& tok : bank.tokens()) lo = std::min(lo, tok[k]), hi = std::max(hi, tok[k]);
        const double v = r.reads[tier][k];
        worst_hull = std::max({worst_hull, lo - v, v - hi});
      }
    }
  }
  return {worst_sum <= 1e-12 && worst_hull <= 1e-12,
          fmt("1000 pools, max |sum W - 1| %.3g, max hull violation %.3g", worst_sum, std::max(0.0, worst_hull))};
}

Result memory_fidelity() {
  auto cfg = parse_run_config(default_config_text());
  cfg.scene.frames = 200;
  const auto seq = synth::generate(cfg.scene);
  Tracker tracker(cfg.tracker, build_params(cfg));
  const auto& mem = cfg.tracker.memory;
  bool caps_ok = mem.short_capacity == 8 && mem.long_capacity == 8 && mem.permanent_capacity == 3;
  bool fifo_ok = true, bounded = true;
  std::vector<Tensor> log;
  std::array<std::size_t, 3> peak{};
  track_sequence(tracker, seq.frames, *seq.ground_truth[0], [&](std::size_t, const Tracker& t) {
    log.push_back(t.cue());  // the token pushed this frame (c0 on frame 0)
    const auto& pool = t.memory();
    const auto sizes = pool.sizes();
    for (std::size_t i = 0; i < 3; ++i) peak[i] = std::max(peak[i], sizes[i]);
    bounded &= sizes[0] <= 8 && sizes[1] <= 8 && sizes[2] <= 3;
    caps_ok &= pool.bank(Tier::kShort).capacity() == 8 && pool.bank(Tier::kLong).capacity() == 8 &&
               pool.bank(Tier::kPermanent).capacity() == 3;
    const auto& st = pool.bank(Tier::kShort);
    const std::size_t expect = std::min<std::size_t>(log.size(), 8);
    if (st.size() != expect) {
      fifo_ok = false;
      return;
    }
    for (std::size_t i = 0; i < expect; ++i) fifo_ok &= st.token(i) == log[log.size() - expect + i];
  });
  // the snapshot written at the last frame records the same bounds
  std::stringstream ss;
  io::write_snapshot(ss, tracker.memory());
  const auto snap = io::read_snapshot(ss);
  caps_ok &= snap.capacities == std::array<std::size_t, 3>{8, 8, 3};
  return {caps_ok && fifo_ok && bounded && peak[0] == 8,
          fmt("200 frames, capacities (8, 8, 3), peak sizes (%g, %g, %g), short tier matches the push log",
              double(peak[0]), double(peak[1]), double(peak[2])) +
              (fifo_ok ? "" : " [FIFO mismatch]")};
}

Result loss_values() {
  const losses::LossConfig cfg;
  const double p = 0.5;
  const int y = 1;
  const double focal = losses::focal_loss({&p, 1}, {&y, 1}, cfg);
  const double reg = losses::regression_loss({0, 0, 1, 1}, {2, 2, 1, 1}, cfg);
  const double same = losses::regression_loss({1.5, 2, 3, 4}, {1.5, 2, 3, 4}, cfg);
  const bool ok = std::fabs(focal - 0.0433217) <= 1e-6 && std::fabs(reg - 23.5556) <= 1e-3 && same == 0.0 &&
                  cfg.lambda1 == 5.0 && cfg.lambda2 == 2.0;
  return {ok, fmt("focal %.7f, regression %.4f, identical boxes %g", focal, reg, same)};
}

Result gradient_fidelity() {
  const losses::LossConfig cfg;
  oracle::Rng rng(1006);
  std::uniform_real_distribution<double> pos(-4, 4), size(0.5, 4), prob(0.05, 0.95);
  const double h = 1e-6;
  double worst = 0.0;
  int configs = 0;
  while (configs < 20) {
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)}, g{pos(rng), pos(rng), size(rng), size(rng)};
    const auto grad = losses::regression_gradient(b, g, cfg);
    // non-degenerate: smooth everywhere and well away from every kink
    if (!grad.differentiable() || std::fabs(b.x - g.x) < 1e-3 || std::fabs(b.y - g.y) < 1e-3 ||
        std::fabs(b.w - g.w) < 1e-3 || std::fabs(b.h - g.h) < 1e-3) {
      continue;
    }
    ++configs;
    auto rel = [](double a, double fd) { return std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-300}); };
    for (int k = 0; k < 4; ++k) {
      auto f = [&](double v) {
        BoundingBox bb = b;
        double* fields[] = {&bb.x, &bb.y, &bb.w, &bb.h};
        *fields[k] = v;
        return losses::regression_loss(bb, g, cfg);
      };
      const double x0 = k == 0 ? b.x : k == 1 ? b.y : k == 2 ? b.w : b.h;
      worst = std::max(worst, rel(grad.d[k], oracle::central_difference(f, x0, h)));
    }
    const double pt = prob(rng);
    const double fd = oracle::central_difference([&](double x) { return losses::focal_term(x, cfg); }, pt, h);
    worst = std::max(worst, rel(losses::focal_gradient(pt, cfg), fd));
  }
  return {worst <= 1e-5, fmt("20 configurations, max relative error %.3g", worst)};
}

std::vector<std::optional<BoundingBox>> grid_boxes(int extent) {
  std::vector<std::optional<BoundingBox>> out{std::nullopt};
  for (int x = 0; x < extent; ++x)
    for (int y = 0; y < extent; ++y)
      for (int w = 1; x + w <= extent; ++w)
        for (int hh = 1; y + hh <= extent; ++hh) out.push_back(BoundingBox{double(x), double(y), double(w), double(hh)});
  return out;
}

Result metric_oracles() {
  const bool quiet = warnings_silenced();
  set_warnings_silenced(true);
  std::size_t cases = 0, mismatches = 0;
  auto compare = [&](const metrics::BoxSequence& res, const metrics::BoxSequence& gt, double pr_t, double sr_t) {
    bool visible = false;
    for (const auto& g : gt) visible |= g.has_value();
    if (!visible) return;
    ++cases;
    const auto want = oracle::metrics_bruteforce(res, gt, pr_t, sr_t);
    const auto lt = metrics::precision_recall_f(res, gt);
    const double got[] = {metrics::precision_rate(res, gt, pr_t), metrics::success_rate(res, gt, sr_t), lt.precision,
                          lt.recall, lt.f_score};
    const double ref[] = {want.pr, want.sr, want.pre, want.re, want.f};
    for (int i = 0; i < 5; ++i) mismatches += std::fabs(got[i] - ref[i]) > 1e-12;
  };
  // exhaustive: every sequence of length <= 2 over the 2x2 grid (plus absent)
  const auto small = grid_boxes(2);
  for (double sr_t : {0.0, 0.25, 0.5})
    for (const auto& a : small)
      for (const auto& b : small) {
        compare({a}, {b}, 1.0, sr_t);
        for (const auto& c : small)
          for (const auto& d : small) compare({a, c}, {b, d}, 1.0, sr_t);
      }
  // sampled: lengths 1..6 over the 4x4 grid
  const auto big = grid_boxes(4);
  oracle::Rng rng(1007);
  std::uniform_int_distribution<std::size_t> pick(0, big.size() - 1), len(1, 6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20000; ++i) {
    metrics::BoxSequence res, gt;
    for (std::size_t t = 0, n = len(rng); t < n; ++t) {
      res.push_back(big[pick(rng)]);
      gt.push_back(big[pick(rng)]);
    }
    compare(res, gt, 0.5 + 4 * u(rng), u(rng));
  }
  const BoundingBox g{0, 0, 10, 10};
  const auto crafted =
      metrics::precision_recall_f({std::nullopt, BoundingBox{0, 0, 5, 10}, g, BoundingBox{2, 2, 3, 3}}, {g, g, g, std::nullopt});
  const bool crafted_ok = crafted.precision == 0.5 && crafted.recall == 0.5 && crafted.f_score == 0.5;
  const bool default_ok = metrics::kDefaultPrThreshold == 20.0 && metrics::Report{}.pr_threshold == 20.0;
  set_warnings_silenced(quiet);
  return {mismatches == 0 && crafted_ok && default_ok && cases >= 10000,
          fmt("%g cases, %g mismatches; 4-frame case Pre=Re=F=%g; default PR threshold 20", double(cases),
              double(mismatches), crafted.f_score)};
}

Result adapter_off() {
  const auto cfg = parse_run_config(default_config_text());
  const auto seq = synth::generate(cfg.scene);
  auto base_cfg = cfg.tracker;
  base_cfg.adapters = false;
  const auto params = with_zero_adapters(build_params(cfg), cfg.tracker);
  Tracker zeroed(cfg.tracker, params), baseline(base_cfg, params);
  const auto a = track_sequence(zeroed, seq.frames, *seq.ground_truth[0]);
  const auto b = track_sequence(baseline, seq.frames, *seq.ground_truth[0]);
  std::size_t differing = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    differing += std::memcmp(&a[t], &b[t], sizeof(BoundingBox)) != 0;
  }
  return {differing == 0 && a.size() == 64, fmt("%g frames, %g differ bitwise", double(a.size()), double(differing))};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Result determinism(const fs::path& work) {
  auto cfg = parse_run_config(default_config_text());
  cfg.output_dir = work / "det_a";
  execute_run(cfg);
  cfg.output_dir = work / "det_b";
  execute_run(cfg);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "det_a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), work / "det_a");
    differing += slurp(e.path()) != slurp(work / "det_b" / rel);
  }
  return {files >= 6 && differing == 0, fmt("%g files compared, %g differ", double(files), double(differing))};
}

Result end_to_end(const fs::path& work) {
  auto cfg = parse_run_config(default_config_text());
  cfg.output_dir = work / "smoke";
  const bool shape_ok = cfg.scene.frames == 64 && cfg.tracker.encoder.layers == 4 && cfg.tracker.encoder.dim == 64 &&
                        cfg.scene.width == 64 && cfg.scene.height == 64;
  const auto t0 = Clock::now();
  const auto results = execute_run(cfg);  // tracker asserts its runtime invariants every frame
  const double secs = seconds_since(t0);
  const auto boxes = io::load_boxes(cfg.output_dir / "seq_000" / "boxes.txt");
  return {shape_ok && secs < 10.0 && boxes.size() == 64,
          fmt("64 frames, L=4, H=64 in %.2f s, SR-AUC %.3f", secs, results[0].report.success_auc)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "vmda_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"frequency reconstruction", frequency_reconstruction},
      {"attention oracle", attention_oracle},
      {"retrieval normalization and convexity", retrieval_convexity},
      {"memory configuration fidelity", memory_fidelity},
      {"loss values", loss_values},
      {"gradient fidelity", gradient_fidelity},
      {"metric oracles", metric_oracles},
      {"adapter-off equivalence", adapter_off},
      {"determinism", [&] { return determinism(work); }},
      {"end-to-end smoke", [&] { return end_to_end(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2zu %s: %s\n", r.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failed += !r.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
