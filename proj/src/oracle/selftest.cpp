#include "oracle/selftest.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "oracle/oracle.hpp"
#include "vmda/encoder.hpp"
#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/losses.hpp"
#include "vmda/memory.hpp"
#include "vmda/ops.hpp"
#include "vmda/run.hpp"
#include "vmda/synthgen.hpp"
#include "vmda/tokens.hpp"
#include "vmda/tracker.hpp"

namespace vmda::selftest {
namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

void near(double got, double want, double tol, const std::string& what) {
  if (!(std::fabs(got - want) <= tol)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    throw Failure(os.str());
  }
}

template <class Fn>
void expect_throw(Fn&& fn, const std::string& what) {
  try {
    fn();
  } catch (const std::exception&) {
    return;
  }
  throw Failure(what + ": no error raised");
}

double max_diff(const oracle::Map& a, const Tensor& b) {
  return max_abs_diff(oracle::from_map(a), b);
}

double max_diff(const oracle::Mat& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::fabs(a[i][j] - b.at(i, j)));
  return m;
}

Tensor vec(std::initializer_list<double> v) { return Tensor(std::vector<double>(v)); }

using metrics::BoxSequence;

std::vector<Check> build() {
  std::vector<Check> c;
  auto oracle = [&](std::string n, std::function<void()> f) { c.push_back({std::move(n), true, std::move(f)}); };
  auto property = [&](std::string n, std::function<void()> f) { c.push_back({std::move(n), false, std::move(f)}); };

  oracle("ops.softmax", [] {
    const auto s = ops::softmax(vec({0.0, std::log(2.0)}), 0);
    near(s[0], 1.0 / 3.0, 1e-15, "softmax[0]");
    near(s[1], 2.0 / 3.0, 1e-15, "softmax[1]");
    oracle::Rng rng(1);
    const auto x = oracle::random_tensor({7}, rng, -5, 5);
    const auto want = oracle::softmax_direct(x.vec());
    const auto got = ops::softmax(x, 0);
    for (std::size_t i = 0; i < 7; ++i) near(got[i], want[i], 1e-15, "softmax random");
  });
  oracle("ops.conv2d", [] {
    ConvParams p{Tensor::full({1, 1, 3, 3}, 1.0), Tensor::zeros({1}), 1, 1};
    near(ops::conv2d(Tensor::full({1, 5, 5}, 1.0), p).at(0, 2, 2), 9.0, 0.0, "interior pixel");
    oracle::Rng rng(2);
    for (std::size_t stride : {1, 2}) {
      auto q = oracle::random_conv(3, 2, 3, rng);
      q.stride = stride;
      const auto x = oracle::random_tensor({2, 6, 7}, rng);
      near(max_diff(oracle::conv2d_naive(oracle::to_map(x), q.kernel, q.bias, stride, 1), ops::conv2d(x, q)),
           0.0, 1e-13, "conv random");
    }
  });
  oracle("ops.avg_pool2d", [] {
    near(ops::avg_pool2d(Tensor({1, 2, 2}, {1, 2, 3, 4}), 2, 2)[0], 2.5, 0.0, "2x2 mean");
    oracle::Rng rng(3);
    const auto x = oracle::random_tensor({2, 8, 6}, rng);
    near(max_diff(oracle::avg_pool_naive(oracle::to_map(x), 2, 2), ops::avg_pool2d(x, 2, 2)), 0.0, 1e-15,
         "pool random");
  });
  oracle("ops.global_avg_pool", [] {
    near(ops::global_avg_pool(Tensor({1, 2, 2}, {1, 2, 3, 4}))[0], 2.5, 0.0, "channel mean");
  });
  oracle("ops.linear", [] {
    const auto y = ops::linear(vec({1, 1}), {Tensor({2, 2}, {1, 2, 3, 4}), Tensor::zeros({2})});
    expect(y[0] == 3.0 && y[1] == 7.0, "W x + b");
  });
  oracle("ops.sigmoid", [] {
    near(ops::sigmoid(std::log(3.0)), 0.75, 1e-15, "sigmoid(ln 3)");
    near(ops::sigmoid(0.0), 0.5, 0.0, "sigmoid(0)");
    for (double x : {-3.0, -0.2, 0.7, 4.0}) near(ops::sigmoid(x), oracle::sigmoid_direct(x), 1e-15, "sigmoid");
  });
  oracle("ops.gelu", [] {
    near(ops::gelu(1.0), 0.841345, 1e-6, "gelu(1)");
    near(ops::gelu(10.0) - 10.0, 0.0, 1e-9, "gelu asymptote");
    for (double x : {-2.5, -0.3, 0.4, 1.7}) near(ops::gelu(x), oracle::gelu_quadrature(x), 1e-12, "gelu");
  });
  oracle("freq.decompose", [] {
    const auto p = freq::neutral_params(1, 1);
    const auto pair = freq::decompose(Tensor({1, 1, 1}, {0.7}), p);
    expect(pair.high[0] == 0.7 && pair.low[0] == 0.0, "single position: high = f, low = 0");
    oracle::Rng rng(4);
    const auto q = oracle::random_freq(3, 2, 3, rng);
    const auto f = oracle::random_tensor({3, 8, 8}, rng);
    const auto tr = oracle::frequency_select_trace(oracle::to_map(f), q);
    const auto got = freq::decompose(f, q);
    near(max_diff(tr.high, got.high), 0.0, 1e-13, "high vs trace");
    near(max_diff(tr.low, got.low), 0.0, 1e-13, "low vs trace");
  });
  oracle("freq.select_fuse", [] {
    oracle::Rng rng(5);
    auto p = freq::neutral_params(2, 2);
    p.fc_high.bias = Tensor::full({2}, 20.0);
    p.fc_low.bias = Tensor::full({2}, -20.0);
    const auto f = oracle::random_tensor({2, 4, 4}, rng);
    const auto pair = freq::decompose(f, p);
    near(max_abs_diff(freq::select_fuse(pair, p), pair.high), 0.0, 1e-8, "saturated gates");
    const auto q = oracle::random_freq(2, 2, 1, rng);
    near(max_diff(oracle::frequency_select_trace(oracle::to_map(f), q).fused, freq::frequency_select(f, q)), 0.0,
         1e-13, "fused vs trace");
  });
  oracle("fusion.fmfm", [] {
    oracle::Rng rng(6);
    for (int trial = 0; trial < 5; ++trial) {
      const auto p = oracle::random_fmfm(1, 2, 1, rng);
      const auto a = oracle::random_tensor({1, 2, 2}, rng), b = oracle::random_tensor({1, 2, 2}, rng);
      near(max_diff(oracle::fmfm_trace(oracle::to_map(a), oracle::to_map(b), p), fusion::fmfm(a, b, p)), 0.0,
           1e-13, "1-channel 2x2 trace");
    }
    const auto p = oracle::random_mfm(3, 3, rng);
    const auto a = oracle::random_tensor({3, 4, 4}, rng), b = oracle::random_tensor({3, 4, 4}, rng);
    near(max_diff(oracle::mfm_trace(oracle::to_map(a), oracle::to_map(b), p), fusion::mfm(a, b, p)), 0.0, 1e-13,
         "mfm 3-channel trace");
  });
  oracle("fusion.inject", [] {
    oracle::Rng rng(7);
    const auto search = oracle::random_tensor({4, 3}, rng), tmpl = oracle::random_tensor({1, 3}, rng);
    const auto seq = TokenSequence::assemble(search, {tmpl}, oracle::random_tensor({3}, rng));
    const auto fused = oracle::random_tensor({3, 2, 2}, rng);
    const auto out = fusion::inject(fused, seq, 0);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t h = 0; h < 3; ++h)
        expect(out.tokens().at(i, h) == search.at(i, h) + fused.at(h, i / 2, i % 2), "region sum");
    expect(out.region_tokens(1) == seq.region_tokens(1) && out.cue() == seq.cue(), "other regions untouched");
  });
  oracle("memory.attn_update", [] {
    MemoryBank target(8, 2), source(8, 2);
    target.push(vec({1, 0}));
    source.push(vec({1, 0}));
    source.push(vec({0, 1}));
    attn_update(target, source);
    const double w0 = 1.0 / (1.0 + std::exp(-1.0 / std::sqrt(2.0)));
    near(target.token(0)[0], 1.0 + w0, 1e-15, "delta x");
    near(target.token(0)[1], 1.0 - w0, 1e-15, "delta y");
    near(w0, 0.6698, 1e-4, "softmax(1/sqrt2, 0)");
  });
  oracle("memory.update", [] {
    oracle::Rng rng(8);
    const auto c0 = oracle::random_tensor({2}, rng);
    MemoryPool pool({2, 8, 8, 3}, identity_filter(2));
    oracle::DensePool dense(8, 8, 3);
    pool.init(c0);
    dense.init(c0.vec());
    for (int step = 0; step < 3; ++step) {
      const auto c = oracle::random_tensor({2}, rng);
      pool.update(c);
      dense.update(c.vec());
    }
    for (std::size_t t = 0; t < 3; ++t)
      near(max_diff(dense.tiers()[t], pool.bank(static_cast<Tier>(t)).matrix()), 0.0, 1e-14, "tier replay");
  });
  oracle("memory.retrieve", [] {
    MemoryPool pool({2, 8, 8, 3}, identity_filter(2));
    pool.init(vec({2, 0}));
    pool.push_short(vec({0, 2}));
    const auto r = pool.retrieve_detail(vec({1, 0}));
    const double w = 1.0 / (1.0 + std::exp(-2.0));
    near(r.weights[0][0], w, 1e-15, "W_s[0]");
    near(r.weights[0][0], 0.8808, 1e-4, "W_s[0] rounded");
    near(r.reads[0][0], 2 * w, 1e-15, "C_s x");
    near(r.reads[0][1], 2 * (1 - w), 1e-15, "C_s y");
  });
  oracle("memory.filter", [] {
    oracle::Rng rng(9);
    FilterParams f{oracle::random_linear(2, 4, rng), oracle::random_linear(4, 2, rng), 2};
    MemoryPool pool({4, 8, 8, 3}, f);
    const auto c = oracle::random_tensor({4}, rng);
    const auto want = oracle::filter_naive(c.vec(), oracle::to_mat(f.down.weight), f.down.bias.vec(),
                                           oracle::to_mat(f.up.weight), f.up.bias.vec());
    const auto got = pool.filter(c);
    for (std::size_t i = 0; i < 4; ++i) near(got[i], want[i], 1e-12, "filter");
  });
  oracle("encoder.patch_embed", [] {
    const auto img = Tensor({1, 2, 2}, {1, 2, 3, 4});
    const auto t = patch_embed(img, 1, identity_linear(1));
    expect(t.shape() == Shape{4, 1} && t[0] == 1 && t[1] == 2 && t[2] == 3 && t[3] == 4, "patch 1 identity");
    oracle::Rng rng(10);
    const auto x = oracle::random_tensor({2, 8, 8}, rng);
    const auto proj = oracle::random_linear(5, 2 * 4 * 4, rng);
    near(max_diff(oracle::patch_embed_naive(oracle::to_map(x), 4, oracle::to_mat(proj.weight), proj.bias.vec()),
                  patch_embed(x, 4, proj)),
         0.0, 1e-14, "patchify random");
  });
  oracle("losses.focal", [] {
    const double p = 0.5;
    const int y = 1;
    near(losses::focal_loss({&p, 1}, {&y, 1}, {}), 0.25 * 0.25 * std::log(2.0), 1e-15, "focal");
    near(losses::focal_loss({&p, 1}, {&y, 1}, {}), 0.0433217, 1e-6, "focal rounded");
    for (double pt : {0.1, 0.7, 0.99})
      near(losses::focal_term(pt, {}), oracle::focal_direct(pt, 0.25, 2.0), 1e-15, "focal term");
  });
  oracle("losses.regression", [] {
    const BoundingBox b{0, 0, 1, 1}, g{2, 2, 1, 1};
    near(giou(b, g), -7.0 / 9.0, 1e-15, "giou");
    near(losses::regression_loss(b, g, {}), 20.0 + 32.0 / 9.0, 1e-12, "loss");
    near(losses::regression_loss(b, g, {}), 23.5556, 1e-3, "loss rounded");
    expect(losses::regression_loss(b, b, {}) == 0.0, "identical boxes");
    const BoundingBox u{1.3, 0.2, 2.5, 1.1}, v{0.4, 0.9, 1.7, 3.2};
    near(losses::regression_loss(u, v, {}), oracle::regression_direct(u, v, 5, 2), 1e-12, "random pair");
  });
  oracle("losses.total", [] {
    const losses::ClassificationInputs cls{{0.3, 0.8}, {1, 0}};
    const std::vector<losses::BoxPair> reg{{{1, 1, 2, 2}, {1.5, 0.5, 2, 3}}};
    const double want = oracle::focal_direct(0.3, 0.25, 2) + oracle::focal_direct(0.2, 0.25, 2) +
                        oracle::regression_direct(reg[0].predicted, reg[0].truth, 5, 2);
    near(losses::total_loss(cls, reg, {}), want, 1e-12, "sum of parts");
    expect(losses::total_loss({}, {}, {}) == 0.0, "empty inputs");
  });
  oracle("losses.gradients", [] {
    const BoundingBox b{1.1, 0.7, 2.3, 1.9}, g{0.8, 1.2, 2.0, 2.4};
    const auto grad = losses::regression_gradient(b, g, {});
    expect(grad.differentiable(), "smooth point");
    for (int k = 0; k < 4; ++k) {
      auto f = [&](double v) {
        auto bb = b;
        (k == 0 ? bb.x : k == 1 ? bb.y : k == 2 ? bb.w : bb.h) = v;
        return oracle::regression_direct(bb, g, 5, 2);
      };
      const double x0 = k == 0 ? b.x : k == 1 ? b.y : k == 2 ? b.w : b.h;
      const double fd = oracle::central_difference(f, x0, 1e-6);
      near(grad.d[k], fd, 1e-5 * std::max(1.0, std::fabs(fd)), "d/d box");
    }
    const double fd = oracle::central_difference([](double p) { return oracle::focal_direct(p, 0.25, 2); }, 0.35, 1e-6);
    near(losses::focal_gradient(0.35, {}), fd, 1e-5 * std::fabs(fd), "d/dp_t");
  });
  oracle("box.iou", [] {
    near(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 1.0 / 3.0, 1e-15, "area arithmetic");
    near(iou({0, 0, 3, 2}, {1, 1, 3, 3}), oracle::iou_raster({0, 0, 3, 2}, {1, 1, 3, 3}), 1e-15, "raster");
  });
  oracle("metrics.precision_rate", [] {
    BoxSequence gt(4, BoundingBox{0, 0, 10, 10}), res;
    for (double e : {5.0, 25.0, 10.0, 30.0}) res.push_back(BoundingBox{e, 0, 10, 10});
    near(metrics::precision_rate(res, gt), 0.5, 0.0, "center errors");
  });
  oracle("metrics.success_rate", [] {
    BoxSequence gt(3, BoundingBox{0, 0, 10, 10}), res;
    for (double w : {2.0, 6.0, 8.0}) res.push_back(BoundingBox{0, 0, w, 10});
    near(metrics::success_rate(res, gt, 0.5), 2.0 / 3.0, 1e-15, "iou count");
  });
  oracle("metrics.precision_recall_f", [] {
    const BoundingBox g{0, 0, 10, 10};
    const BoxSequence gt{g, g, g, std::nullopt};
    const BoxSequence res{std::nullopt, BoundingBox{0, 0, 5, 10}, g, BoundingBox{3, 3, 4, 4}};
    const auto s = metrics::precision_recall_f(res, gt);
    expect(s.precision == 0.5 && s.recall == 0.5 && s.f_score == 0.5, "Pre = Re = F = 0.5");
    const auto m = oracle::metrics_bruteforce(res, gt, 20, 0.5);
    expect(m.pre == 0.5 && m.re == 0.5 && m.f == 0.5, "brute force agrees");
  });
  oracle("synth.generate", [] {
    synth::SceneConfig cfg;
    cfg.frames = 10;
    cfg.path = {synth::PathKind::kLinear, 10, 20, 1, 0};
    cfg.noise_rgb = cfg.noise_aux = 0;
    const auto seq = synth::generate(cfg);
    for (std::size_t t = 1; t < 10; ++t) {
      expect(seq.ground_truth[t]->center_x() - seq.ground_truth[t - 1]->center_x() == 1.0, "1 px per frame");
      expect(seq.ground_truth[t]->center_y() == seq.ground_truth[0]->center_y(), "y fixed");
    }
  });
  oracle("cli.eval", [] {
    std::istringstream pred("0 absent\n1 0 0 5 10\n2 0 0 10 10\n3 3 3 4 4\n");
    std::istringstream truth("0 0 0 10 10\n1 0 0 10 10\n2 0 0 10 10\n3 absent\n");
    const auto r = metrics::evaluate(io::read_boxes(pred), io::read_boxes(truth));
    expect(r.pr_threshold == 20.0, "default PR threshold");
    expect(r.long_term.f_score == 0.5, "F = 0.5 from box files");
  });

  property("ops.softmax.normalized", [] {
    oracle::Rng rng(11);
    for (int i = 0; i < 50; ++i) {
      const auto s = ops::softmax(oracle::random_tensor({3, 9}, rng, -30, 30), 1);
      for (std::size_t r = 0; r < 3; ++r) {
        double sum = 0;
        for (std::size_t j = 0; j < 9; ++j) sum += s.at(r, j);
        near(sum, 1.0, 1e-12, "row sum");
      }
    }
  });
  property("ops.sigmoid.symmetry", [] {
    for (double x : {0.1, 1.3, 7.0}) near(ops::sigmoid(-x), 1.0 - ops::sigmoid(x), 1e-15, "sigmoid(-x)");
  });
  property("freq.reconstruction", [] {
    oracle::Rng rng(12);
    for (int i = 0; i < 50; ++i) {
      const auto p = oracle::random_freq(4, 2, 3, rng);
      const auto f = oracle::random_tensor({4, 8, 8}, rng, -10, 10);
      const auto pair = freq::decompose(f, p);
      near(max_abs_diff(ops::add(pair.high, pair.low), f), 0.0, 1e-12, "high + low");
    }
  });
  property("memory.retrieve.convex", [] {
    oracle::Rng rng(13);
    MemoryPool pool({4, 8, 8, 3}, identity_filter(4));
    pool.init(oracle::random_tensor({4}, rng));
    for (int i = 0; i < 12; ++i) pool.update(oracle::random_tensor({4}, rng));
    const auto r = pool.retrieve_detail(oracle::random_tensor({4}, rng, -3, 3));
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& bank = pool.bank(static_cast<Tier>(t));
      double sum = 0;
      for (double w : r.weights[t].values()) sum += w;
      near(sum, 1.0, 1e-12, "weights sum");
      for (std::size_t h = 0; h < 4; ++h) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& tok : bank.tokens()) lo = std::min(lo, tok[h]), hi = std::max(hi, tok[h]);
        expect(r.reads[t][h] >= lo - 1e-12 && r.reads[t][h] <= hi + 1e-12, "read inside hull");
      }
    }
  });
  property("memory.capacity_fifo", [] {
    oracle::Rng rng(14);
    MemoryPool pool({3, 8, 8, 3}, identity_filter(3));
    pool.init(Tensor::zeros({3}));
    std::vector<Tensor> log;
    for (int i = 0; i < 200; ++i) {
      log.push_back(oracle::random_tensor({3}, rng));
      pool.update(log.back());
      const auto s = pool.sizes();
      expect(s[0] <= 8 && s[1] <= 8 && s[2] <= 3, "tier sizes bounded");
    }
    const auto& st = pool.bank(Tier::kShort);
    for (std::size_t i = 0; i < 8; ++i) expect(st.token(i) == log[192 + i], "short tier order");
  });
  property("memory.init_contract", [] {
    MemoryPool pool({2, 8, 8, 3}, identity_filter(2));
    pool.init(vec({1, 2}));
    expect(pool.sizes() == std::array<std::size_t, 3>{1, 1, 1}, "sizes (1,1,1)");
    const auto r = pool.retrieve(vec({5, -1}));
    expect(r[0] == 3.0 && r[1] == 6.0, "retrieve = 3 c0");
    expect_throw([&] { pool.init(vec({1, 2})); }, "double init");
    expect_throw([&] { pool.push_short(vec({1, 2, 3})); }, "width mismatch");
  });
  property("tokens.cue_slot", [] {
    const auto seq = TokenSequence::assemble(Tensor::zeros({4, 2}), {Tensor::zeros({1, 2})}, vec({1, 1}));
    expect(seq.cue_slot_count() == 1 && seq.cue()[0] == 1.0, "one cue slot");
    expect_throw([&] { fusion::inject(Tensor::zeros({2, 1, 1}), seq, seq.cue_region()); }, "inject into cue");
  });
  property("io.round_trip", [] {
    const BoxSequence boxes{BoundingBox{0.1, 1.0 / 3.0, 2, 1e-7}, std::nullopt};
    std::stringstream ss;
    io::write_boxes(ss, boxes);
    expect(io::read_boxes(ss) == boxes, "box file");
    MemoryPool pool({2, 8, 8, 3}, identity_filter(2));
    pool.init(vec({0.1, -0.7}));
    pool.update(vec({1.0 / 7.0, 3}));
    std::stringstream snap;
    io::write_snapshot(snap, pool);
    expect(io::restore_pool(io::read_snapshot(snap), pool.config(), identity_filter(2)).bank(Tier::kLong) ==
               pool.bank(Tier::kLong),
           "snapshot");
  });
  property("synth.determinism", [] {
    synth::SceneConfig cfg;
    cfg.frames = 4;
    const auto a = synth::generate(cfg), b = synth::generate(cfg);
    for (std::size_t t = 0; t < 4; ++t) expect(a.frames[t].rgb == b.frames[t].rgb, "same seed, same frames");
  });
  property("tracker.adapter_off", [] {
    auto cfg = parse_run_config(default_config_text());
    cfg.scene.frames = 6;
    auto seq = synth::generate(cfg.scene);
    auto base_cfg = cfg.tracker;
    base_cfg.adapters = false;
    const auto params = with_zero_adapters(random_params(cfg.tracker, cfg.seed), cfg.tracker);
    Tracker on(cfg.tracker, params), off(base_cfg, params);
    const auto a = track_sequence(on, seq.frames, *seq.ground_truth[0]);
    const auto b = track_sequence(off, seq.frames, *seq.ground_truth[0]);
    expect(a == b, "zeroed adapters leave boxes unchanged");
  });
  property("config.validation", [] {
    parse_run_config(default_config_text()).validate();
    expect_throw([] { parse_run_config("[memory]\nfilter_ratio = 3\n").validate(); }, "non-divisor filter ratio");
    expect_throw([] { parse_run_config("[encoder]\ndepth = 3\n"); }, "unknown key");
  });
  return c;
}

}  // namespace

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = build();
  return checks;
}

std::size_t oracle_count() {
  std::size_t n = 0;
  for (const auto& c : registry()) n += c.oracle;
  return n;
}

std::vector<Outcome> run_all(const std::optional<std::filesystem::path>& config) {
  std::vector<Outcome> out;
  const bool quiet = warnings_silenced();
  set_warnings_silenced(true);
  auto run = [&](const std::string& name, bool is_oracle, const std::function<void()>& body) {
    Outcome o{name, is_oracle, false, ""};
    try {
      body();
      o.passed = true;
    } catch (const std::exception& e) {
      o.detail = e.what();
    }
    out.push_back(std::move(o));
  };
  if (config) run("config", false, [&] { load_run_config(*config).validate(); });
  for (const auto& c : registry()) run(c.name, c.oracle, c.body);
  set_warnings_silenced(quiet);
  return out;
}

}  // namespace vmda::selftest
