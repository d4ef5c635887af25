#include <doctest.h>

#include <cmath>

#include "oracle/oracle.hpp"
#include "vmda/errors.hpp"
#include "vmda/metrics.hpp"

using namespace vmda;
using namespace vmda::metrics;

TEST_CASE("iou arithmetic") {
  CHECK(iou({0, 0, 2, 2}, {1, 0, 2, 2}) == doctest::Approx(1.0 / 3));
  CHECK(iou({0, 0, 1, 1}, {5, 5, 1, 1}) == 0.0);
  CHECK(iou({0, 0, 1, 1}, {1, 0, 1, 1}) == 0.0);  // touching edges
  CHECK(iou({2, 3, 4, 5}, {2, 3, 4, 5}) == 1.0);
  CHECK_THROWS_AS(iou({0, 0, -1, 1}, {0, 0, 1, 1}), ArgumentError);
  oracle::Rng rng(61);
  std::uniform_int_distribution<int> c(0, 6), s(1, 5);
  for (int i = 0; i < 200; ++i) {
    const BoundingBox a{double(c(rng)), double(c(rng)), double(s(rng)), double(s(rng))};
    const BoundingBox b{double(c(rng)), double(c(rng)), double(s(rng)), double(s(rng))};
    CHECK(iou(a, b) == doctest::Approx(oracle::iou_raster(a, b)).epsilon(1e-14));
    CHECK(iou(a, b) == iou(b, a));
  }
}

TEST_CASE("threshold boundaries are strict") {
  const BoxSequence gt{BoundingBox{0, 0, 10, 10}};
  CHECK(precision_rate({BoundingBox{20, 0, 10, 10}}, gt) == 0.0);
  CHECK(precision_rate({BoundingBox{19.5, 0, 10, 10}}, gt) == 1.0);
  CHECK(success_rate({BoundingBox{0, 0, 5, 10}}, gt, 0.5) == 0.0);
  CHECK(success_rate({BoundingBox{0, 0, 5, 10}}, gt, 0.49) == 1.0);
}

TEST_CASE("perfect tracking") {
  const BoxSequence gt{BoundingBox{0, 0, 4, 4}, std::nullopt, BoundingBox{1, 1, 3, 3}};
  const auto r = evaluate(gt, gt);
  CHECK(r.precision_rate == 1.0);
  CHECK(r.success_rate == 1.0);
  CHECK(r.success_auc == doctest::Approx(20.0 / 21.0));
  CHECK(r.long_term.precision == 1.0);
  CHECK(r.long_term.recall == 1.0);
  CHECK(r.long_term.f_score == 1.0);
  CHECK(success_curve(gt, gt).size() == kAucThresholds);
}

TEST_CASE("degenerate inputs") {
  set_warnings_silenced(true);
  const BoxSequence gt{BoundingBox{0, 0, 4, 4}, BoundingBox{0, 0, 4, 4}};
  const BoxSequence none{std::nullopt, std::nullopt};
  const auto s = precision_recall_f(none, gt);
  CHECK(s.precision == 0.0);
  CHECK(s.recall == 0.0);
  CHECK(s.f_score == 0.0);
  CHECK(s.degenerate);
  CHECK(precision_rate(none, gt) == 0.0);
  CHECK_THROWS_AS(precision_rate(gt, none), ArgumentError);
  CHECK_THROWS_AS(precision_rate({}, {}), ArgumentError);
  CHECK_THROWS_AS(evaluate(gt, BoxSequence{gt[0]}), ArgumentError);
  set_warnings_silenced(false);
}

namespace {

// Every box on a small integer grid.
std::vector<std::optional<BoundingBox>> grid_boxes(int extent) {
  std::vector<std::optional<BoundingBox>> out{std::nullopt};
  for (int x = 0; x < extent; ++x)
    for (int y = 0; y < extent; ++y)
      for (int w = 1; x + w <= extent; ++w)
        for (int h = 1; y + h <= extent; ++h) out.push_back(BoundingBox{double(x), double(y), double(w), double(h)});
  return out;
}

void compare(const BoxSequence& res, const BoxSequence& gt, double pr_t, double sr_t) {
  bool visible = false;
  for (const auto& g : gt) visible |= g.has_value();
  if (!visible) return;
  const auto want = oracle::metrics_bruteforce(res, gt, pr_t, sr_t);
  CHECK(precision_rate(res, gt, pr_t) == doctest::Approx(want.pr).epsilon(1e-14));
  CHECK(success_rate(res, gt, sr_t) == doctest::Approx(want.sr).epsilon(1e-14));
  const auto lt = precision_recall_f(res, gt);
  CHECK(lt.precision == doctest::Approx(want.pre).epsilon(1e-14));
  CHECK(lt.recall == doctest::Approx(want.re).epsilon(1e-14));
  CHECK(lt.f_score == doctest::Approx(want.f).epsilon(1e-14));
}

}  // namespace

TEST_CASE("metrics against brute-force counting, exhaustive pairs on a 2x2 grid") {
  set_warnings_silenced(true);
  const auto boxes = grid_boxes(2);  // 9 boxes plus absent
  for (const auto& a : boxes)
    for (const auto& b : boxes)
      for (const auto& c : boxes)
        for (const auto& d : boxes) compare({a, b}, {c, d}, 1.0, 0.3);
  set_warnings_silenced(false);
}

TEST_CASE("metrics against brute-force counting, sampled sequences on a 4x4 grid") {
  set_warnings_silenced(true);
  const auto boxes = grid_boxes(4);
  oracle::Rng rng(62);
  std::uniform_int_distribution<std::size_t> pick(0, boxes.size() - 1), len(1, 6);
  std::uniform_real_distribution<double> thr(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const auto n = len(rng);
    BoxSequence res, gt;
    for (std::size_t t = 0; t < n; ++t) {
      res.push_back(boxes[pick(rng)]);
      gt.push_back(boxes[pick(rng)]);
    }
    compare(res, gt, 1 + 3 * thr(rng), thr(rng));
  }
  set_warnings_silenced(false);
}
