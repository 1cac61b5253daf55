#include <cmath>
#include <vector>

#include "doctest.h"
#include "trimdie/checks.hpp"
#include "trimdie/detmath.hpp"
#include "trimdie/error.hpp"
#include "trimdie/rng.hpp"

using namespace trimdie;

namespace {

// test-local suppression oracle, kept independent of detmath::nms
std::vector<std::size_t> oracle_nms(const std::vector<Box>& boxes,
                                    const std::vector<double>& scores, double thr) {
  std::vector<bool> gone(boxes.size(), false);
  std::vector<std::size_t> kept;
  for (;;) {
    std::size_t best = boxes.size();
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (!gone[i] && (best == boxes.size() || scores[i] > scores[best])) best = i;
    if (best == boxes.size()) break;
    kept.push_back(best);
    gone[best] = true;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (gone[i]) continue;
      const double ix = std::max(0.0, std::min(boxes[i].x2(), boxes[best].x2()) -
                                          std::max(boxes[i].x1(), boxes[best].x1()));
      const double iy = std::max(0.0, std::min(boxes[i].y2(), boxes[best].y2()) -
                                          std::max(boxes[i].y1(), boxes[best].y1()));
      const double inter = ix * iy;
      if (inter / (boxes[i].area() + boxes[best].area() - inter) > thr) gone[i] = true;
    }
  }
  return kept;
}

}  // namespace

TEST_CASE("iou basic cases") {
  Box a{1.0, 1.0, 2.0, 2.0};
  CHECK(iou(a, a) == 1.0);

  Box far{100.0, 100.0, 2.0, 2.0};
  CHECK(iou(a, far) == 0.0);

  // corner boxes given as x,y,w,h
  Box c1 = Box::from_xywh(0, 0, 2, 2);
  Box c2 = Box::from_xywh(1, 1, 2, 2);
  CHECK(iou(c1, c2) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));

  CHECK_THROWS_AS(iou(Box{0, 0, 0, 1}, a), ParameterError);
}

TEST_CASE("iou symmetry and range over random boxes") {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    Box a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 20), rng.uniform(1, 20)};
    Box b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 20), rng.uniform(1, 20)};
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("nms basic cases") {
  Box a{10, 10, 4, 4};
  CHECK(nms({a}, {0.5}, 0.5) == std::vector<std::size_t>{0});

  // full overlap suppresses the lower score
  CHECK(nms({a, a}, {0.9, 0.8}, 0.5) == std::vector<std::size_t>{0});
  // tie broken by lower original index
  CHECK(nms({a, a}, {0.7, 0.7}, 0.5) == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(nms({a}, {0.5, 0.6}, 0.5), ParameterError);
  CHECK_THROWS_AS(nms({a}, {0.5}, 1.0), ParameterError);
}

TEST_CASE("nms matches brute-force oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    std::vector<Box> boxes;
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) {
      boxes.push_back({rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(2, 20),
                       rng.uniform(2, 20)});
      scores.push_back(rng.uniform(0, 1));
    }
    const double thr = rng.uniform(0.1, 0.9);
    CHECK(nms(boxes, scores, thr) == oracle_nms(boxes, scores, thr));
  }
}

TEST_CASE("smooth_l1 values and shape") {
  CHECK(smooth_l1(0.0) == 0.0);
  CHECK(smooth_l1(2.0) == 1.5);
  CHECK(smooth_l1(0.5) == 0.125);

  // even function
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-5, 5);
    CHECK(smooth_l1(x) == smooth_l1(-x));
  }

  // C1 continuity at the branch boundary
  CHECK(smooth_l1(1.0) == 0.5);
  CHECK(smooth_l1(std::nextafter(1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(smooth_l1_grad(std::nextafter(1.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(smooth_l1_grad(1.0) == 1.0);
  CHECK(smooth_l1_grad(-1.0) == -1.0);
}

TEST_CASE("box_reg_loss") {
  BoxDelta t{0.3, -0.2, 0.1, 0.5};
  CHECK(box_reg_loss(t, t) == 0.0);
  CHECK(box_reg_loss({0.5, 0, 0, 0}, {}) == 0.125);
  CHECK(box_reg_loss({2, 2, 2, 2}, {}) == 6.0);
}

TEST_CASE("cls_loss") {
  ClassProbs certain{{0.0, 1.0}};
  CHECK(cls_loss(certain, 1) == 0.0);
  ClassProbs even{{0.5, 0.5}};
  CHECK(cls_loss(even, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(cls_loss(certain, 0), std::domain_error);
  CHECK_THROWS_AS(cls_loss(even, 5), ParameterError);

  CHECK_THROWS_AS(ClassProbs::validated({0.5, 0.6}), ParameterError);
  CHECK_NOTHROW(ClassProbs::validated({0.5, 0.5}));
}

TEST_CASE("multitask_loss") {
  ClassProbs bg{{1.0, 0.0}};
  CHECK(multitask_loss(bg, 0, {}, {}, 1.0) == 0.0);

  ClassProbs fg{{0.0, 1.0}};
  BoxDelta t{0.1, 0.2, 0.3, 0.4};
  CHECK(multitask_loss(fg, 1, t, t, 7.0) == 0.0);

  ClassProbs half{{0.5, 0.5}};
  CHECK(multitask_loss(half, 1, {2, 2, 2, 2}, {}, 1.0) ==
        doctest::Approx(std::log(2.0) + 6.0).epsilon(1e-12));
}

TEST_CASE("rpn_loss") {
  RpnBatch batch;
  batch.anchors = {Box{8, 8, 16, 16}};
  batch.p = {1.0};
  batch.p_star = {AnchorLabel::positive};
  batch.t = {{0.1, 0.1, 0.1, 0.1}};
  batch.t_star = {{0.1, 0.1, 0.1, 0.1}};
  batch.lambda = 10.0;
  batch.n_cls = 1.0;
  batch.n_reg = 1.0;
  CHECK(rpn_loss(batch) == 0.0);

  batch.p = {0.9};
  CHECK(rpn_loss(batch) == doctest::Approx(-std::log(0.9)).epsilon(1e-12));

  // second anchor: negative with p = 0.1, both averaged over n_cls = 2
  batch.anchors.push_back(Box{24, 8, 16, 16});
  batch.p.push_back(0.1);
  batch.p_star.push_back(AnchorLabel::negative);
  batch.t.push_back({});
  batch.t_star.push_back({});
  batch.n_cls = 2.0;
  CHECK(rpn_loss(batch) ==
        doctest::Approx((-std::log(0.9) - std::log(0.9)) / 2.0).epsilon(1e-12));

  // ignore-labeled anchors contribute to neither sum
  batch.anchors.push_back(Box{40, 8, 16, 16});
  batch.p.push_back(0.999);
  batch.p_star.push_back(AnchorLabel::ignore);
  batch.t.push_back({5, 5, 5, 5});
  batch.t_star.push_back({});
  CHECK(rpn_loss(batch) ==
        doctest::Approx((-std::log(0.9) - std::log(0.9)) / 2.0).epsilon(1e-12));

  batch.p[0] = 0.0;  // p = 0 against a positive label
  CHECK_THROWS_AS(rpn_loss(batch), std::domain_error);
  batch.p[0] = 0.9;
  batch.p[1] = 1.0;  // p = 1 against a negative label
  CHECK_THROWS_AS(rpn_loss(batch), std::domain_error);
}

TEST_CASE("rpn_loss is non-negative and zero only at perfection") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    RpnBatch batch;
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    bool perfect = true;
    for (int i = 0; i < n; ++i) {
      batch.anchors.push_back({rng.uniform(0, 100), rng.uniform(0, 100), 16, 16});
      const bool positive = rng.next_double() < 0.5;
      batch.p_star.push_back(positive ? AnchorLabel::positive : AnchorLabel::negative);
      const double p = rng.uniform(0.05, 0.95);
      batch.p.push_back(p);
      BoxDelta t{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      batch.t.push_back(t);
      batch.t_star.push_back({});
      if (positive ? (p != 1.0 || box_reg_loss(t, {}) != 0.0) : (p != 0.0)) perfect = false;
    }
    batch.n_cls = n;
    batch.n_reg = n;
    const double loss = rpn_loss(batch);
    CHECK(loss >= 0.0);
    if (!perfect) CHECK(loss > 0.0);
  }
}

TEST_CASE("encode/decode boxes") {
  Box anchor{10, 10, 8, 4};
  CHECK(encode_box(anchor, anchor).tx == 0.0);
  CHECK(encode_box(anchor, anchor).tw == 0.0);

  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    Box a{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(1, 50), rng.uniform(1, 50)};
    Box b{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(1, 50), rng.uniform(1, 50)};
    const Box back = decode_box(a, encode_box(a, b));
    CHECK(std::abs(back.cx - b.cx) < 1e-9);
    CHECK(std::abs(back.cy - b.cy) < 1e-9);
    CHECK(std::abs(back.w - b.w) < 1e-9);
    CHECK(std::abs(back.h - b.h) < 1e-9);
  }

  // doubling the anchor width halves tx and shifts tw by -log 2
  Box target{20, 10, 6, 6};
  const BoxDelta d1 = encode_box(anchor, target);
  Box wide = anchor;
  wide.w *= 2.0;
  const BoxDelta d2 = encode_box(wide, target);
  CHECK(d2.tx == doctest::Approx(d1.tx / 2.0).epsilon(1e-12));
  CHECK(d2.tw == doctest::Approx(d1.tw - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("anchor_grid") {
  const auto one = anchor_grid(16, 16, 16, {16.0}, {1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].cx == 8.0);
  CHECK(one[0].cy == 8.0);
  CHECK(one[0].w == 16.0);

  CHECK(anchor_grid(32, 32, 16, {8, 16, 32}, {0.5, 1, 2}).size() == 36);
  // ceil division on ragged image sizes
  CHECK(anchor_grid(33, 17, 16, {16.0}, {1.0}).size() == 3 * 2);

  // area preserved at scale^2, aspect follows the ratio
  for (const auto& a : anchor_grid(16, 16, 16, {24.0}, {2.0})) {
    CHECK(a.w * a.h == doctest::Approx(24.0 * 24.0).epsilon(1e-9));
    CHECK(a.h / a.w == doctest::Approx(2.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(anchor_grid(16, 16, 0, {1.0}, {1.0}), ParameterError);
  CHECK_THROWS_AS(anchor_grid(16, 16, 16, {}, {1.0}), ParameterError);
}

TEST_CASE("gradient checks against finite differences") {
  checks::CheckOptions opts;
  opts.grad_trials = 100;
  opts.nms_trials = 100;
  opts.roundtrip_trials = 100;
  for (const auto& result : checks::run_detmath_checks(opts)) {
    INFO(result.name, ": ", result.detail);
    CHECK(result.passed);
  }
}

TEST_CASE("fault injection trips the harness") {
  for (const char* fault : {"smoothl1-branch", "nms-threshold", "encode-sign"}) {
    checks::CheckOptions opts;
    opts.grad_trials = 30;
    opts.nms_trials = 60;
    opts.roundtrip_trials = 60;
    opts.inject_fault = fault;
    bool any_failed = false;
    for (const auto& result : checks::run_detmath_checks(opts))
      any_failed = any_failed || !result.passed;
    INFO("fault: ", fault);
    CHECK(any_failed);
  }
}
