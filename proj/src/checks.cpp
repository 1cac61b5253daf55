#include "trimdie/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "trimdie/detmath.hpp"
#include "trimdie/error.hpp"
#include "trimdie/rng.hpp"

namespace trimdie::checks {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kGradTol = 1e-5;   // relative
constexpr double kRoundTol = 1e-9;

double central_diff(const std::function<double(double)>& f, double x) {
  return (f(x + kFdStep) - f(x - kFdStep)) / (2.0 * kFdStep);
}

bool grad_close(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1.0});
  return std::abs(analytic - numeric) <= kGradTol * scale;
}

// Brute-force suppression: repeatedly take the best remaining score and
// mark everything it overlaps. Kept deliberately naive.
std::vector<std::size_t> brute_nms(const std::vector<Box>& boxes,
                                   const std::vector<double>& scores, double threshold) {
  const std::size_t n = boxes.size();
  std::vector<bool> removed(n, false);
  std::vector<std::size_t> kept;
  for (;;) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (removed[i]) continue;
      if (best == n || scores[i] > scores[best]) best = i;
    }
    if (best == n) break;
    kept.push_back(best);
    removed[best] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (removed[i]) continue;
      const double ix = std::max(0.0, std::min(boxes[i].x2(), boxes[best].x2()) -
                                          std::max(boxes[i].x1(), boxes[best].x1()));
      const double iy = std::max(0.0, std::min(boxes[i].y2(), boxes[best].y2()) -
                                          std::max(boxes[i].y1(), boxes[best].y1()));
      const double inter = ix * iy;
      const double ratio = inter / (boxes[i].area() + boxes[best].area() - inter);
      if (ratio > threshold) removed[i] = true;
    }
  }
  return kept;
}

Box random_box(Rng& rng, double span) {
  return {rng.uniform(0.0, span), rng.uniform(0.0, span), rng.uniform(1.0, span * 0.5),
          rng.uniform(1.0, span * 0.5)};
}

// Keeps random draws away from the smooth-L1 branch boundary so finite
// differences stay on one branch.
double off_branch(Rng& rng) {
  for (;;) {
    const double x = rng.uniform(-3.0, 3.0);
    if (std::abs(std::abs(x) - 1.0) > 10.0 * kFdStep && std::abs(x) > 10.0 * kFdStep) return x;
  }
}

struct Harness {
  const CheckOptions& opts;
  std::vector<CheckResult>& results;

  // Faulty stand-ins exercised by --inject-fault; they let the harness
  // prove it can catch a broken kernel.
  double eval_smooth_l1(double x) const {
    if (opts.inject_fault == "smoothl1-branch") {
      const double ax = std::abs(x);
      return ax < 1.0 ? ax - 0.5 : 0.5 * x * x;  // branches swapped
    }
    return smooth_l1(x);
  }

  std::vector<std::size_t> eval_nms(const std::vector<Box>& b, const std::vector<double>& s,
                                    double thr) const {
    if (opts.inject_fault == "nms-threshold") return nms(b, s, thr * 0.5);
    return nms(b, s, thr);
  }

  BoxDelta eval_encode(const Box& a, const Box& t) const {
    BoxDelta d = encode_box(a, t);
    if (opts.inject_fault == "encode-sign") d.ty = -d.ty;
    return d;
  }

  void record(const std::string& name, bool passed, const std::string& detail) {
    results.push_back({name, passed, detail});
  }
};

}  // namespace

std::vector<CheckResult> run_detmath_checks(const CheckOptions& opts) {
  std::vector<CheckResult> results;
  Harness h{opts, results};
  Rng rng(opts.seed);

  // fixed values of the box-regression loss
  {
    const bool ok = h.eval_smooth_l1(2.0) == 1.5 && h.eval_smooth_l1(0.5) == 0.125 &&
                    h.eval_smooth_l1(0.0) == 0.0;
    h.record("smooth_l1 fixed values", ok, "f(2)=1.5 f(0.5)=0.125 f(0)=0");
  }

  // C1 continuity at the branch boundary
  {
    const double eps = 1e-7;
    const double below = h.eval_smooth_l1(1.0 - eps);
    const double above = h.eval_smooth_l1(1.0 + eps);
    const bool value_ok = std::abs(below - 0.5) < 1e-6 && std::abs(above - 0.5) < 1e-6;
    const double g_below = (h.eval_smooth_l1(1.0 - eps) - h.eval_smooth_l1(1.0 - 3 * eps)) / (2 * eps);
    const double g_above = (h.eval_smooth_l1(1.0 + 3 * eps) - h.eval_smooth_l1(1.0 + eps)) / (2 * eps);
    const bool grad_ok = std::abs(g_below - 1.0) < 1e-3 && std::abs(g_above - 1.0) < 1e-3;
    // analytic one-sided derivatives on both branches, both signs
    const bool analytic_ok = std::abs(smooth_l1_grad(1.0 - 1e-9) - 1.0) < 1e-6 &&
                             smooth_l1_grad(1.0 + 1e-9) == 1.0 &&
                             std::abs(smooth_l1_grad(-1.0 + 1e-9) + 1.0) < 1e-6 &&
                             smooth_l1_grad(-1.0 - 1e-9) == -1.0;
    h.record("smooth_l1 C1 continuity at |x|=1", value_ok && grad_ok && analytic_ok,
             "both branch values 0.5, one-sided slopes +-1, numeric and analytic");
  }

  // gradient checks against central differences
  {
    int bad = 0;
    for (int trial = 0; trial < opts.grad_trials; ++trial) {
      const double x = off_branch(rng);
      if (!grad_close(smooth_l1_grad(x), central_diff([&](double v) { return h.eval_smooth_l1(v); }, x)))
        ++bad;
    }
    h.record("smooth_l1 gradient vs finite differences", bad == 0,
             std::to_string(opts.grad_trials) + " random points");
  }
  {
    int bad = 0;
    for (int trial = 0; trial < opts.grad_trials; ++trial) {
      const double pc = rng.uniform(0.05, 0.95);
      ClassProbs p{{pc, 1.0 - pc}};
      const double analytic = cls_loss_grad(p, 0);
      const double numeric = central_diff(
          [&](double v) {
            ClassProbs q{{v, 1.0 - pc}};
            return cls_loss(q, 0);
          },
          pc);
      if (!grad_close(analytic, numeric)) ++bad;
    }
    h.record("cls_loss gradient vs finite differences", bad == 0,
             std::to_string(opts.grad_trials) + " random points");
  }
  {
    int bad = 0;
    for (int trial = 0; trial < opts.grad_trials; ++trial) {
      BoxDelta t{off_branch(rng), off_branch(rng), off_branch(rng), off_branch(rng)};
      BoxDelta v{};
      const BoxDelta analytic = box_reg_loss_grad(t, v);
      auto fd = [&](double BoxDelta::* member) {
        return central_diff(
            [&](double val) {
              BoxDelta tt = t;
              tt.*member = val;
              return box_reg_loss(tt, v);
            },
            t.*member);
      };
      if (!grad_close(analytic.tx, fd(&BoxDelta::tx)) || !grad_close(analytic.ty, fd(&BoxDelta::ty)) ||
          !grad_close(analytic.tw, fd(&BoxDelta::tw)) || !grad_close(analytic.th, fd(&BoxDelta::th)))
        ++bad;
    }
    h.record("box_reg_loss gradient vs finite differences", bad == 0,
             std::to_string(opts.grad_trials) + " random points");
  }
  {
    int bad = 0;
    for (int trial = 0; trial < opts.grad_trials; ++trial) {
      const double pu = rng.uniform(0.05, 0.95);
      ClassProbs p{{1.0 - pu, pu}};
      BoxDelta t{off_branch(rng), off_branch(rng), off_branch(rng), off_branch(rng)};
      BoxDelta v{};
      const double lambda = rng.uniform(0.5, 10.0);
      const double analytic_p = cls_loss_grad(p, 1);
      const double numeric_p = central_diff(
          [&](double val) {
            ClassProbs q{{1.0 - pu, val}};
            return multitask_loss(q, 1, t, v, lambda);
          },
          pu);
      const double analytic_tx = lambda * box_reg_loss_grad(t, v).tx;
      const double numeric_tx = central_diff(
          [&](double val) {
            BoxDelta tt = t;
            tt.tx = val;
            return multitask_loss(p, 1, tt, v, lambda);
          },
          t.tx);
      if (!grad_close(analytic_p, numeric_p) || !grad_close(analytic_tx, numeric_tx)) ++bad;
    }
    h.record("multitask_loss gradient vs finite differences", bad == 0,
             std::to_string(opts.grad_trials) + " random points");
  }
  {
    int bad = 0;
    for (int trial = 0; trial < opts.grad_trials; ++trial) {
      RpnBatch batch;
      const int n = static_cast<int>(rng.uniform_int(2, 6));
      for (int i = 0; i < n; ++i) {
        batch.anchors.push_back(random_box(rng, 100.0));
        batch.p.push_back(rng.uniform(0.05, 0.95));
        const long roll = rng.uniform_int(0, 2);
        batch.p_star.push_back(roll == 0 ? AnchorLabel::negative
                               : roll == 1 ? AnchorLabel::positive
                                           : AnchorLabel::ignore);
        batch.t.push_back({off_branch(rng), off_branch(rng), off_branch(rng), off_branch(rng)});
        batch.t_star.push_back({});
      }
      batch.lambda = rng.uniform(1.0, 10.0);
      batch.n_cls = n;
      batch.n_reg = n * 2.0;

      const RpnLossGrads g = rpn_loss_grads(batch);
      bool trial_ok = true;
      for (int i = 0; i < n && trial_ok; ++i) {
        const double numeric = central_diff(
            [&](double val) {
              RpnBatch b = batch;
              b.p[i] = val;
              return rpn_loss(b);
            },
            batch.p[i]);
        trial_ok = grad_close(g.dp[i], numeric);
        if (batch.p_star[i] == AnchorLabel::positive && trial_ok) {
          const double numeric_t = central_diff(
              [&](double val) {
                RpnBatch b = batch;
                b.t[i].tw = val;
                return rpn_loss(b);
              },
              batch.t[i].tw);
          trial_ok = grad_close(g.dt[i].tw, numeric_t);
        }
      }
      if (!trial_ok) ++bad;
    }
    h.record("rpn_loss gradient vs finite differences", bad == 0,
             std::to_string(opts.grad_trials) + " random batches");
  }

  // NMS equivalence against the brute-force oracle
  {
    int bad = 0;
    for (int trial = 0; trial < opts.nms_trials; ++trial) {
      const int n = static_cast<int>(rng.uniform_int(1, 8));
      std::vector<Box> boxes;
      std::vector<double> scores;
      for (int i = 0; i < n; ++i) {
        boxes.push_back(random_box(rng, 50.0));
        scores.push_back(rng.uniform(0.0, 1.0));
      }
      const double thr = rng.uniform(0.1, 0.9);
      if (h.eval_nms(boxes, scores, thr) != brute_nms(boxes, scores, thr)) ++bad;
    }
    h.record("nms equals brute-force oracle", bad == 0,
             std::to_string(opts.nms_trials) + " randomized instances, <= 8 boxes");
  }

  // encode/decode round trips
  {
    int bad = 0;
    for (int trial = 0; trial < opts.roundtrip_trials; ++trial) {
      const Box anchor = random_box(rng, 200.0);
      const Box target = random_box(rng, 200.0);
      const Box back = decode_box(anchor, h.eval_encode(anchor, target));
      if (std::abs(back.cx - target.cx) > kRoundTol || std::abs(back.cy - target.cy) > kRoundTol ||
          std::abs(back.w - target.w) > kRoundTol || std::abs(back.h - target.h) > kRoundTol)
        ++bad;
    }
    h.record("encode/decode round trip", bad == 0,
             std::to_string(opts.roundtrip_trials) + " random pairs within 1e-9");
  }

  // basic IoU properties
  {
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      const Box a = random_box(rng, 50.0);
      const Box b = random_box(rng, 50.0);
      const double ab = iou(a, b);
      ok = ab >= 0.0 && ab <= 1.0 && ab == iou(b, a) && std::abs(iou(a, a) - 1.0) < 1e-12;
    }
    h.record("iou symmetry and range", ok, "200 random pairs");
  }

  return results;
}

}  // namespace trimdie::checks
