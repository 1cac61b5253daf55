#include "trimdie/detmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trimdie/error.hpp"

namespace trimdie {

ClassProbs ClassProbs::validated(std::vector<double> p) {
  if (p.empty()) throw ParameterError("ClassProbs: empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || v > 1.0) throw ParameterError("ClassProbs: probability outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("ClassProbs: probabilities do not sum to 1");
  return ClassProbs{std::move(p)};
}

void RpnBatch::validate() const {
  const std::size_t n = anchors.size();
  if (p.size() != n || p_star.size() != n || t.size() != n || t_star.size() != n)
    throw ParameterError("RpnBatch: per-anchor lists differ in length");
  if (n_cls <= 0.0 || n_reg <= 0.0) throw ParameterError("RpnBatch: normalizers must be positive");
  for (double v : p)
    if (v < 0.0 || v > 1.0) throw ParameterError("RpnBatch: objectness outside [0,1]");
}

double iou(const Box& a, const Box& b) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0)
    throw ParameterError("iou: boxes must have positive extent");
  const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1()));
  const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1()));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

std::vector<std::size_t> nms(const std::vector<Box>& boxes,
                             const std::vector<double>& scores,
                             double iou_threshold) {
  if (boxes.size() != scores.size()) throw ParameterError("nms: boxes/scores length mismatch");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    throw ParameterError("nms: threshold must lie in (0,1)");

  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (iou(boxes[idx], boxes[k]) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1_grad(double x) {
  const double ax = std::abs(x);
  if (ax < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

double box_reg_loss(const BoxDelta& t, const BoxDelta& v) {
  const BoxDelta d = t - v;
  return smooth_l1(d.tx) + smooth_l1(d.ty) + smooth_l1(d.tw) + smooth_l1(d.th);
}

BoxDelta box_reg_loss_grad(const BoxDelta& t, const BoxDelta& v) {
  const BoxDelta d = t - v;
  return {smooth_l1_grad(d.tx), smooth_l1_grad(d.ty), smooth_l1_grad(d.tw),
          smooth_l1_grad(d.th)};
}

double cls_loss(const ClassProbs& p, std::size_t c) {
  if (c >= p.probs.size()) throw ParameterError("cls_loss: class index out of range");
  const double pc = p.probs[c];
  if (pc <= 0.0) throw std::domain_error("cls_loss: zero probability for the true class");
  return -std::log(pc);
}

double cls_loss_grad(const ClassProbs& p, std::size_t c) {
  if (c >= p.probs.size()) throw ParameterError("cls_loss_grad: class index out of range");
  const double pc = p.probs[c];
  if (pc <= 0.0) throw std::domain_error("cls_loss_grad: zero probability");
  return -1.0 / pc;
}

double multitask_loss(const ClassProbs& p, std::size_t u, const BoxDelta& t_u,
                      const BoxDelta& v, double lambda) {
  double loss = cls_loss(p, u);
  if (u >= 1) loss += lambda * box_reg_loss(t_u, v);
  return loss;
}

namespace {

double binary_cls_loss(double p, AnchorLabel label) {
  if (label == AnchorLabel::positive) {
    if (p <= 0.0) throw std::domain_error("rpn_loss: p = 0 against a positive label");
    return -std::log(p);
  }
  if (p >= 1.0) throw std::domain_error("rpn_loss: p = 1 against a negative label");
  return -std::log(1.0 - p);
}

double binary_cls_grad(double p, AnchorLabel label) {
  if (label == AnchorLabel::positive) {
    if (p <= 0.0) throw std::domain_error("rpn_loss: p = 0 against a positive label");
    return -1.0 / p;
  }
  if (p >= 1.0) throw std::domain_error("rpn_loss: p = 1 against a negative label");
  return 1.0 / (1.0 - p);
}

}  // namespace

double rpn_loss(const RpnBatch& batch) {
  batch.validate();
  double cls = 0.0;
  double reg = 0.0;
  for (std::size_t i = 0; i < batch.p.size(); ++i) {
    if (batch.p_star[i] == AnchorLabel::ignore) continue;
    cls += binary_cls_loss(batch.p[i], batch.p_star[i]);
    if (batch.p_star[i] == AnchorLabel::positive)
      reg += box_reg_loss(batch.t[i], batch.t_star[i]);
  }
  return cls / batch.n_cls + batch.lambda * reg / batch.n_reg;
}

RpnLossGrads rpn_loss_grads(const RpnBatch& batch) {
  batch.validate();
  RpnLossGrads g;
  g.dp.assign(batch.p.size(), 0.0);
  g.dt.assign(batch.p.size(), BoxDelta{});
  for (std::size_t i = 0; i < batch.p.size(); ++i) {
    if (batch.p_star[i] == AnchorLabel::ignore) continue;
    g.dp[i] = binary_cls_grad(batch.p[i], batch.p_star[i]) / batch.n_cls;
    if (batch.p_star[i] == AnchorLabel::positive) {
      BoxDelta d = box_reg_loss_grad(batch.t[i], batch.t_star[i]);
      const double s = batch.lambda / batch.n_reg;
      g.dt[i] = {d.tx * s, d.ty * s, d.tw * s, d.th * s};
    }
  }
  return g;
}

BoxDelta encode_box(const Box& anchor, const Box& target) {
  return {(target.cx - anchor.cx) / anchor.w, (target.cy - anchor.cy) / anchor.h,
          std::log(target.w / anchor.w), std::log(target.h / anchor.h)};
}

Box decode_box(const Box& anchor, const BoxDelta& delta) {
  return {anchor.cx + delta.tx * anchor.w, anchor.cy + delta.ty * anchor.h,
          anchor.w * std::exp(delta.tw), anchor.h * std::exp(delta.th)};
}

std::vector<Box> anchor_grid(int image_w, int image_h, int stride,
                             const std::vector<double>& scales,
                             const std::vector<double>& ratios) {
  if (stride < 1) throw ParameterError("anchor_grid: stride must be >= 1");
  if (scales.empty() || ratios.empty())
    throw ParameterError("anchor_grid: scales and ratios must be nonempty");
  const int nx = (image_w + stride - 1) / stride;
  const int ny = (image_h + stride - 1) / stride;
  std::vector<Box> anchors;
  anchors.reserve(static_cast<std::size_t>(nx) * ny * scales.size() * ratios.size());
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      const double cx = (gx + 0.5) * stride;
      const double cy = (gy + 0.5) * stride;
      for (double s : scales) {
        for (double r : ratios) {
          // ratio = h/w with area held at s^2
          const double w = s / std::sqrt(r);
          const double h = s * std::sqrt(r);
          anchors.push_back({cx, cy, w, h});
        }
      }
    }
  }
  return anchors;
}

}  // namespace trimdie
