#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace trimdie {

// Axis-aligned box, center/extent parameterization, pixel units.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static Box from_xywh(double x, double y, double w, double h) {
    return {x + w * 0.5, y + h * 0.5, w, h};
  }
  double x1() const { return cx - w * 0.5; }
  double y1() const { return cy - h * 0.5; }
  double x2() const { return cx + w * 0.5; }
  double y2() const { return cy + h * 0.5; }
  double area() const { return w * h; }
};

struct LabeledBox {
  std::string label;
  Box box;
};

// Box regression offsets (t_x, t_y, t_w, t_h).
struct BoxDelta {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
};

inline BoxDelta operator-(BoxDelta a, BoxDelta b) {
  return {a.tx - b.tx, a.ty - b.ty, a.tw - b.tw, a.th - b.th};
}

// Discrete distribution over k categories. The factory enforces the
// sum-to-one invariant; the loss functions themselves only require the
// indexed probability to be positive so that finite-difference probes
// slightly off the simplex remain evaluable.
struct ClassProbs {
  std::vector<double> probs;

  static ClassProbs validated(std::vector<double> p);
};

enum class AnchorLabel { negative = 0, positive = 1, ignore = 2 };

// One mini-batch of anchors with predictions and targets for rpn_loss.
struct RpnBatch {
  std::vector<Box> anchors;
  std::vector<double> p;              // predicted objectness per anchor
  std::vector<AnchorLabel> p_star;    // ground-truth label per anchor
  std::vector<BoxDelta> t;            // predicted offsets
  std::vector<BoxDelta> t_star;       // ground-truth offsets
  double lambda = 10.0;
  double n_cls = 1.0;
  double n_reg = 1.0;

  void validate() const;
};

double iou(const Box& a, const Box& b);

// Greedy suppression; returns kept indices in score-descending order,
// ties broken by lower original index. Boxes with IoU strictly greater
// than the threshold against a kept box are discarded.
std::vector<std::size_t> nms(const std::vector<Box>& boxes,
                             const std::vector<double>& scores,
                             double iou_threshold);

double smooth_l1(double x);
double smooth_l1_grad(double x);

double box_reg_loss(const BoxDelta& t, const BoxDelta& v);
// Gradient with respect to t (negate for v).
BoxDelta box_reg_loss_grad(const BoxDelta& t, const BoxDelta& v);

double cls_loss(const ClassProbs& p, std::size_t c);
// d loss / d p_c; the loss does not depend on the other components.
double cls_loss_grad(const ClassProbs& p, std::size_t c);

// Multitask head loss: classification plus lambda-weighted box loss for
// non-background classes (u = 0 denotes background).
double multitask_loss(const ClassProbs& p, std::size_t u, const BoxDelta& t_u,
                      const BoxDelta& v, double lambda);

double rpn_loss(const RpnBatch& batch);

struct RpnLossGrads {
  std::vector<double> dp;
  std::vector<BoxDelta> dt;
};
RpnLossGrads rpn_loss_grads(const RpnBatch& batch);

BoxDelta encode_box(const Box& anchor, const Box& target);
Box decode_box(const Box& anchor, const BoxDelta& delta);

// One anchor per (cell, scale, ratio); cell centers on the stride
// lattice at (i + 0.5) * stride. ratio is h/w; anchor area is scale^2.
std::vector<Box> anchor_grid(int image_w, int image_h, int stride,
                             const std::vector<double>& scales,
                             const std::vector<double>& ratios);

}  // namespace trimdie
