#include "trimdie/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "trimdie/error.hpp"

namespace trimdie {

void DetectorConfig::validate() const {
  if (!(proposal_iou_nms > 0.0 && proposal_iou_nms < 1.0))
    throw ParameterError("DetectorConfig: proposal_iou_nms must lie in (0,1)");
  if (!(junction_score_threshold > 0.0 && junction_score_threshold < 1.0))
    throw ParameterError("DetectorConfig: junction_score_threshold must lie in (0,1)");
  if (point_box_size < 4) throw ParameterError("DetectorConfig: point_box_size must be >= 4 px");
  if (min_arm_px < 1 || cluster_radius_px < 1 || min_cluster_corners < 1)
    throw ParameterError("DetectorConfig: corner heuristic parameters must be positive");
}

namespace {

struct Corner {
  int x = 0;
  int y = 0;
  bool n = false, s = false, e = false, w = false;
  int arm_count() const { return int(n) + int(s) + int(e) + int(w); }
};

inline bool is_color(const RgbImage& img, int x, int y, Rgb c) {
  return img.in_bounds(x, y) && img.at(x, y) == c;
}

bool has_arm(const RgbImage& img, int x, int y, int dx, int dy, Rgb line, int min_len) {
  for (int i = 1; i <= min_len; ++i)
    if (!is_color(img, x + i * dx, y + i * dy, line)) return false;
  return true;
}

// Corner pixels: line pixels with at least two orthogonal arms that do not
// form a straight run. Staircase pixels of diagonal edges never grow arms
// of min_arm_px length, so only true axis-aligned corners qualify.
std::vector<Corner> find_corners(const RgbImage& img, const DetectorConfig& cfg) {
  std::vector<Corner> corners;
  const Rgb line = cfg.line_color;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) != line) continue;
      Corner c;
      c.x = x;
      c.y = y;
      c.n = has_arm(img, x, y, 0, -1, line, cfg.min_arm_px);
      c.s = has_arm(img, x, y, 0, 1, line, cfg.min_arm_px);
      c.e = has_arm(img, x, y, 1, 0, line, cfg.min_arm_px);
      c.w = has_arm(img, x, y, -1, 0, line, cfg.min_arm_px);
      const int arms = c.arm_count();
      if (arms < 2) continue;
      if (arms == 2 && ((c.n && c.s) || (c.e && c.w))) continue;  // straight line
      corners.push_back(c);
    }
  }
  return corners;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

Box clamp_box_inside(Box b, int w, int h) {
  b.w = std::min(b.w, static_cast<double>(w - 1));
  b.h = std::min(b.h, static_cast<double>(h - 1));
  if (b.x1() < 0) b.cx -= b.x1();
  if (b.y1() < 0) b.cy -= b.y1();
  if (b.x2() > w - 1.0) b.cx -= b.x2() - (w - 1.0);
  if (b.y2() > h - 1.0) b.cy -= b.y2() - (h - 1.0);
  return b;
}

// --- shortcut-mark path -----------------------------------------------

struct RedComponent {
  long count = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;
  std::vector<std::pair<int, int>> pixels;
};

double cross(std::pair<double, double> o, std::pair<double, double> a,
             std::pair<double, double> b) {
  return (a.first - o.first) * (b.second - o.second) -
         (a.second - o.second) * (b.first - o.first);
}

// Circularity 4*pi*A/P^2 of the convex hull of a pixel set.
double hull_circularity(std::vector<std::pair<int, int>> pts) {
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;

  std::vector<std::pair<double, double>> p(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lo = k + 1; i-- > 0;) {  // upper
    while (k >= lo && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k > 1 ? k - 1 : 0);
  if (hull.size() < 3) return 0.0;

  double area = 0.0, perim = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.first * b.second - b.first * a.second;
    perim += std::hypot(b.first - a.first, b.second - a.second);
  }
  area = std::abs(area) * 0.5;
  if (perim <= 0.0) return 0.0;
  return 4.0 * std::numbers::pi * area / (perim * perim);
}

std::vector<Detection> detect_region_shortcut(const RgbImage& img, const DetectorConfig& cfg) {
  // connected components over shortcut-colored pixels (8-connectivity)
  std::vector<int> comp(static_cast<std::size_t>(img.width) * img.height, -1);
  std::vector<RedComponent> comps;
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
      if (comp[idx] >= 0 || img.at(x, y) != cfg.shortcut_color) continue;
      const int id = static_cast<int>(comps.size());
      comps.emplace_back();
      stack.push_back({x, y});
      comp[idx] = id;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        RedComponent& rc = comps[id];
        rc.count += 1;
        rc.sum_x += cx;
        rc.sum_y += cy;
        rc.pixels.push_back({cx, cy});
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (!img.in_bounds(nx, ny)) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * img.width + nx;
            if (comp[nidx] >= 0 || img.at(nx, ny) != cfg.shortcut_color) continue;
            comp[nidx] = id;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }

  int best = -1;
  double best_circ = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].count < cfg.min_mark_px) continue;
    const double circ = hull_circularity(comps[i].pixels);
    if (circ < cfg.min_circularity) continue;
    if (best < 0 || circ > best_circ ||
        (circ == best_circ && comps[i].count > comps[best].count)) {
      best = static_cast<int>(i);
      best_circ = circ;
    }
  }
  if (best < 0) return {};

  const RedComponent& rc = comps[best];
  Box box{std::round(rc.sum_x / rc.count), std::round(rc.sum_y / rc.count),
          static_cast<double>(cfg.region_box_px), static_cast<double>(cfg.region_box_px)};
  box = clamp_box_inside(box, img.width, img.height);
  return {{box, 1.0, "region"}};
}

// --- junction-heuristic path ------------------------------------------

std::vector<Detection> detect_region_junctions(const RgbImage& img, const DetectorConfig& cfg) {
  const std::vector<Corner> corners = find_corners(img, cfg);
  if (corners.empty()) return {};

  UnionFind uf(corners.size());
  for (std::size_t i = 0; i < corners.size(); ++i)
    for (std::size_t j = i + 1; j < corners.size(); ++j)
      if (std::max(std::abs(corners[i].x - corners[j].x),
                   std::abs(corners[i].y - corners[j].y)) <= cfg.cluster_radius_px)
        uf.unite(i, j);

  // clusters keyed by first member in scan order
  std::vector<std::size_t> roots;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const std::size_t r = uf.find(i);
    auto it = std::find(roots.begin(), roots.end(), r);
    if (it == roots.end()) {
      roots.push_back(r);
      members.push_back({i});
    } else {
      members[static_cast<std::size_t>(it - roots.begin())].push_back(i);
    }
  }

  std::vector<Box> boxes;
  std::vector<double> scores;
  for (const auto& m : members) {
    if (m.size() < static_cast<std::size_t>(cfg.min_cluster_corners)) continue;
    int x1 = img.width, y1 = img.height, x2 = -1, y2 = -1;
    int t_count = 0;
    for (std::size_t i : m) {
      x1 = std::min(x1, corners[i].x);
      y1 = std::min(y1, corners[i].y);
      x2 = std::max(x2, corners[i].x);
      y2 = std::max(y2, corners[i].y);
      if (corners[i].arm_count() >= 3) ++t_count;  // orthogonal intersection
    }
    Box box = Box::from_xywh(x1, y1, x2 - x1 + 1.0, y2 - y1 + 1.0);
    box.w = std::max(box.w, static_cast<double>(cfg.region_box_px));
    box.h = std::max(box.h, static_cast<double>(cfg.region_box_px));
    boxes.push_back(clamp_box_inside(box, img.width, img.height));
    scores.push_back(std::min(1.0, t_count / cfg.junction_t_norm));
  }

  std::vector<Detection> dets;
  for (std::size_t idx : nms(boxes, scores, cfg.proposal_iou_nms)) {
    if (scores[idx] < cfg.junction_score_threshold) continue;
    dets.push_back({boxes[idx], scores[idx], "region"});
  }
  return dets;
}

}  // namespace

std::vector<Detection> detect_trimming_region(const RgbImage& image, const DetectorConfig& cfg) {
  image.validate();
  cfg.validate();
  return cfg.use_shortcut ? detect_region_shortcut(image, cfg)
                          : detect_region_junctions(image, cfg);
}

std::vector<Detection> detect_target_points(const RgbImage& crop, const DetectorConfig& cfg) {
  crop.validate();
  cfg.validate();
  const std::vector<Corner> corners = find_corners(crop, cfg);
  if (corners.empty()) return {};

  // group corners by pixel column
  std::map<int, std::vector<Corner>> columns;
  for (const Corner& c : corners) columns[c.x].push_back(c);

  // The shear-face column carries, top to bottom: the blade/upper-body
  // reference (#2, arms S+W), two T junctions with a west arm (#4 cutting
  // edge, then #3 relief corner), and the blade tip (#1, arms N+E).
  const std::vector<Corner>* shear = nullptr;
  for (const auto& [x, col] : columns) {
    if (col.size() < 4) continue;
    const Corner& top = col.front();
    const Corner& bottom = col.back();
    if (!(top.s && top.w && !top.n)) continue;
    if (!(bottom.n && bottom.e && !bottom.s)) continue;
    int mid_t = 0;
    for (std::size_t i = 1; i + 1 < col.size(); ++i)
      if (col[i].n && col[i].s && col[i].w) ++mid_t;
    if (mid_t != 2) continue;
    if (shear != nullptr) return {};  // ambiguous crop
    shear = &col;
  }
  if (shear == nullptr) return {};

  const Corner& p2 = shear->front();
  const Corner& p1 = shear->back();
  const Corner* p4 = nullptr;
  const Corner* p3 = nullptr;
  for (std::size_t i = 1; i + 1 < shear->size(); ++i) {
    const Corner& c = (*shear)[i];
    if (c.n && c.s && c.w) {
      if (p4 == nullptr) {
        p4 = &c;
      } else {
        p3 = &c;
      }
    }
  }

  // #5: the relief-step corner across the gap, horizontally opposed to #3
  const Corner* p5 = nullptr;
  for (const Corner& c : corners) {
    if (!(c.s && c.e && !c.n && !c.w)) continue;
    if (c.x <= p3->x + 2) continue;
    if (std::abs(c.y - p3->y) > 3) continue;
    if (p5 == nullptr || c.x < p5->x) p5 = &c;
  }

  const double side = cfg.point_box_size;
  auto make = [&](const Corner& c, const char* label) {
    Box box{static_cast<double>(c.x), static_cast<double>(c.y), side, side};
    return Detection{clamp_box_inside(box, crop.width, crop.height), 1.0, label};
  };

  std::vector<Detection> dets;
  dets.push_back(make(p1, "point_1"));
  dets.push_back(make(p2, "point_2"));
  dets.push_back(make(*p3, "point_3"));
  dets.push_back(make(*p4, "point_4"));
  if (p5 != nullptr) dets.push_back(make(*p5, "point_5"));
  return dets;
}

EvalStats evaluate_detections(const std::vector<Detection>& dets,
                              const std::vector<LabeledBox>& truths, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    throw ParameterError("evaluate_detections: threshold must lie in (0,1)");
  EvalStats stats;
  for (const auto& truth : truths) {
    LabelStats& ls = stats.per_label[truth.label];
    ls.total += 1;
    stats.total += 1;
    for (const auto& det : dets) {
      if (det.label != truth.label) continue;
      if (iou(det.box, truth.box) >= iou_threshold) {
        ls.detected += 1;
        stats.detected += 1;
        break;
      }
    }
  }
  return stats;
}

}  // namespace trimdie
