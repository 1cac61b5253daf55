#include "trimdie/raster.hpp"

#include <algorithm>
#include <cmath>

#include "trimdie/error.hpp"

namespace trimdie {

void Viewport::validate() const {
  if (!(mm_per_px > 0.0)) throw ParameterError("Viewport: mm_per_px must be > 0");
  if (width < 1 || height < 1) throw ParameterError("Viewport: dimensions must be >= 1");
}

Vec2 mm_to_px(const Viewport& vp, Vec2 q) {
  return {(q.x - vp.center.x) / vp.mm_per_px + (vp.width - 1) * 0.5,
          (vp.center.y - q.y) / vp.mm_per_px + (vp.height - 1) * 0.5};
}

Vec2 px_to_mm(const Viewport& vp, Vec2 p) {
  return {vp.center.x + (p.x - (vp.width - 1) * 0.5) * vp.mm_per_px,
          vp.center.y - (p.y - (vp.height - 1) * 0.5) * vp.mm_per_px};
}

namespace {

void fill_polygon(RgbImage& img, const std::vector<Vec2>& px_verts, Rgb color) {
  if (px_verts.size() < 3) return;
  double py_min = px_verts[0].y, py_max = px_verts[0].y;
  for (const auto& v : px_verts) {
    py_min = std::min(py_min, v.y);
    py_max = std::max(py_max, v.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(py_min)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::floor(py_max)));

  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    xs.clear();
    const double fy = static_cast<double>(y);
    for (std::size_t i = 0; i < px_verts.size(); ++i) {
      const Vec2 a = px_verts[i];
      const Vec2 b = px_verts[(i + 1) % px_verts.size()];
      // half-open rule; horizontal edges contribute nothing
      if ((a.y <= fy && fy < b.y) || (b.y <= fy && fy < a.y)) {
        xs.push_back(a.x + (fy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      int xa = static_cast<int>(std::ceil(xs[i] - 1e-9));
      int xb = static_cast<int>(std::floor(xs[i + 1] + 1e-9));
      xa = std::max(xa, 0);
      xb = std::min(xb, img.width - 1);
      for (int x = xa; x <= xb; ++x) img.set(x, y, color);
    }
  }
}

// Steps along the major axis on integer pixels; axis-aligned segments land
// on a single row/column with no gaps even at half-integer coordinates.
void draw_segment(RgbImage& img, Vec2 a, Vec2 b, Rgb color) {
  const bool x_major = std::abs(b.x - a.x) >= std::abs(b.y - a.y);
  if ((x_major && b.x < a.x) || (!x_major && b.y < a.y)) std::swap(a, b);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  if (x_major) {
    const int x0 = static_cast<int>(std::lround(a.x));
    const int x1 = static_cast<int>(std::lround(b.x));
    for (int x = x0; x <= x1; ++x) {
      const double t = dx != 0.0 ? std::clamp((x - a.x) / dx, 0.0, 1.0) : 0.0;
      const int y = static_cast<int>(std::lround(a.y + t * dy));
      if (img.in_bounds(x, y)) img.set(x, y, color);
    }
  } else {
    const int y0 = static_cast<int>(std::lround(a.y));
    const int y1 = static_cast<int>(std::lround(b.y));
    for (int y = y0; y <= y1; ++y) {
      const double t = dy != 0.0 ? std::clamp((y - a.y) / dy, 0.0, 1.0) : 0.0;
      const int x = static_cast<int>(std::lround(a.x + t * dx));
      if (img.in_bounds(x, y)) img.set(x, y, color);
    }
  }
}

void draw_circle_outline(RgbImage& img, Vec2 center, double radius, double stroke, Rgb color) {
  const double half = stroke * 0.5;
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius - half - 1)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(center.x + radius + half + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius - half - 1)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(center.y + radius + half + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - center.x, y - center.y);
      if (std::abs(d - radius) <= half) img.set(x, y, color);
    }
  }
}

void render_polygons(RgbImage& img, const SectionProfile& profile, const Viewport& vp,
                     const RenderStyle& style) {
  std::vector<Vec2> px_verts;
  // fill first so edges stay on top of every interior
  for (const auto& poly : profile.polygons) {
    px_verts.clear();
    for (const auto& v : poly.vertices) px_verts.push_back(mm_to_px(vp, v));
    fill_polygon(img, px_verts, style.palette.fill);
  }
  for (const auto& poly : profile.polygons) {
    px_verts.clear();
    for (const auto& v : poly.vertices) px_verts.push_back(mm_to_px(vp, v));
    for (std::size_t i = 0; i < px_verts.size(); ++i)
      draw_segment(img, px_verts[i], px_verts[(i + 1) % px_verts.size()], style.palette.line);
  }
}

// Projects a mm box to pixel space and pads it up to the minimum size.
Box project_box(const Aabb2& mm_box, const Viewport& vp, int min_px) {
  const Vec2 a = mm_to_px(vp, mm_box.lo);
  const Vec2 b = mm_to_px(vp, mm_box.hi);
  const double x1 = std::min(a.x, b.x), x2 = std::max(a.x, b.x);
  const double y1 = std::min(a.y, b.y), y2 = std::max(a.y, b.y);
  Box box{(x1 + x2) * 0.5, (y1 + y2) * 0.5, x2 - x1, y2 - y1};
  box.w = std::max(box.w, static_cast<double>(min_px));
  box.h = std::max(box.h, static_cast<double>(min_px));
  return box;
}

bool box_inside(const Box& b, int w, int h) {
  return b.x1() >= 0.0 && b.y1() >= 0.0 && b.x2() <= w - 1.0 && b.y2() <= h - 1.0;
}

bool box_outside(const Box& b, int w, int h) {
  return b.x2() < 0.0 || b.y2() < 0.0 || b.x1() > w - 1.0 || b.y1() > h - 1.0;
}

}  // namespace

SectionRender render_section(const SectionProfile& profile, const Viewport& vp,
                             bool shortcut_on, const RenderStyle& style) {
  vp.validate();
  style.palette.validate();

  SectionRender out;
  out.image = RgbImage::filled(vp.width, vp.height, style.palette.background);
  if (profile.polygons.empty()) return out;

  const Box target = project_box(profile.target_box(), vp, style.min_region_box_px);
  if (!box_inside(target, vp.width, vp.height))
    throw RenderError("render_section: target trimming region clipped by viewport");

  render_polygons(out.image, profile, vp, style);

  if (shortcut_on) {
    Vec2 c = mm_to_px(vp, profile.target_center);
    c = {std::round(c.x), std::round(c.y)};
    draw_circle_outline(out.image, c, style.shortcut_radius_px, style.shortcut_stroke_px,
                        style.palette.shortcut);
  }

  out.truth_boxes.push_back({"region", target});
  for (const auto& mm_box : profile.distractor_boxes) {
    Box b = project_box(mm_box, vp, style.min_region_box_px);
    if (box_outside(b, vp.width, vp.height)) continue;  // clipping distractors is allowed
    out.truth_boxes.push_back({"distractor", b});
  }
  return out;
}

RgbImage render_zoom(const SectionProfile& profile, Vec2 center, double mm_per_px, int size,
                     const RenderStyle& style) {
  if (!(mm_per_px > 0.0)) throw ParameterError("render_zoom: mm_per_px must be > 0");
  Viewport vp{center, mm_per_px, size, size};
  vp.validate();
  style.palette.validate();

  RgbImage img = RgbImage::filled(size, size, style.palette.background);
  if (profile.polygons.empty()) return img;

  // A crop that cuts through the target region is unusable for
  // measurement; fully inside (the normal case) and fully outside
  // (blank crops) are both fine.
  const Box target = project_box(profile.target_box(), vp, 1);
  if (!box_inside(target, size, size) && !box_outside(target, size, size))
    throw RenderError("render_zoom: target trimming region partially clipped");

  render_polygons(img, profile, vp, style);
  return img;
}

RgbImage render_calibration_circle(double mm_per_px, int size, const RenderStyle& style) {
  if (!(mm_per_px > 0.0))
    throw ConfigError("render_calibration_circle: mm_per_px must be > 0");
  const double diameter_px = 20.0 / mm_per_px;
  if (diameter_px > size - 4)
    throw ConfigError("render_calibration_circle: circle does not fit the image");

  RgbImage img = RgbImage::filled(size, size, style.palette.background);
  const double c = (size - 1) * 0.5;
  const double radius = diameter_px * 0.5;
  const double stroke = 3.0;
  // stroke drawn inward so the outer extent stays on the true diameter
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x - c, y - c);
      if (d <= radius && d > radius - stroke) img.set(x, y, style.palette.line);
    }
  }
  return img;
}

}  // namespace trimdie
