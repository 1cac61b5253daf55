#pragma once

#include <vector>

#include "trimdie/detmath.hpp"
#include "trimdie/diemodel.hpp"
#include "trimdie/geometry.hpp"
#include "trimdie/image.hpp"

namespace trimdie {

// Linear mm <-> pixel mapping. Pixel centers sit on integer coordinates;
// the viewport center maps to ((width-1)/2, (height-1)/2). Image y runs
// down while mm y runs up.
struct Viewport {
  Vec2 center;            // mm
  double mm_per_px = 1.0;
  int width = 1;
  int height = 1;

  void validate() const;
};

Vec2 mm_to_px(const Viewport& vp, Vec2 q);
Vec2 px_to_mm(const Viewport& vp, Vec2 p);

struct RenderStyle {
  Palette palette;
  int shortcut_radius_px = 25;
  int shortcut_stroke_px = 3;
  int min_region_box_px = 30;  // truth boxes are padded up to this size
};

struct SectionRender {
  RgbImage image;
  std::vector<LabeledBox> truth_boxes;  // "region" first, then "distractor"
};

// Renders a section: white background, gray even-odd polygon fill, 1 px
// black edges, optional red shortcut circle on the target region.
SectionRender render_section(const SectionProfile& profile, const Viewport& vp,
                             bool shortcut_on, const RenderStyle& style = {});

// Magnified crop around an arbitrary center; no shortcut mark, no boxes.
RgbImage render_zoom(const SectionProfile& profile, Vec2 center, double mm_per_px, int size,
                     const RenderStyle& style = {});

// Black outline circle of true diameter 20 mm, centered.
RgbImage render_calibration_circle(double mm_per_px, int size, const RenderStyle& style = {});

}  // namespace trimdie
