#include <cmath>
#include <set>

#include "doctest.h"
#include "trimdie/error.hpp"
#include "trimdie/raster.hpp"
#include "trimdie/rng.hpp"

using namespace trimdie;

namespace {

DieDesign test_design(int distractors = 0) {
  DieDesign d;
  d.design_id = "test";
  d.seed = 3;
  TrimmingLine line;
  line.line_id = "L";
  line.is_target = true;
  line.polyline = {{0, 0, 40}, {100, 0, 40}};
  line.profile = ProfileParams{8, 30, 12, 4, 700, 240, distractors};
  d.trimming_lines.push_back(line);
  for (const auto& p : d.trimming_lines[0].polyline) d.extents.expand(p);
  d.extents.inflate({1400, 1400, 600});
  return d;
}

SectionProfile test_profile(int distractors = 0) {
  const DieDesign d = test_design(distractors);
  return section_at(d, place_spots(d, "L", 1)[0]);
}

Viewport section_viewport(const SectionProfile& profile) {
  return {profile.target_center, 1.25, 1880, 933};
}

// measured diameter: extreme black pixels on the row through the centroid
int scan_diameter(const RgbImage& img) {
  double sx = 0, sy = 0;
  long count = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) == Rgb{0, 0, 0}) {
        sx += x;
        sy += y;
        ++count;
      }
  REQUIRE(count > 0);
  const int row = static_cast<int>(std::lround(sy / count));
  int lo = -1, hi = -1;
  for (int x = 0; x < img.width; ++x)
    if (img.at(x, row) == Rgb{0, 0, 0}) {
      if (lo < 0) lo = x;
      hi = x;
    }
  return hi - lo + 1;
}

}  // namespace

TEST_CASE("viewport transforms") {
  Viewport vp{{12.5, -3.0}, 0.25, 640, 480};
  const Vec2 center_px = mm_to_px(vp, vp.center);
  CHECK(center_px.x == doctest::Approx((640 - 1) * 0.5));
  CHECK(center_px.y == doctest::Approx((480 - 1) * 0.5));

  // round trip through pixel quantization stays within one pixel
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 q{rng.uniform(-60, 60), rng.uniform(-50, 50)};
    const Vec2 p = mm_to_px(vp, q);
    const Vec2 rounded{std::round(p.x), std::round(p.y)};
    const Vec2 back = px_to_mm(vp, rounded);
    CHECK(std::abs(back.x - q.x) <= vp.mm_per_px);
    CHECK(std::abs(back.y - q.y) <= vp.mm_per_px);
  }

  // translating the center shifts every projection by the same offset
  Viewport shifted = vp;
  shifted.center = vp.center + Vec2{5.0, -2.5};
  const Vec2 delta = mm_to_px(shifted, Vec2{0, 0}) - mm_to_px(vp, Vec2{0, 0});
  for (int i = 0; i < 50; ++i) {
    const Vec2 q{rng.uniform(-60, 60), rng.uniform(-50, 50)};
    const Vec2 d = mm_to_px(shifted, q) - mm_to_px(vp, q);
    CHECK(d.x == doctest::Approx(delta.x).epsilon(1e-12));
    CHECK(d.y == doctest::Approx(delta.y).epsilon(1e-12));
  }

  // halving mm_per_px doubles projected distances
  Viewport fine = vp;
  fine.mm_per_px = vp.mm_per_px / 2.0;
  const Vec2 a{3.0, 4.0}, b{-7.0, 9.0};
  const Vec2 d1 = mm_to_px(vp, a) - mm_to_px(vp, b);
  const Vec2 d2 = mm_to_px(fine, a) - mm_to_px(fine, b);
  CHECK(d2.x == doctest::Approx(2.0 * d1.x).epsilon(1e-12));
  CHECK(d2.y == doctest::Approx(2.0 * d1.y).epsilon(1e-12));

  CHECK_THROWS_AS((Viewport{{0, 0}, 0.0, 10, 10}).validate(), ParameterError);
}

TEST_CASE("render_section produces the full-size section image") {
  const SectionProfile profile = test_profile();
  const SectionRender render = render_section(profile, section_viewport(profile), true);
  CHECK(render.image.width == 1880);
  CHECK(render.image.height == 933);
  REQUIRE(!render.truth_boxes.empty());
  CHECK(render.truth_boxes[0].label == "region");
  CHECK(render.truth_boxes[0].box.w >= 30.0);
  CHECK(render.truth_boxes[0].box.h >= 30.0);
}

TEST_CASE("empty profile renders background only") {
  SectionProfile empty;
  const SectionRender render = render_section(empty, {{0, 0}, 1.0, 64, 48}, true);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) CHECK(render.image.at(x, y) == Rgb{255, 255, 255});
  CHECK(render.truth_boxes.empty());
}

TEST_CASE("shortcut mark only touches the circle annulus") {
  const SectionProfile profile = test_profile();
  const Viewport vp = section_viewport(profile);
  const RgbImage with = render_section(profile, vp, true).image;
  const RgbImage without = render_section(profile, vp, false).image;

  const Vec2 c = mm_to_px(vp, profile.target_center);
  const double cx = std::round(c.x), cy = std::round(c.y);
  int diffs = 0;
  for (int y = 0; y < with.height; ++y) {
    for (int x = 0; x < with.width; ++x) {
      if (with.at(x, y) == without.at(x, y)) continue;
      ++diffs;
      CHECK(with.at(x, y) == Rgb{255, 0, 0});
      const double d = std::hypot(x - cx, y - cy);
      CHECK(d >= 25.0 - 1.6);
      CHECK(d <= 25.0 + 1.6);
    }
  }
  CHECK(diffs > 100);  // the mark exists
}

TEST_CASE("only palette colors appear") {
  const SectionProfile profile = test_profile(2);
  const Viewport vp = section_viewport(profile);

  auto distinct = [](const RgbImage& img) {
    std::set<std::array<std::uint8_t, 3>> colors;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const Rgb c = img.at(x, y);
        colors.insert({c.r, c.g, c.b});
      }
    return colors;
  };

  const auto with = distinct(render_section(profile, vp, true).image);
  CHECK(with.size() <= 4);
  CHECK(with.count({255, 0, 0}) == 1);
  const auto without = distinct(render_section(profile, vp, false).image);
  CHECK(without.size() <= 3);
  CHECK(without.count({255, 0, 0}) == 0);
}

TEST_CASE("rendering is deterministic") {
  const SectionProfile profile = test_profile(2);
  const Viewport vp = section_viewport(profile);
  const SectionRender a = render_section(profile, vp, true);
  const SectionRender b = render_section(profile, vp, true);
  CHECK(a.image == b.image);
  REQUIRE(a.truth_boxes.size() == b.truth_boxes.size());
  for (std::size_t i = 0; i < a.truth_boxes.size(); ++i) {
    CHECK(a.truth_boxes[i].label == b.truth_boxes[i].label);
    CHECK(a.truth_boxes[i].box.cx == b.truth_boxes[i].box.cx);
  }
}

TEST_CASE("clipping the target region is an error") {
  const SectionProfile profile = test_profile();
  Viewport vp{profile.target_center + Vec2{18.0, 0.0}, 1.25, 40, 40};
  CHECK_THROWS_AS(render_section(profile, vp, true), RenderError);
}

TEST_CASE("render_zoom keeps truth points inside the crop") {
  const SectionProfile profile = test_profile();
  const double mpp = 10.0 / 107.0;
  const RgbImage crop = render_zoom(profile, profile.target_center, mpp, 640);
  CHECK(crop.width == 640);
  const Viewport vp{profile.target_center, mpp, 640, 640};
  for (const auto& tp : profile.truth_points) {
    const Vec2 p = mm_to_px(vp, tp);
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 639.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 639.0);
  }
}

TEST_CASE("render_zoom of a blank area is background only") {
  const SectionProfile profile = test_profile();
  const RgbImage crop = render_zoom(profile, profile.target_center + Vec2{5000, 5000}, 0.1, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) CHECK(crop.at(x, y) == Rgb{255, 255, 255});
}

TEST_CASE("render_zoom rejects a partially clipped target region") {
  const SectionProfile profile = test_profile();
  CHECK_THROWS_AS(render_zoom(profile, profile.target_center + Vec2{25.0, 0.0}, 0.1, 400),
                  RenderError);
}

TEST_CASE("calibration circle diameters") {
  CHECK(std::abs(scan_diameter(render_calibration_circle(0.05, 420)) - 400) <= 1);
  CHECK(std::abs(scan_diameter(render_calibration_circle(0.1, 240)) - 200) <= 1);
  CHECK_THROWS_AS(render_calibration_circle(0.05, 200), ConfigError);
  CHECK_THROWS_AS(render_calibration_circle(0.0, 200), ConfigError);
}

TEST_CASE("calibration circle diameter bound across the zoom range") {
  Rng rng(23);
  for (int i = 0; i < 12; ++i) {
    const double mpp = rng.uniform(0.01, 0.2);
    const int size = static_cast<int>(std::ceil(20.0 / mpp)) + 8;
    const int d = scan_diameter(render_calibration_circle(mpp, size));
    CHECK(std::abs(d * mpp - 20.0) <= 2.0 * mpp);
  }
}

TEST_CASE("truth-point pixel distances match mm distances") {
  const SectionProfile profile = test_profile();
  const Viewport vp = section_viewport(profile);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const Vec2 pi = mm_to_px(vp, profile.truth_points[i]);
      const Vec2 pj = mm_to_px(vp, profile.truth_points[j]);
      const Vec2 ri{std::round(pi.x), std::round(pi.y)};
      const Vec2 rj{std::round(pj.x), std::round(pj.y)};
      const double px_dist = distance(ri, rj) * vp.mm_per_px;
      const double mm_dist = distance(profile.truth_points[i], profile.truth_points[j]);
      CHECK(std::abs(px_dist - mm_dist) <= 2.0 * vp.mm_per_px);
    }
  }
}
