#include <cmath>
#include <set>

#include "doctest.h"
#include "trimdie/diemodel.hpp"
#include "trimdie/error.hpp"

using namespace trimdie;

namespace {

// straight 100 mm line along x at height z = 40
DieDesign straight_line_design() {
  DieDesign d;
  d.design_id = "test";
  d.seed = 0;
  TrimmingLine line;
  line.line_id = "L";
  line.is_target = true;
  line.polyline = {{0, 0, 40}, {60, 0, 40}, {100, 0, 40}};
  line.profile = ProfileParams{8, 30, 12, 5, 700, 240, 0};
  d.trimming_lines.push_back(line);
  for (const auto& p : d.trimming_lines[0].polyline) d.extents.expand(p);
  d.extents.inflate({1400, 1400, 600});
  return d;
}

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a * 0.5;
}

}  // namespace

TEST_CASE("generate_design is deterministic and seed-sensitive") {
  const ParamRanges ranges = ParamRanges::defaults();
  const DieDesign a = generate_design(7, 3, ranges);
  const DieDesign b = generate_design(7, 3, ranges);
  CHECK(design_to_json(a) == design_to_json(b));
  CHECK(a.trimming_lines.size() == 3);

  int targets = 0;
  for (const auto& l : a.trimming_lines) targets += l.is_target ? 1 : 0;
  CHECK(targets == 1);

  const DieDesign c = generate_design(8, 3, ranges);
  CHECK(design_to_json(a) != design_to_json(c));
  bool differs = false;
  for (std::size_t i = 0; i < 3; ++i)
    differs = differs || a.trimming_lines[i].profile.pd != c.trimming_lines[i].profile.pd;
  CHECK(differs);
}

TEST_CASE("generate_design validates ranges") {
  ParamRanges bad = ParamRanges::defaults();
  bad.lo.pd = 13.0;  // min > max
  CHECK_THROWS_AS(generate_design(1, 3, bad), ParameterError);

  bad = ParamRanges::defaults();
  bad.lo.gl = -1.0;
  CHECK_THROWS_AS(generate_design(1, 3, bad), ParameterError);

  bad = ParamRanges::defaults();
  bad.lo.land = 25.0;  // land range reaches ul range
  bad.hi.land = 25.0;
  CHECK_THROWS_AS(generate_design(1, 3, bad), ParameterError);

  CHECK_THROWS_AS(generate_design(1, 0, ParamRanges::defaults()), ParameterError);
}

TEST_CASE("place_spots arc-length oracle on a straight line") {
  const DieDesign d = straight_line_design();
  const auto spots = place_spots(d, "L", 5);
  REQUIRE(spots.size() == 5);
  const double expected[5] = {10, 30, 50, 70, 90};
  for (int i = 0; i < 5; ++i) {
    CHECK(spots[i].position.x == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(spots[i].position.y == 0.0);
    CHECK(spots[i].spot_index == i);
  }

  const auto single = place_spots(d, "L", 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].position.x == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("place_spots accepts the 5-50 operating range") {
  const DieDesign d = generate_design(3, 2, ParamRanges::defaults());
  const std::string id = d.target_line().line_id;
  for (int n = 5; n <= 50; ++n) CHECK(place_spots(d, id, n).size() == static_cast<std::size_t>(n));
}

TEST_CASE("place_spots errors") {
  const DieDesign d = straight_line_design();
  CHECK_THROWS_AS(place_spots(d, "nope", 5), LookupError);
  CHECK_THROWS_AS(place_spots(d, "L", 0), ParameterError);

  // zero-length polyline (built by hand, bypassing line validation)
  DieDesign degenerate = d;
  degenerate.trimming_lines[0].polyline = {{5, 5, 40}, {5, 5, 40}};
  CHECK_THROWS_AS(place_spots(degenerate, "L", 3), GeometryError);
}

TEST_CASE("spot frames are orthonormal and evenly spaced") {
  const DieDesign d = generate_design(5, 3, ParamRanges::defaults());
  const std::string id = d.target_line().line_id;
  const auto spots = place_spots(d, id, 20);
  for (const auto& s : spots) {
    CHECK(std::abs(length(s.tangent) - 1.0) < 1e-9);
    CHECK(std::abs(length(s.section_normal) - 1.0) < 1e-9);
    CHECK(std::abs(dot(s.tangent, s.section_normal)) < 1e-9);
    CHECK(s.section_normal.z == 0.0);
  }

  // consecutive spots differ by exactly total/n in arc length; recover each
  // spot's arc length by projecting onto the polyline
  const auto& polyline = d.line(id).polyline;
  std::vector<double> cum(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i)
    cum[i] = cum[i - 1] + distance(polyline[i - 1], polyline[i]);
  auto arc_of = [&](Vec3 p) {
    double best = 1e300, arc = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) {
      const Vec3 a = polyline[i - 1];
      const Vec3 b = polyline[i];
      const double len2 = dot(b - a, b - a);
      const double t = std::clamp(dot(p - a, b - a) / len2, 0.0, 1.0);
      const Vec3 q = a + (b - a) * t;
      const double dist = distance(p, q);
      if (dist < best) {
        best = dist;
        arc = cum[i - 1] + t * std::sqrt(len2);
      }
    }
    return arc;
  };

  const double total = d.line(id).arc_length();
  const double step = total / 20.0;
  for (std::size_t i = 1; i < spots.size(); ++i) {
    const double diff = arc_of(spots[i].position) - arc_of(spots[i - 1].position);
    CHECK(std::abs(diff - step) < 1e-9);
  }
  CHECK(arc_of(spots[0].position) == doctest::Approx(step * 0.5).epsilon(1e-9));
}

TEST_CASE("section_at reproduces the profile parameters exactly") {
  DieDesign d = straight_line_design();
  const auto spots = place_spots(d, "L", 3);
  const SectionProfile profile = section_at(d, spots[1]);

  CHECK(profile.truth_lengths.pd == 8.0);
  CHECK(profile.truth_lengths.ul == 30.0);
  CHECK(profile.truth_lengths.gl == 12.0);

  // point-pair identities straight from the construction
  const auto& tp = profile.truth_points;
  CHECK(std::abs(tp[0].y - tp[3].y) == 8.0);
  CHECK(std::abs(tp[1].y - tp[3].y) == 30.0);
  CHECK(std::abs(tp[4].x - tp[2].x) == 12.0);
  CHECK(profile.distractor_centers.empty());
}

TEST_CASE("section point-pair identities hold across random seeds") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const DieDesign d = generate_design(seed, 2, ParamRanges::defaults());
    const auto& line = d.target_line();
    const auto spots = place_spots(d, line.line_id, 2);
    const SectionProfile profile = section_at(d, spots[0]);
    const auto& tp = profile.truth_points;
    CHECK(std::abs(tp[0].y - tp[3].y) == doctest::Approx(line.profile.pd).epsilon(1e-12));
    CHECK(std::abs(tp[1].y - tp[3].y) == doctest::Approx(line.profile.ul).epsilon(1e-12));
    CHECK(std::abs(tp[4].x - tp[2].x) == doctest::Approx(line.profile.gl).epsilon(1e-12));
    CHECK(profile.truth_lengths.pd == line.profile.pd);
    CHECK(profile.truth_lengths.ul == line.profile.ul);
    CHECK(profile.truth_lengths.gl == line.profile.gl);
  }
}

TEST_CASE("section distractor count and placement") {
  DieDesign d = straight_line_design();
  d.trimming_lines[0].profile.distractors = 2;
  const auto spots = place_spots(d, "L", 2);
  const SectionProfile profile = section_at(d, spots[0]);

  CHECK(profile.distractor_centers.size() == 2);
  CHECK(profile.distractor_boxes.size() == 2);
  std::set<int> groups;
  for (const auto& poly : profile.polygons) groups.insert(poly.group);
  CHECK(groups == std::set<int>{0, 1, 2});

  for (const auto& c : profile.distractor_centers)
    CHECK(distance(c, profile.target_center) >= 60.0);

  // maximum supported count still places every copy clear of the target
  d.trimming_lines[0].profile.distractors = 5;
  const SectionProfile crowded = section_at(d, spots[0]);
  CHECK(crowded.distractor_centers.size() == 5);
  for (std::size_t i = 0; i < crowded.distractor_centers.size(); ++i) {
    CHECK(distance(crowded.distractor_centers[i], crowded.target_center) >= 60.0);
    for (std::size_t j = i + 1; j < crowded.distractor_centers.size(); ++j)
      CHECK(distance(crowded.distractor_centers[i], crowded.distractor_centers[j]) >= 150.0);
  }
}

TEST_CASE("section polygons are simple with consistent winding") {
  DieDesign d = straight_line_design();
  d.trimming_lines[0].profile.distractors = 3;
  const auto spots = place_spots(d, "L", 1);
  const SectionProfile profile = section_at(d, spots[0]);
  for (const auto& poly : profile.polygons) {
    CHECK(poly.vertices.size() >= 4);
    CHECK(signed_area(poly.vertices) > 0.0);  // counterclockwise, y up
  }
}

TEST_CASE("section_at determinism") {
  const DieDesign d = generate_design(9, 3, ParamRanges::defaults());
  const auto spots = place_spots(d, d.target_line().line_id, 4);
  const SectionProfile a = section_at(d, spots[2]);
  const SectionProfile b = section_at(d, spots[2]);
  REQUIRE(a.polygons.size() == b.polygons.size());
  for (std::size_t i = 0; i < a.polygons.size(); ++i) {
    REQUIRE(a.polygons[i].vertices.size() == b.polygons[i].vertices.size());
    for (std::size_t j = 0; j < a.polygons[i].vertices.size(); ++j)
      CHECK(a.polygons[i].vertices[j] == b.polygons[i].vertices[j]);
  }
  for (int i = 0; i < 5; ++i) CHECK(a.truth_points[i] == b.truth_points[i]);
}

TEST_CASE("section_at rejects spots outside the extents") {
  const DieDesign d = straight_line_design();
  InspectionSpot spot;
  spot.line_id = "L";
  spot.position = {5000, 5000, 5000};
  spot.tangent = {1, 0, 0};
  spot.section_normal = {0, 1, 0};
  CHECK_THROWS_AS(section_at(d, spot), GeometryError);
}

TEST_CASE("die-model file round trip") {
  const DieDesign d = generate_design(21, 4, ParamRanges::defaults());
  const std::string text = design_to_json(d);
  const DieDesign back = design_from_json(text);
  CHECK(design_to_json(back) == text);
  CHECK(back.design_id == d.design_id);
  CHECK(back.trimming_lines.size() == 4);

  CHECK_THROWS_AS(design_from_json("{not json"), DecodeError);
  CHECK_THROWS_AS(design_from_json("{}"), DecodeError);
}

TEST_CASE("profile invariants") {
  ProfileParams p{8, 30, 12, 5, 700, 240, 0};
  CHECK_NOTHROW(p.validate());
  p.land = 30.0;  // land >= ul
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = ProfileParams{0, 30, 12, 5, 700, 240, 0};
  CHECK_THROWS_AS(p.validate(), ParameterError);

  TrimmingLine line;
  line.line_id = "x";
  line.polyline = {{0, 0, 0}};
  CHECK_THROWS_AS(line.validate(), ParameterError);
  line.polyline = {{0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(line.validate(), ParameterError);
}
