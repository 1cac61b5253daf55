#pragma once
#define TRIMDIE_DIEMODEL_INCLUDED 1

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trimdie/geometry.hpp"

namespace trimdie {

// Cross-section design variables of one trimming line (all mm).
// land is the straight cutting-land height below the lower-die edge and
// must stay below ul (and below pd for unambiguous corner ordering).
struct ProfileParams {
  double pd = 8.0;      // penetration depth
  double ul = 30.0;     // upper blade length (#2-#4 distance)
  double gl = 12.0;     // gap length
  double land = 5.0;    // cutting-land height
  double body_w = 700;  // die-body width
  double body_h = 240;  // die-body height
  int distractors = 0;  // non-target junction copies per section

  void validate() const;
};

struct ParamRanges {
  ProfileParams lo;
  ProfileParams hi;

  static ParamRanges defaults();
  void validate() const;
};

struct TrimmingLine {
  std::string line_id;
  std::vector<Vec3> polyline;  // ordered 3D points, mm
  bool is_target = false;
  ProfileParams profile;

  void validate() const;
  double arc_length() const;
};

struct DieDesign {
  std::string design_id;
  std::uint64_t seed = 0;
  Aabb3 extents;
  std::vector<TrimmingLine> trimming_lines;

  void validate() const;
  const TrimmingLine& line(const std::string& line_id) const;
  const TrimmingLine& target_line() const;
};

struct InspectionSpot {
  std::string line_id;
  int spot_index = 0;
  Vec3 position;
  Vec3 tangent;         // unit
  Vec3 section_normal;  // unit, horizontal, perpendicular to tangent
};

enum class PolyRole { upper_die, blade, lower_die, distractor };

std::string to_string(PolyRole role);
PolyRole poly_role_from_string(const std::string& s);

struct TaggedPolygon {
  PolyRole role = PolyRole::lower_die;
  int group = 0;  // 0 = main die, 1.. = distractor index
  std::vector<Vec2> vertices;  // closed, consistent winding, mm
};

struct TruthLengths {
  double pd = 0.0;
  double ul = 0.0;
  double gl = 0.0;
};

// Front-view aligned 2D cross-section with exact ground truth.
// truth_points[i] is target point #(i+1).
struct SectionProfile {
  std::vector<TaggedPolygon> polygons;
  std::array<Vec2, 5> truth_points;
  TruthLengths truth_lengths;
  Vec2 target_center;
  std::vector<Vec2> distractor_centers;

  // Tight mm box around the five target points.
  Aabb2 target_box() const;
  // Junction-point box of distractor i, analogous to target_box().
  std::vector<Aabb2> distractor_boxes;
};

DieDesign generate_design(std::uint64_t seed, int n_lines, const ParamRanges& ranges);

std::vector<InspectionSpot> place_spots(const DieDesign& design, const std::string& line_id,
                                        int n_spots);

SectionProfile section_at(const DieDesign& design, const InspectionSpot& spot);

// Die-model file format (JSON document, see README).
std::string design_to_json(const DieDesign& design);
DieDesign design_from_json(const std::string& text);
void save_design(const DieDesign& design, const std::string& path);
DieDesign load_design(const std::string& path);

}  // namespace trimdie
