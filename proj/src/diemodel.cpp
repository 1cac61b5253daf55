#include "trimdie/diemodel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "trimdie/error.hpp"
#include "trimdie/rng.hpp"

namespace trimdie {

using nlohmann::json;

void ProfileParams::validate() const {
  if (pd <= 0 || ul <= 0 || gl <= 0 || land <= 0 || body_w <= 0 || body_h <= 0)
    throw ParameterError("ProfileParams: all lengths must be strictly positive");
  if (land >= ul) throw ParameterError("ProfileParams: land must be < ul");
  if (distractors < 0 || distractors > 5)
    throw ParameterError("ProfileParams: distractors must lie in [0,5]");
}

ParamRanges ParamRanges::defaults() {
  ParamRanges r;
  r.lo = {5.0, 20.0, 8.0, 2.0, 500.0, 180.0, 2};
  r.hi = {12.0, 40.0, 18.0, 4.5, 900.0, 300.0, 2};
  return r;
}

void ParamRanges::validate() const {
  auto check = [](double lo, double hi, const char* name) {
    if (lo <= 0) throw ParameterError(std::string("ParamRanges: nonpositive minimum for ") + name);
    if (lo > hi) throw ParameterError(std::string("ParamRanges: min > max for ") + name);
  };
  check(lo.pd, hi.pd, "pd");
  check(lo.ul, hi.ul, "ul");
  check(lo.gl, hi.gl, "gl");
  check(lo.land, hi.land, "land");
  check(lo.body_w, hi.body_w, "body_w");
  check(lo.body_h, hi.body_h, "body_h");
  if (lo.distractors < 0 || lo.distractors > hi.distractors || hi.distractors > 5)
    throw ParameterError("ParamRanges: distractor count range invalid");
  // every sample drawn from these ranges must satisfy the profile invariants
  if (hi.land >= lo.ul) throw ParameterError("ParamRanges: land range must stay below ul range");
}

void TrimmingLine::validate() const {
  if (polyline.size() < 2) throw ParameterError("TrimmingLine: polyline needs >= 2 points");
  for (std::size_t i = 1; i < polyline.size(); ++i)
    if (distance(polyline[i - 1], polyline[i]) == 0.0)
      throw ParameterError("TrimmingLine: consecutive points must be distinct");
  profile.validate();
}

double TrimmingLine::arc_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i)
    len += distance(polyline[i - 1], polyline[i]);
  return len;
}

void DieDesign::validate() const {
  bool has_target = false;
  for (const auto& l : trimming_lines) {
    l.validate();
    if (l.is_target) has_target = true;
    for (const auto& p : l.polyline)
      if (!extents.contains(p))
        throw ParameterError("DieDesign: trimming-line vertex outside extents");
  }
  if (!has_target) throw ParameterError("DieDesign: no trimming line marked target");
}

const TrimmingLine& DieDesign::line(const std::string& line_id) const {
  for (const auto& l : trimming_lines)
    if (l.line_id == line_id) return l;
  throw LookupError("DieDesign: unknown line_id " + line_id);
}

const TrimmingLine& DieDesign::target_line() const {
  for (const auto& l : trimming_lines)
    if (l.is_target) return l;
  throw LookupError("DieDesign: no target line");
}

std::string to_string(PolyRole role) {
  switch (role) {
    case PolyRole::upper_die: return "upper_die";
    case PolyRole::blade: return "blade";
    case PolyRole::lower_die: return "lower_die";
    case PolyRole::distractor: return "distractor";
  }
  return "lower_die";
}

PolyRole poly_role_from_string(const std::string& s) {
  if (s == "upper_die") return PolyRole::upper_die;
  if (s == "blade") return PolyRole::blade;
  if (s == "lower_die") return PolyRole::lower_die;
  if (s == "distractor") return PolyRole::distractor;
  throw ParameterError("unknown polygon role: " + s);
}

Aabb2 SectionProfile::target_box() const {
  Aabb2 box;
  for (const auto& p : truth_points) box.expand(p);
  return box;
}

DieDesign generate_design(std::uint64_t seed, int n_lines, const ParamRanges& ranges) {
  if (n_lines < 1) throw ParameterError("generate_design: n_lines must be >= 1");
  ranges.validate();

  Rng rng(mix_seed(seed, 0x5ec71005));
  DieDesign design;
  design.design_id = "die_" + std::to_string(seed);
  design.seed = seed;

  const int target_idx = static_cast<int>(rng.uniform_int(0, n_lines - 1));
  constexpr int kSamples = 40;

  for (int i = 0; i < n_lines; ++i) {
    TrimmingLine line;
    line.line_id = "line_" + std::to_string(i);
    line.is_target = (i == target_idx);

    ProfileParams p;
    p.pd = rng.uniform(ranges.lo.pd, ranges.hi.pd);
    p.ul = rng.uniform(ranges.lo.ul, ranges.hi.ul);
    p.gl = rng.uniform(ranges.lo.gl, ranges.hi.gl);
    p.land = rng.uniform(ranges.lo.land, ranges.hi.land);
    p.body_w = rng.uniform(ranges.lo.body_w, ranges.hi.body_w);
    p.body_h = rng.uniform(ranges.lo.body_h, ranges.hi.body_h);
    p.distractors = static_cast<int>(rng.uniform_int(ranges.lo.distractors, ranges.hi.distractors));
    line.profile = p;

    // Smooth planar curve: two sine modes sampled piecewise-linearly,
    // lifted to 3D with mild height variation.
    const double len = rng.uniform(400.0, 800.0);
    const double a1 = rng.uniform(20.0, 60.0);
    const double a2 = rng.uniform(5.0, 25.0);
    const double ph1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ph2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double zb = rng.uniform(38.0, 52.0);
    const double za = rng.uniform(3.0, 8.0);
    const double phz = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double y_base = 250.0 * i;

    for (int j = 0; j < kSamples; ++j) {
      const double s = static_cast<double>(j) / (kSamples - 1);
      const double x = (s - 0.5) * len;
      const double y = y_base + a1 * std::sin(2.0 * std::numbers::pi * s + ph1) +
                       a2 * std::sin(4.0 * std::numbers::pi * s + ph2);
      const double z = zb + za * std::sin(2.0 * std::numbers::pi * s + phz);
      line.polyline.push_back({x, y, z});
    }
    design.trimming_lines.push_back(std::move(line));
  }

  Aabb3 ext;
  for (const auto& l : design.trimming_lines)
    for (const auto& p : l.polyline) ext.expand(p);
  // room for the sectioned geometry around any spot
  ext.inflate({1400.0, 1400.0, 600.0});
  design.extents = ext;

  design.validate();
  return design;
}

std::vector<InspectionSpot> place_spots(const DieDesign& design, const std::string& line_id,
                                        int n_spots) {
  if (n_spots < 1) throw ParameterError("place_spots: n_spots must be >= 1");
  const TrimmingLine& line = design.line(line_id);

  const double total = line.arc_length();
  if (total <= 0.0) throw GeometryError("place_spots: degenerate polyline");

  // cumulative arc lengths per vertex
  std::vector<double> cum(line.polyline.size(), 0.0);
  for (std::size_t i = 1; i < line.polyline.size(); ++i)
    cum[i] = cum[i - 1] + distance(line.polyline[i - 1], line.polyline[i]);

  std::vector<InspectionSpot> spots;
  spots.reserve(static_cast<std::size_t>(n_spots));
  for (int k = 0; k < n_spots; ++k) {
    // half-interval padding keeps spots off the endpoints
    const double s = (k + 0.5) * total / n_spots;
    std::size_t seg = 1;
    while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
    const Vec3 a = line.polyline[seg - 1];
    const Vec3 b = line.polyline[seg];
    const double seg_len = cum[seg] - cum[seg - 1];
    const double t = seg_len > 0.0 ? (s - cum[seg - 1]) / seg_len : 0.0;

    InspectionSpot spot;
    spot.line_id = line_id;
    spot.spot_index = k;
    spot.position = a + (b - a) * t;
    spot.tangent = normalized(b - a);
    const double horiz = std::hypot(spot.tangent.x, spot.tangent.y);
    if (horiz < 1e-9)
      throw GeometryError("place_spots: vertical tangent, no horizontal section normal");
    spot.section_normal = normalized({-spot.tangent.y / horiz, spot.tangent.x / horiz, 0.0});
    spots.push_back(spot);
  }
  return spots;
}

namespace {

TaggedPolygon rect(PolyRole role, int group, double x1, double y1, double x2, double y2) {
  TaggedPolygon poly;
  poly.role = role;
  poly.group = group;
  poly.vertices = {{x1, y1}, {x2, y1}, {x2, y2}, {x1, y2}};  // CCW, y up
  return poly;
}

// Appends the junction-local geometry for one set of profile params with the
// cutting edge at (rx, ry). full = main die (wide bodies); otherwise reduced
// stubs are used for distractor copies.
void append_junction(std::vector<TaggedPolygon>& out, const ProfileParams& p, double rx,
                     double ry, bool full, int group) {
  const PolyRole upper = full ? PolyRole::upper_die : PolyRole::distractor;
  const PolyRole blade = full ? PolyRole::blade : PolyRole::distractor;
  const PolyRole lower = full ? PolyRole::lower_die : PolyRole::distractor;

  const double blade_w = 0.45 * p.gl;
  const double notch = 0.8 * p.gl;

  const double up_l = full ? 0.45 * p.body_w : 2.5 * p.gl;
  const double up_r = full ? 0.35 * p.body_w : 1.5 * p.gl;
  const double up_h = full ? p.body_h : 1.5 * p.gl;
  const double low_l = full ? 0.55 * p.body_w : 2.5 * p.gl;
  const double depth = full ? 130.0 : 2.2 * p.gl;
  const double post_w = full ? 120.0 : 1.6 * p.gl;

  out.push_back(rect(blade, group, rx, ry - p.pd, rx + blade_w, ry + p.ul));
  out.push_back(rect(upper, group, rx - up_l, ry + p.ul, rx + up_r, ry + p.ul + up_h));

  // lower-die main body: land face below the cutting edge, then a relief
  // notch stepping back before the body continues down
  TaggedPolygon body;
  body.role = lower;
  body.group = group;
  body.vertices = {{rx - low_l, ry - depth}, {rx - notch, ry - depth}, {rx - notch, ry - p.land},
                   {rx, ry - p.land},        {rx, ry},                 {rx - low_l, ry}};
  out.push_back(std::move(body));

  // scrap-side post across the gap
  out.push_back(rect(lower, group, rx + p.gl, ry - depth, rx + p.gl + post_w, ry - p.land));

  if (full) {
    // base plate under both lower-die parts
    out.push_back(rect(lower, group, rx - 0.6 * p.body_w, ry - 165.0, rx + p.gl + 150.0,
                       ry - 130.0));
  }
}

std::array<Vec2, 5> junction_points(const ProfileParams& p, double rx, double ry) {
  return {Vec2{rx, ry - p.pd},      // #1 blade tip
          Vec2{rx, ry + p.ul},      // #2 blade / upper-body reference
          Vec2{rx, ry - p.land},    // #3 relief-step corner, shear side
          Vec2{rx, ry},             // #4 lower-die cutting edge
          Vec2{rx + p.gl, ry - p.land}};  // #5 relief-step corner across the gap
}

}  // namespace

SectionProfile section_at(const DieDesign& design, const InspectionSpot& spot) {
  const TrimmingLine& line = design.line(spot.line_id);
  if (!design.extents.contains(spot.position))
    throw GeometryError("section_at: spot outside design extents");

  const ProfileParams& p = line.profile;
  const double y0 = spot.position.z;

  SectionProfile profile;
  profile.truth_points = junction_points(p, 0.0, y0);
  profile.truth_lengths = {p.pd, p.ul, p.gl};
  profile.target_center = profile.target_box().center();

  append_junction(profile.polygons, p, 0.0, y0, true, 0);

  // Distractor copies: parameter jitter of +-20 %, placed in lateral slots
  // well clear of the die body and of the target region.
  Rng rng(mix_seed(design.seed, mix_seed(std::hash<std::string>{}(spot.line_id),
                                         static_cast<std::uint64_t>(spot.spot_index))));
  static constexpr double kSlots[5] = {420.0, -660.0, 680.0, -880.0, 900.0};
  for (int d = 0; d < p.distractors; ++d) {
    ProfileParams q = p;
    q.pd = p.pd * rng.uniform(0.8, 1.2);
    q.ul = p.ul * rng.uniform(0.8, 1.2);
    q.gl = p.gl * rng.uniform(0.8, 1.2);
    q.land = p.land * rng.uniform(0.8, 1.2);

    const double x_off = kSlots[d] + rng.uniform(-25.0, 25.0);
    const double y_off = rng.uniform(-60.0, 60.0);
    // place so the junction-point box center lands at the slot offset
    const Vec2 want = profile.target_center + Vec2{x_off, y_off};
    const double rx = want.x - q.gl * 0.5;
    const double ry = want.y - (q.ul - q.pd) * 0.5;

    append_junction(profile.polygons, q, rx, ry, false, d + 1);
    Aabb2 box;
    for (const auto& pt : junction_points(q, rx, ry)) box.expand(pt);
    profile.distractor_centers.push_back(box.center());
    profile.distractor_boxes.push_back(box);
  }
  return profile;
}

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParameterError("die file: bad 3D point");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string design_to_json(const DieDesign& design) {
  json lines = json::array();
  for (const auto& l : design.trimming_lines) {
    json poly = json::array();
    for (const auto& p : l.polyline) poly.push_back(vec3_to_json(p));
    lines.push_back({{"line_id", l.line_id},
                     {"is_target", l.is_target},
                     {"polyline", poly},
                     {"profile",
                      {{"pd", l.profile.pd},
                       {"ul", l.profile.ul},
                       {"gl", l.profile.gl},
                       {"land", l.profile.land},
                       {"body_w", l.profile.body_w},
                       {"body_h", l.profile.body_h},
                       {"distractors", l.profile.distractors}}}});
  }
  json j = {{"design_id", design.design_id},
            {"seed", design.seed},
            {"extents", {{"lo", vec3_to_json(design.extents.lo)}, {"hi", vec3_to_json(design.extents.hi)}}},
            {"trimming_lines", lines}};
  return j.dump(2) + "\n";
}

DieDesign design_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DecodeError(std::string("die file: ") + e.what());
  }
  try {
    DieDesign d;
    d.design_id = j.at("design_id").get<std::string>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.extents.lo = vec3_from_json(j.at("extents").at("lo"));
    d.extents.hi = vec3_from_json(j.at("extents").at("hi"));
    for (const auto& jl : j.at("trimming_lines")) {
      TrimmingLine l;
      l.line_id = jl.at("line_id").get<std::string>();
      l.is_target = jl.at("is_target").get<bool>();
      for (const auto& jp : jl.at("polyline")) l.polyline.push_back(vec3_from_json(jp));
      const auto& pr = jl.at("profile");
      l.profile.pd = pr.at("pd").get<double>();
      l.profile.ul = pr.at("ul").get<double>();
      l.profile.gl = pr.at("gl").get<double>();
      l.profile.land = pr.at("land").get<double>();
      l.profile.body_w = pr.at("body_w").get<double>();
      l.profile.body_h = pr.at("body_h").get<double>();
      l.profile.distractors = pr.at("distractors").get<int>();
      d.trimming_lines.push_back(std::move(l));
    }
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("die file: ") + e.what());
  }
}

void save_design(const DieDesign& design, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("die file: cannot open for writing: " + path);
  f << design_to_json(design);
  if (!f) throw Error("die file: write failed: " + path);
}

DieDesign load_design(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("die file: cannot open for reading: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return design_from_json(ss.str());
}

}  // namespace trimdie
