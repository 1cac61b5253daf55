#pragma once

#include <array>
#include <optional>
#include <string>

#include "trimdie/geometry.hpp"
#include "trimdie/image.hpp"

namespace trimdie {

// mm-per-pixel calibration recovered from the rendered 20 mm circle.
struct ScaleFactor {
  double gamma = 0.0;     // mm per px, = d_circle / px_circle
  int px_circle = 0;      // measured diameter, px
  double d_circle = 20.0; // mm
};

// px_circle is the horizontal black extent on the row through the circle
// centroid; gamma = 20 / px_circle.
ScaleFactor scale_factor(const RgbImage& circle_img);

struct Measurements {
  double pd = 0.0;
  double ul = 0.0;
  double gl = 0.0;     // mm
  double pd_px = 0.0;
  double ul_px = 0.0;
  double gl_px = 0.0;  // raw pixel distances
  std::string source_spot;
};

// points[i] is the detected center of target point #(i+1), px. All five
// must be present; PD/UL are vertical pairs, GL horizontal (Euclidean
// distances behind the flag).
Measurements measure_lengths(const std::array<std::optional<Vec2>, 5>& points,
                             const ScaleFactor& gamma, bool euclidean = false);

// |measured - truth| / truth * 100
double relative_error(double measured, double truth);

struct LengthTolerance {
  double nominal = 0.0;
  double lower = 0.0;  // <= 0
  double upper = 0.0;  // >= 0
};

struct ToleranceSpec {
  bool relative_mode = true;   // judge on relative error instead of bounds
  double max_rel_pct = 5.0;
  LengthTolerance pd, ul, gl;

  void validate() const;
};

struct Judgment {
  bool pd_pass = false;
  bool ul_pass = false;
  bool gl_pass = false;
  bool overall = false;
};

Judgment judge(const Measurements& m, const ToleranceSpec& spec);

struct FailureModel {
  double p_point = 0.983;  // per-endpoint detection probability
  int n_points = 5;
  int redundancy_k = 2;    // inspection spots per location

  void validate() const;
};

// Probability that all n_points endpoints are detected at one spot.
double spot_success_prob(const FailureModel& model);

// All redundant spots at a location must fail for the location to fail.
double line_failure_rate(double spot_failure, int redundancy_k);

}  // namespace trimdie
