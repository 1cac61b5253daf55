#include "trimdie/measure.hpp"

#include <cmath>
#include <vector>

#include "trimdie/error.hpp"

namespace trimdie {

namespace {

constexpr Rgb kBlack{0, 0, 0};

// 8-connected component count over black pixels, plus the centroid.
int count_black_components(const RgbImage& img, double& centroid_x, double& centroid_y) {
  std::vector<int> comp(static_cast<std::size_t>(img.width) * img.height, -1);
  std::vector<std::pair<int, int>> stack;
  int n_components = 0;
  long count = 0;
  double sx = 0.0, sy = 0.0;

  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) != kBlack) continue;
      count += 1;
      sx += x;
      sy += y;
      const std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
      if (comp[idx] >= 0) continue;
      const int id = n_components++;
      comp[idx] = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (!img.in_bounds(nx, ny) || img.at(nx, ny) != kBlack) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * img.width + nx;
            if (comp[nidx] >= 0) continue;
            comp[nidx] = id;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  if (count > 0) {
    centroid_x = sx / count;
    centroid_y = sy / count;
  }
  return n_components;
}

}  // namespace

ScaleFactor scale_factor(const RgbImage& circle_img) {
  circle_img.validate();
  double cx = 0.0, cy = 0.0;
  const int components = count_black_components(circle_img, cx, cy);
  if (components == 0) throw CalibrationError("scale_factor: no black pixels");
  if (components > 1)
    throw CalibrationError("scale_factor: multiple disconnected black components");

  const int row = static_cast<int>(std::lround(cy));
  int x_min = -1, x_max = -1;
  for (int x = 0; x < circle_img.width; ++x) {
    if (circle_img.at(x, row) == kBlack) {
      if (x_min < 0) x_min = x;
      x_max = x;
    }
  }
  if (x_min < 0) throw CalibrationError("scale_factor: centroid row has no black pixels");

  ScaleFactor sf;
  sf.px_circle = x_max - x_min + 1;
  sf.d_circle = 20.0;
  sf.gamma = sf.d_circle / sf.px_circle;
  return sf;
}

Measurements measure_lengths(const std::array<std::optional<Vec2>, 5>& points,
                             const ScaleFactor& gamma, bool euclidean) {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].has_value())
      throw MeasurementIncomplete("measure_lengths: target point #" + std::to_string(i + 1) +
                                  " missing");
  const Vec2 p1 = *points[0], p2 = *points[1], p3 = *points[2], p4 = *points[3], p5 = *points[4];

  Measurements m;
  if (euclidean) {
    m.pd_px = distance(p1, p4);
    m.ul_px = distance(p2, p4);
    m.gl_px = distance(p3, p5);
  } else {
    m.pd_px = std::abs(p1.y - p4.y);
    m.ul_px = std::abs(p2.y - p4.y);
    m.gl_px = std::abs(p3.x - p5.x);
  }
  m.pd = m.pd_px * gamma.gamma;
  m.ul = m.ul_px * gamma.gamma;
  m.gl = m.gl_px * gamma.gamma;
  return m;
}

double relative_error(double measured, double truth) {
  if (!(truth > 0.0)) throw ParameterError("relative_error: truth must be > 0");
  return std::abs(measured - truth) / truth * 100.0;
}

void ToleranceSpec::validate() const {
  if (relative_mode) {
    if (!(max_rel_pct >= 0.0)) throw ParameterError("ToleranceSpec: max_rel_pct must be >= 0");
    return;
  }
  for (const LengthTolerance* t : {&pd, &ul, &gl}) {
    if (t->lower > 0.0 || t->upper < 0.0)
      throw ParameterError("ToleranceSpec: deviations must bracket the nominal");
  }
}

Judgment judge(const Measurements& m, const ToleranceSpec& spec) {
  spec.validate();
  auto pass = [&](double measured, const LengthTolerance& tol) {
    if (spec.relative_mode) return relative_error(measured, tol.nominal) <= spec.max_rel_pct;
    return measured >= tol.nominal + tol.lower && measured <= tol.nominal + tol.upper;
  };
  Judgment j;
  j.pd_pass = pass(m.pd, spec.pd);
  j.ul_pass = pass(m.ul, spec.ul);
  j.gl_pass = pass(m.gl, spec.gl);
  j.overall = j.pd_pass && j.ul_pass && j.gl_pass;
  return j;
}

void FailureModel::validate() const {
  if (!(p_point >= 0.0 && p_point <= 1.0))
    throw ParameterError("FailureModel: p_point must lie in [0,1]");
  if (n_points < 1) throw ParameterError("FailureModel: n_points must be >= 1");
  if (redundancy_k < 1) throw ParameterError("FailureModel: redundancy_k must be >= 1");
}

double spot_success_prob(const FailureModel& model) {
  model.validate();
  return std::pow(model.p_point, model.n_points);
}

double line_failure_rate(double spot_failure, int redundancy_k) {
  if (!(spot_failure >= 0.0 && spot_failure <= 1.0))
    throw ParameterError("line_failure_rate: spot_failure must lie in [0,1]");
  if (redundancy_k < 1) throw ParameterError("line_failure_rate: redundancy_k must be >= 1");
  return std::pow(spot_failure, redundancy_k);
}

}  // namespace trimdie
