#include "trimdie/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "trimdie/error.hpp"
#include "trimdie/rng.hpp"

namespace trimdie {

using nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  if (n_spots < 1 || n_spots > 1000)
    throw ConfigError("PipelineConfig: n_spots must lie in [1,1000]");
  if (generation.n_lines < 1) throw ConfigError("PipelineConfig: n_lines must be >= 1");
  generation.ranges.validate();
  Viewport vp{{0, 0}, viewport.mm_per_px, viewport.width, viewport.height};
  vp.validate();
  if (crop.size < 32) throw ConfigError("PipelineConfig: crop size too small");
  if (!(crop.region_span_px > 0)) throw ConfigError("PipelineConfig: region span must be > 0");
  detector.validate();
  tolerances.validate();
  failure_model.validate();
  if (!(eval_iou > 0.0 && eval_iou < 1.0))
    throw ConfigError("PipelineConfig: eval_iou must lie in (0,1)");
  if (threads < 1) throw ConfigError("PipelineConfig: threads must be >= 1");
}

std::string to_string(SpotStatus s) {
  switch (s) {
    case SpotStatus::ok: return "ok";
    case SpotStatus::region_miss: return "region_miss";
    case SpotStatus::point_miss: return "point_miss";
  }
  return "region_miss";
}

namespace {

SpotStatus status_from_string(const std::string& s) {
  if (s == "ok") return SpotStatus::ok;
  if (s == "region_miss") return SpotStatus::region_miss;
  if (s == "point_miss") return SpotStatus::point_miss;
  throw DecodeError("report: unknown spot status " + s);
}

}  // namespace

double total_time(const StageTiming& t, int n_spots) {
  if (t.data_processing < 0 || t.selective_cropping < 0 || t.region_detection < 0 ||
      t.point_detection_measurement < 0 || t.zigzag_overhead < 0)
    throw ParameterError("total_time: stage times must be >= 0");
  const double per_spot = t.data_processing + t.selective_cropping + t.region_detection +
                          t.point_detection_measurement;
  return per_spot * n_spots + t.zigzag_overhead;
}

// --- config serialization ----------------------------------------------

namespace {

json rgb_to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

Rgb rgb_from_json(const json& j) {
  return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

json params_to_json(const ProfileParams& p) {
  return {{"pd", p.pd},         {"ul", p.ul},          {"gl", p.gl},      {"land", p.land},
          {"body_w", p.body_w}, {"body_h", p.body_h},  {"distractors", p.distractors}};
}

ProfileParams params_from_json(const json& j) {
  ProfileParams p;
  p.pd = j.at("pd").get<double>();
  p.ul = j.at("ul").get<double>();
  p.gl = j.at("gl").get<double>();
  p.land = j.at("land").get<double>();
  p.body_w = j.at("body_w").get<double>();
  p.body_h = j.at("body_h").get<double>();
  p.distractors = j.at("distractors").get<int>();
  return p;
}

json tolerance_to_json(const ToleranceSpec& t) {
  auto one = [](const LengthTolerance& lt) {
    return json{{"nominal", lt.nominal}, {"lower", lt.lower}, {"upper", lt.upper}};
  };
  return {{"relative_mode", t.relative_mode},
          {"max_rel_pct", t.max_rel_pct},
          {"pd", one(t.pd)},
          {"ul", one(t.ul)},
          {"gl", one(t.gl)}};
}

ToleranceSpec tolerance_from_json(const json& j) {
  ToleranceSpec t;
  t.relative_mode = j.at("relative_mode").get<bool>();
  t.max_rel_pct = j.at("max_rel_pct").get<double>();
  auto one = [&](const json& jt, LengthTolerance& lt) {
    lt.nominal = jt.at("nominal").get<double>();
    lt.lower = jt.at("lower").get<double>();
    lt.upper = jt.at("upper").get<double>();
  };
  one(j.at("pd"), t.pd);
  one(j.at("ul"), t.ul);
  one(j.at("gl"), t.gl);
  return t;
}

json config_to_json_obj(const PipelineConfig& cfg) {
  return {
      {"generation",
       {{"seed", cfg.generation.seed},
        {"n_lines", cfg.generation.n_lines},
        {"ranges",
         {{"lo", params_to_json(cfg.generation.ranges.lo)},
          {"hi", params_to_json(cfg.generation.ranges.hi)}}}}},
      {"n_spots", cfg.n_spots},
      {"viewport",
       {{"mm_per_px", cfg.viewport.mm_per_px},
        {"width", cfg.viewport.width},
        {"height", cfg.viewport.height},
        {"jitter_x", cfg.viewport.jitter_x},
        {"jitter_y", cfg.viewport.jitter_y}}},
      {"crop", {{"size", cfg.crop.size}, {"region_span_px", cfg.crop.region_span_px}}},
      {"detector",
       {{"use_shortcut", cfg.detector.use_shortcut},
        {"proposal_iou_nms", cfg.detector.proposal_iou_nms},
        {"junction_score_threshold", cfg.detector.junction_score_threshold},
        {"point_box_size", cfg.detector.point_box_size},
        {"min_arm_px", cfg.detector.min_arm_px},
        {"cluster_radius_px", cfg.detector.cluster_radius_px},
        {"min_cluster_corners", cfg.detector.min_cluster_corners},
        {"junction_t_norm", cfg.detector.junction_t_norm},
        {"min_circularity", cfg.detector.min_circularity},
        {"min_mark_px", cfg.detector.min_mark_px},
        {"region_box_px", cfg.detector.region_box_px},
        {"line_color", rgb_to_json(cfg.detector.line_color)},
        {"shortcut_color", rgb_to_json(cfg.detector.shortcut_color)}}},
      {"tolerances", tolerance_to_json(cfg.tolerances)},
      {"failure_model",
       {{"p_point", cfg.failure_model.p_point},
        {"n_points", cfg.failure_model.n_points},
        {"redundancy_k", cfg.failure_model.redundancy_k}}},
      {"output", {{"dir", cfg.output.dir}, {"dump_images", cfg.output.dump_images}}},
      {"eval_iou", cfg.eval_iou},
      {"threads", cfg.threads}};
}

PipelineConfig config_from_json_obj(const json& j) {
  PipelineConfig cfg;
  const auto& g = j.at("generation");
  cfg.generation.seed = g.at("seed").get<std::uint64_t>();
  cfg.generation.n_lines = g.at("n_lines").get<int>();
  cfg.generation.ranges.lo = params_from_json(g.at("ranges").at("lo"));
  cfg.generation.ranges.hi = params_from_json(g.at("ranges").at("hi"));
  cfg.n_spots = j.at("n_spots").get<int>();
  const auto& v = j.at("viewport");
  cfg.viewport.mm_per_px = v.at("mm_per_px").get<double>();
  cfg.viewport.width = v.at("width").get<int>();
  cfg.viewport.height = v.at("height").get<int>();
  cfg.viewport.jitter_x = v.at("jitter_x").get<double>();
  cfg.viewport.jitter_y = v.at("jitter_y").get<double>();
  cfg.crop.size = j.at("crop").at("size").get<int>();
  cfg.crop.region_span_px = j.at("crop").at("region_span_px").get<double>();
  const auto& d = j.at("detector");
  cfg.detector.use_shortcut = d.at("use_shortcut").get<bool>();
  cfg.detector.proposal_iou_nms = d.at("proposal_iou_nms").get<double>();
  cfg.detector.junction_score_threshold = d.at("junction_score_threshold").get<double>();
  cfg.detector.point_box_size = d.at("point_box_size").get<int>();
  cfg.detector.min_arm_px = d.at("min_arm_px").get<int>();
  cfg.detector.cluster_radius_px = d.at("cluster_radius_px").get<int>();
  cfg.detector.min_cluster_corners = d.at("min_cluster_corners").get<int>();
  cfg.detector.junction_t_norm = d.at("junction_t_norm").get<double>();
  cfg.detector.min_circularity = d.at("min_circularity").get<double>();
  cfg.detector.min_mark_px = d.at("min_mark_px").get<int>();
  cfg.detector.region_box_px = d.at("region_box_px").get<int>();
  cfg.detector.line_color = rgb_from_json(d.at("line_color"));
  cfg.detector.shortcut_color = rgb_from_json(d.at("shortcut_color"));
  cfg.tolerances = tolerance_from_json(j.at("tolerances"));
  const auto& f = j.at("failure_model");
  cfg.failure_model.p_point = f.at("p_point").get<double>();
  cfg.failure_model.n_points = f.at("n_points").get<int>();
  cfg.failure_model.redundancy_k = f.at("redundancy_k").get<int>();
  cfg.output.dir = j.at("output").at("dir").get<std::string>();
  cfg.output.dump_images = j.at("output").at("dump_images").get<bool>();
  cfg.eval_iou = j.at("eval_iou").get<double>();
  cfg.threads = j.at("threads").get<int>();
  return cfg;
}

}  // namespace

std::string config_to_json(const PipelineConfig& cfg) {
  return config_to_json_obj(cfg).dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  try {
    PipelineConfig cfg = config_from_json_obj(json::parse(text));
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("config: cannot open for writing " + path);
  f << config_to_json(cfg);
}

// --- inspection ---------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SpotWork {
  InspectionSpot spot;
  SectionProfile profile;
  Viewport viewport;
  SectionRender render;
};

struct StageAccum {
  double data_processing = 0.0;
  double selective_cropping = 0.0;
  double region_detection = 0.0;
  double point_detection_measurement = 0.0;
};

int point_label_index(const std::string& label) {
  if (label.rfind("point_", 0) != 0) return -1;
  const int k = label.back() - '1';
  return (k >= 0 && k < 5) ? k : -1;
}

// One full zigzag pass over a prepared section. Stage 2 (AI) detects the
// region, stage 3 (CAD) re-renders the enlarged crop plus the calibration
// circle, stage 4 (AI) detects points and measures.
SpotResult process_spot(const DieDesign& design, const PipelineConfig& cfg,
                        const SpotWork& work, const TruthLengths& truth, StageAccum& acc) {
  SpotResult r;
  r.spot_index = work.spot.spot_index;

  auto t0 = Clock::now();
  r.region_detections = detect_trimming_region(work.render.image, cfg.detector);
  acc.region_detection += seconds_since(t0);

  const Box& truth_region = work.render.truth_boxes.front().box;  // label "region"
  r.region_hit = !r.region_detections.empty() &&
                 iou(r.region_detections.front().box, truth_region) >= cfg.eval_iou;
  if (r.region_detections.empty()) {
    r.status = SpotStatus::region_miss;
    return r;
  }

  t0 = Clock::now();
  const Box& region = r.region_detections.front().box;
  r.crop_center_mm = px_to_mm(work.viewport, {region.cx, region.cy});
  // Snap the crop scale so the 20 mm circle rasterizes to an exact-integer
  // pixel diameter and the recovered gamma is exact.
  const double extent_mm = std::max(region.w, region.h) * work.viewport.mm_per_px;
  const double gamma_raw = extent_mm / cfg.crop.region_span_px;
  const long k = std::max(1L, std::lround(10.0 / gamma_raw));
  r.crop_mm_per_px = 10.0 / static_cast<double>(k);
  const RgbImage crop = render_zoom(work.profile, r.crop_center_mm, r.crop_mm_per_px,
                                    cfg.crop.size);
  const RgbImage circle = render_calibration_circle(r.crop_mm_per_px, cfg.crop.size);
  acc.selective_cropping += seconds_since(t0);

  if (cfg.output.dump_images) {
    const fs::path dir = fs::path(cfg.output.dir) / "artifacts" / design.design_id;
    char name[64];
    std::snprintf(name, sizeof(name), "crop_%03d.ppm", r.spot_index);
    write_ppm(crop, (dir / name).string());
    std::snprintf(name, sizeof(name), "circle_%03d.ppm", r.spot_index);
    write_ppm(circle, (dir / name).string());
  }

  t0 = Clock::now();
  r.point_detections = detect_target_points(crop, cfg.detector);
  const ScaleFactor sf = scale_factor(circle);
  r.gamma = sf.gamma;

  std::array<std::optional<Vec2>, 5> centers;
  for (const auto& det : r.point_detections) {
    const int idx = point_label_index(det.label);
    if (idx >= 0) centers[idx] = Vec2{det.box.cx, det.box.cy};
  }

  // per-label evaluation against projected truth points
  const Viewport crop_vp{r.crop_center_mm, r.crop_mm_per_px, cfg.crop.size, cfg.crop.size};
  std::vector<LabeledBox> point_truths;
  for (int i = 0; i < 5; ++i) {
    const Vec2 p = mm_to_px(crop_vp, work.profile.truth_points[i]);
    point_truths.push_back({"point_" + std::to_string(i + 1),
                            Box{p.x, p.y, static_cast<double>(cfg.detector.point_box_size),
                                static_cast<double>(cfg.detector.point_box_size)}});
  }
  const EvalStats stats = evaluate_detections(r.point_detections, point_truths, cfg.eval_iou);
  for (int i = 0; i < 5; ++i) {
    auto it = stats.per_label.find("point_" + std::to_string(i + 1));
    r.point_hit[i] = it != stats.per_label.end() && it->second.detected > 0;
  }

  const bool all_points =
      std::all_of(centers.begin(), centers.end(), [](const auto& c) { return c.has_value(); });
  if (!all_points) {
    r.status = SpotStatus::point_miss;
    acc.point_detection_measurement += seconds_since(t0);
    return r;
  }

  Measurements m = measure_lengths(centers, sf);
  m.source_spot = design.design_id + "/" + work.spot.line_id + "/spot_" +
                  std::to_string(work.spot.spot_index);
  r.measurements = m;

  ToleranceSpec tol = cfg.tolerances;
  if (tol.pd.nominal <= 0.0) tol.pd.nominal = truth.pd;
  if (tol.ul.nominal <= 0.0) tol.ul.nominal = truth.ul;
  if (tol.gl.nominal <= 0.0) tol.gl.nominal = truth.gl;
  r.judgment = judge(m, tol);
  r.rel_errors = RelErrors{relative_error(m.pd, truth.pd), relative_error(m.ul, truth.ul),
                           relative_error(m.gl, truth.gl)};
  r.status = SpotStatus::ok;
  acc.point_detection_measurement += seconds_since(t0);
  return r;
}

}  // namespace

Viewport section_viewport(const DieDesign& design, const SectionViewConfig& view,
                          const SectionProfile& profile, int spot_index) {
  Rng jitter(mix_seed(design.seed ^ 0x5ec7100f00ULL, static_cast<std::uint64_t>(spot_index)));
  const Vec2 center = profile.target_center + Vec2{jitter.uniform(-view.jitter_x, view.jitter_x),
                                                   jitter.uniform(-view.jitter_y, view.jitter_y)};
  return Viewport{center, view.mm_per_px, view.width, view.height};
}

ReportAggregates recompute_aggregates(const std::vector<SpotResult>& spots,
                                      const FailureModel& failure_model) {
  ReportAggregates agg;
  const std::size_t n = spots.size();
  if (n == 0) return agg;

  int region_hits = 0;
  std::array<int, 5> point_hits{};
  int passes = 0;
  std::vector<double> errors;
  double sum_pd = 0, sum_ul = 0, sum_gl = 0;
  int measured = 0;

  for (const auto& s : spots) {
    region_hits += s.region_hit ? 1 : 0;
    for (int i = 0; i < 5; ++i) point_hits[i] += s.point_hit[i] ? 1 : 0;
    if (s.judgment && s.judgment->overall) passes += 1;
    if (s.rel_errors) {
      errors.push_back(s.rel_errors->pd);
      errors.push_back(s.rel_errors->ul);
      errors.push_back(s.rel_errors->gl);
      sum_pd += s.rel_errors->pd;
      sum_ul += s.rel_errors->ul;
      sum_gl += s.rel_errors->gl;
      measured += 1;
    }
  }

  agg.region_accuracy = static_cast<double>(region_hits) / n;
  double acc_sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    agg.point_accuracy[i] = static_cast<double>(point_hits[i]) / n;
    acc_sum += agg.point_accuracy[i];
  }
  agg.point_accuracy_avg = acc_sum / 5.0;
  if (!errors.empty()) {
    double sum = 0.0;
    for (double e : errors) sum += e;
    agg.mean_rel_error = sum / errors.size();
    int lt1 = 0, lt4 = 0;
    for (double e : errors) {
      if (e < 1.0) ++lt1;
      if (e < 4.0) ++lt4;
    }
    agg.frac_err_lt_1 = static_cast<double>(lt1) / errors.size();
    agg.frac_err_lt_4 = static_cast<double>(lt4) / errors.size();
  }
  if (measured > 0) {
    agg.mean_rel_error_pd = sum_pd / measured;
    agg.mean_rel_error_ul = sum_ul / measured;
    agg.mean_rel_error_gl = sum_gl / measured;
  }
  agg.pass_rate = static_cast<double>(passes) / n;
  agg.measured_point_rate = agg.point_accuracy_avg;
  agg.predicted_spot_failure = 1.0 - std::pow(agg.measured_point_rate, 5);
  agg.predicted_line_failure_rate =
      line_failure_rate(agg.predicted_spot_failure, failure_model.redundancy_k);
  return agg;
}

InspectionReport inspect_die(const DieDesign& design, const PipelineConfig& cfg) {
  cfg.validate();
  design.validate();
  const auto t_start = Clock::now();

  const TrimmingLine& line = design.target_line();
  const std::vector<InspectionSpot> spots = place_spots(design, line.line_id, cfg.n_spots);
  const TruthLengths truth{line.profile.pd, line.profile.ul, line.profile.gl};

  // Stage 1, batch mode: every section image is produced before any
  // AI-domain stage runs.
  StageAccum acc;
  std::vector<SpotWork> work(spots.size());
  for (std::size_t i = 0; i < spots.size(); ++i) {
    const auto t0 = Clock::now();
    work[i].spot = spots[i];
    work[i].profile = section_at(design, spots[i]);
    work[i].viewport = section_viewport(design, cfg.viewport, work[i].profile,
                                        spots[i].spot_index);
    work[i].render = render_section(work[i].profile, work[i].viewport,
                                    cfg.detector.use_shortcut);
    acc.data_processing += seconds_since(t0);
  }

  if (cfg.output.dump_images) {
    const fs::path dir = fs::path(cfg.output.dir) / "artifacts" / design.design_id;
    fs::create_directories(dir);
    char name[64];
    for (std::size_t i = 0; i < work.size(); ++i) {
      std::snprintf(name, sizeof(name), "section_%03zu.ppm", i);
      write_ppm(work[i].render.image, (dir / name).string());
    }
  }

  // Stages 2-4 per spot; spots are independent work units.
  std::vector<SpotResult> results(spots.size());
  if (cfg.threads <= 1) {
    for (std::size_t i = 0; i < work.size(); ++i)
      results[i] = process_spot(design, cfg, work[i], truth, acc);
  } else {
    std::vector<StageAccum> accs(cfg.threads);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < cfg.threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1))
          results[i] = process_spot(design, cfg, work[i], truth, accs[t]);
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& a : accs) {
      acc.selective_cropping += a.selective_cropping;
      acc.region_detection += a.region_detection;
      acc.point_detection_measurement += a.point_detection_measurement;
    }
  }

  InspectionReport report;
  report.design_id = design.design_id;
  report.line_id = line.line_id;
  report.truth = truth;
  report.config = cfg;
  report.spots = std::move(results);
  report.aggregates = recompute_aggregates(report.spots, cfg.failure_model);

  const double n = static_cast<double>(spots.size());
  report.timing.data_processing = acc.data_processing / n;
  report.timing.selective_cropping = acc.selective_cropping / n;
  report.timing.region_detection = acc.region_detection / n;
  report.timing.point_detection_measurement = acc.point_detection_measurement / n;
  const double staged = acc.data_processing + acc.selective_cropping + acc.region_detection +
                        acc.point_detection_measurement;
  report.timing.zigzag_overhead = std::max(0.0, seconds_since(t_start) - staged);

  if (!cfg.output.dir.empty()) {
    fs::create_directories(cfg.output.dir);
    const fs::path base = fs::path(cfg.output.dir) / (design.design_id + "_report");
    emit_report(report, base.string() + ".json", ReportFormat::structured);
    emit_report(report, base.string() + ".csv", ReportFormat::tabular);
  }
  return report;
}

// --- report serialization ------------------------------------------------

namespace {

json box_to_json(const Box& b) {
  return {{"x", b.x1()}, {"y", b.y1()}, {"w", b.w}, {"h", b.h}};
}

Box box_from_json(const json& j) {
  return Box::from_xywh(j.at("x").get<double>(), j.at("y").get<double>(),
                        j.at("w").get<double>(), j.at("h").get<double>());
}

json detections_to_json(const std::vector<Detection>& dets) {
  json arr = json::array();
  for (const auto& d : dets)
    arr.push_back({{"label", d.label}, {"box", box_to_json(d.box)}, {"score", d.score}});
  return arr;
}

std::vector<Detection> detections_from_json(const json& j) {
  std::vector<Detection> dets;
  for (const auto& jd : j)
    dets.push_back({box_from_json(jd.at("box")), jd.at("score").get<double>(),
                    jd.at("label").get<std::string>()});
  return dets;
}

json spot_to_json(const SpotResult& s) {
  json j = {{"spot_index", s.spot_index},
            {"status", to_string(s.status)},
            {"region_detections", detections_to_json(s.region_detections)},
            {"region_hit", s.region_hit},
            {"crop_center_mm", json::array({s.crop_center_mm.x, s.crop_center_mm.y})},
            {"crop_mm_per_px", s.crop_mm_per_px},
            {"gamma", s.gamma},
            {"point_detections", detections_to_json(s.point_detections)},
            {"point_hit", s.point_hit}};
  if (s.measurements) {
    const auto& m = *s.measurements;
    j["measurements"] = {{"pd", m.pd},       {"ul", m.ul},       {"gl", m.gl},
                         {"pd_px", m.pd_px}, {"ul_px", m.ul_px}, {"gl_px", m.gl_px},
                         {"source_spot", m.source_spot}};
  } else {
    j["measurements"] = nullptr;
  }
  if (s.judgment) {
    j["judgment"] = {{"pd_pass", s.judgment->pd_pass},
                     {"ul_pass", s.judgment->ul_pass},
                     {"gl_pass", s.judgment->gl_pass},
                     {"overall", s.judgment->overall}};
  } else {
    j["judgment"] = nullptr;
  }
  if (s.rel_errors) {
    j["rel_errors"] = {{"pd", s.rel_errors->pd}, {"ul", s.rel_errors->ul},
                       {"gl", s.rel_errors->gl}};
  } else {
    j["rel_errors"] = nullptr;
  }
  return j;
}

SpotResult spot_from_json(const json& j) {
  SpotResult s;
  s.spot_index = j.at("spot_index").get<int>();
  s.status = status_from_string(j.at("status").get<std::string>());
  s.region_detections = detections_from_json(j.at("region_detections"));
  s.region_hit = j.at("region_hit").get<bool>();
  s.crop_center_mm = {j.at("crop_center_mm").at(0).get<double>(),
                      j.at("crop_center_mm").at(1).get<double>()};
  s.crop_mm_per_px = j.at("crop_mm_per_px").get<double>();
  s.gamma = j.at("gamma").get<double>();
  s.point_detections = detections_from_json(j.at("point_detections"));
  for (int i = 0; i < 5; ++i) s.point_hit[i] = j.at("point_hit").at(i).get<bool>();
  if (!j.at("measurements").is_null()) {
    Measurements m;
    const auto& jm = j.at("measurements");
    m.pd = jm.at("pd").get<double>();
    m.ul = jm.at("ul").get<double>();
    m.gl = jm.at("gl").get<double>();
    m.pd_px = jm.at("pd_px").get<double>();
    m.ul_px = jm.at("ul_px").get<double>();
    m.gl_px = jm.at("gl_px").get<double>();
    m.source_spot = jm.at("source_spot").get<std::string>();
    s.measurements = m;
  }
  if (!j.at("judgment").is_null()) {
    const auto& jj = j.at("judgment");
    s.judgment = Judgment{jj.at("pd_pass").get<bool>(), jj.at("ul_pass").get<bool>(),
                          jj.at("gl_pass").get<bool>(), jj.at("overall").get<bool>()};
  }
  if (!j.at("rel_errors").is_null()) {
    const auto& je = j.at("rel_errors");
    s.rel_errors = RelErrors{je.at("pd").get<double>(), je.at("ul").get<double>(),
                             je.at("gl").get<double>()};
  }
  return s;
}

json aggregates_to_json(const ReportAggregates& a) {
  return {{"region_accuracy", a.region_accuracy},
          {"point_accuracy", a.point_accuracy},
          {"point_accuracy_avg", a.point_accuracy_avg},
          {"mean_rel_error", a.mean_rel_error},
          {"mean_rel_error_pd", a.mean_rel_error_pd},
          {"mean_rel_error_ul", a.mean_rel_error_ul},
          {"mean_rel_error_gl", a.mean_rel_error_gl},
          {"frac_err_lt_1", a.frac_err_lt_1},
          {"frac_err_lt_4", a.frac_err_lt_4},
          {"pass_rate", a.pass_rate},
          {"measured_point_rate", a.measured_point_rate},
          {"predicted_spot_failure", a.predicted_spot_failure},
          {"predicted_line_failure_rate", a.predicted_line_failure_rate}};
}

ReportAggregates aggregates_from_json(const json& j) {
  ReportAggregates a;
  a.region_accuracy = j.at("region_accuracy").get<double>();
  for (int i = 0; i < 5; ++i) a.point_accuracy[i] = j.at("point_accuracy").at(i).get<double>();
  a.point_accuracy_avg = j.at("point_accuracy_avg").get<double>();
  a.mean_rel_error = j.at("mean_rel_error").get<double>();
  a.mean_rel_error_pd = j.at("mean_rel_error_pd").get<double>();
  a.mean_rel_error_ul = j.at("mean_rel_error_ul").get<double>();
  a.mean_rel_error_gl = j.at("mean_rel_error_gl").get<double>();
  a.frac_err_lt_1 = j.at("frac_err_lt_1").get<double>();
  a.frac_err_lt_4 = j.at("frac_err_lt_4").get<double>();
  a.pass_rate = j.at("pass_rate").get<double>();
  a.measured_point_rate = j.at("measured_point_rate").get<double>();
  a.predicted_spot_failure = j.at("predicted_spot_failure").get<double>();
  a.predicted_line_failure_rate = j.at("predicted_line_failure_rate").get<double>();
  return a;
}

}  // namespace

std::string report_to_json(const InspectionReport& report) {
  json spots = json::array();
  for (const auto& s : report.spots) spots.push_back(spot_to_json(s));
  json j = {{"design_id", report.design_id},
            {"line_id", report.line_id},
            {"truth", {{"pd", report.truth.pd}, {"ul", report.truth.ul}, {"gl", report.truth.gl}}},
            {"config", config_to_json_obj(report.config)},
            {"spots", spots},
            {"aggregates", aggregates_to_json(report.aggregates)},
            {"timing",
             {{"data_processing", report.timing.data_processing},
              {"selective_cropping", report.timing.selective_cropping},
              {"region_detection", report.timing.region_detection},
              {"point_detection_measurement", report.timing.point_detection_measurement},
              {"zigzag_overhead", report.timing.zigzag_overhead},
              {"total_for_n_spots",
               total_time(report.timing, static_cast<int>(report.spots.size()))}}}};
  return j.dump(2) + "\n";
}

InspectionReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    InspectionReport r;
    r.design_id = j.at("design_id").get<std::string>();
    r.line_id = j.at("line_id").get<std::string>();
    r.truth = {j.at("truth").at("pd").get<double>(), j.at("truth").at("ul").get<double>(),
               j.at("truth").at("gl").get<double>()};
    r.config = config_from_json_obj(j.at("config"));
    for (const auto& js : j.at("spots")) r.spots.push_back(spot_from_json(js));
    r.aggregates = aggregates_from_json(j.at("aggregates"));
    const auto& jt = j.at("timing");
    r.timing.data_processing = jt.at("data_processing").get<double>();
    r.timing.selective_cropping = jt.at("selective_cropping").get<double>();
    r.timing.region_detection = jt.at("region_detection").get<double>();
    r.timing.point_detection_measurement = jt.at("point_detection_measurement").get<double>();
    r.timing.zigzag_overhead = jt.at("zigzag_overhead").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ReportError(std::string("report: ") + e.what());
  }
}

InspectionReport load_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ReportError("report: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  InspectionReport report = report_from_json(ss.str());
  if (!verify_report_consistency(report))
    throw ReportError("report: aggregates do not match the per-spot rows: " + path);
  return report;
}

namespace {

std::string csv_number(double v) { return json(v).dump(); }

std::string report_to_csv(const InspectionReport& report) {
  std::string csv = "spot_index,length,measured_mm,truth_mm,rel_error_pct,pass\n";
  const double truths[3] = {report.truth.pd, report.truth.ul, report.truth.gl};
  const char* names[3] = {"pd", "ul", "gl"};
  for (const auto& s : report.spots) {
    for (int i = 0; i < 3; ++i) {
      csv += std::to_string(s.spot_index);
      csv += ",";
      csv += names[i];
      csv += ",";
      if (s.measurements) {
        const double measured[3] = {s.measurements->pd, s.measurements->ul, s.measurements->gl};
        const double errs[3] = {s.rel_errors->pd, s.rel_errors->ul, s.rel_errors->gl};
        const bool passes[3] = {s.judgment->pd_pass, s.judgment->ul_pass, s.judgment->gl_pass};
        csv += csv_number(measured[i]) + "," + csv_number(truths[i]) + "," +
               csv_number(errs[i]) + "," + (passes[i] ? "true" : "false");
      } else {
        csv += "," + csv_number(truths[i]) + ",,false";
      }
      csv += "\n";
    }
  }
  return csv;
}

}  // namespace

void emit_report(const InspectionReport& report, const std::string& path, ReportFormat format) {
  std::ofstream f(path);
  if (!f) throw ReportError("report: cannot open for writing " + path);
  if (format == ReportFormat::structured) {
    f << report_to_json(report);
  } else {
    f << report_to_csv(report);
  }
  if (!f) throw ReportError("report: write failed " + path);
}

bool verify_report_consistency(const InspectionReport& report) {
  for (const auto& s : report.spots) {
    if ((s.status == SpotStatus::ok) != s.measurements.has_value()) return false;
    if (s.measurements.has_value() != s.judgment.has_value()) return false;
    if (s.measurements.has_value() != s.rel_errors.has_value()) return false;
  }
  const ReportAggregates a = recompute_aggregates(report.spots, report.config.failure_model);
  const ReportAggregates& b = report.aggregates;
  bool ok = a.region_accuracy == b.region_accuracy &&
            a.point_accuracy_avg == b.point_accuracy_avg &&
            a.mean_rel_error == b.mean_rel_error &&
            a.mean_rel_error_pd == b.mean_rel_error_pd &&
            a.mean_rel_error_ul == b.mean_rel_error_ul &&
            a.mean_rel_error_gl == b.mean_rel_error_gl &&
            a.frac_err_lt_1 == b.frac_err_lt_1 && a.frac_err_lt_4 == b.frac_err_lt_4 &&
            a.pass_rate == b.pass_rate && a.measured_point_rate == b.measured_point_rate &&
            a.predicted_spot_failure == b.predicted_spot_failure &&
            a.predicted_line_failure_rate == b.predicted_line_failure_rate;
  for (int i = 0; i < 5; ++i) ok = ok && a.point_accuracy[i] == b.point_accuracy[i];
  return ok;
}

}  // namespace trimdie
