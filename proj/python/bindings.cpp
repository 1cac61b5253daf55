#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trimdie/checks.hpp"
#include "trimdie/detector.hpp"
#include "trimdie/diemodel.hpp"
#include "trimdie/error.hpp"
#include "trimdie/measure.hpp"
#include "trimdie/pipeline.hpp"
#include "trimdie/raster.hpp"

namespace py = pybind11;
using namespace trimdie;

PYBIND11_MODULE(_core, m) {
  m.doc() = "trimming-die design inspection: synthetic CAD domain, detection math, "
            "measurement and the zigzag pipeline";

  // geometry ------------------------------------------------------------
  py::class_<Vec2>(m, "Vec2")
      .def(py::init<>())
      .def(py::init<double, double>())
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("__repr__", [](const Vec2& v) {
        return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
      });

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init<double, double, double>())
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z);

  // detection math -------------------------------------------------------
  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("cx"), py::arg("cy"),
           py::arg("w"), py::arg("h"))
      .def_static("from_xywh", &Box::from_xywh)
      .def_readwrite("cx", &Box::cx)
      .def_readwrite("cy", &Box::cy)
      .def_readwrite("w", &Box::w)
      .def_readwrite("h", &Box::h)
      .def("x1", &Box::x1)
      .def("y1", &Box::y1)
      .def("x2", &Box::x2)
      .def("y2", &Box::y2)
      .def("area", &Box::area);

  py::class_<LabeledBox>(m, "LabeledBox")
      .def(py::init<>())
      .def_readwrite("label", &LabeledBox::label)
      .def_readwrite("box", &LabeledBox::box);

  py::class_<BoxDelta>(m, "BoxDelta")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("tx"), py::arg("ty"),
           py::arg("tw"), py::arg("th"))
      .def_readwrite("tx", &BoxDelta::tx)
      .def_readwrite("ty", &BoxDelta::ty)
      .def_readwrite("tw", &BoxDelta::tw)
      .def_readwrite("th", &BoxDelta::th);

  py::class_<ClassProbs>(m, "ClassProbs")
      .def(py::init([](std::vector<double> p) { return ClassProbs{std::move(p)}; }))
      .def_static("validated", &ClassProbs::validated)
      .def_readwrite("probs", &ClassProbs::probs);

  py::enum_<AnchorLabel>(m, "AnchorLabel")
      .value("negative", AnchorLabel::negative)
      .value("positive", AnchorLabel::positive)
      .value("ignore", AnchorLabel::ignore);

  py::class_<RpnBatch>(m, "RpnBatch")
      .def(py::init<>())
      .def_readwrite("anchors", &RpnBatch::anchors)
      .def_readwrite("p", &RpnBatch::p)
      .def_readwrite("p_star", &RpnBatch::p_star)
      .def_readwrite("t", &RpnBatch::t)
      .def_readwrite("t_star", &RpnBatch::t_star)
      .def_readwrite("lambda_", &RpnBatch::lambda)
      .def_readwrite("n_cls", &RpnBatch::n_cls)
      .def_readwrite("n_reg", &RpnBatch::n_reg);

  m.def("iou", &iou);
  m.def("nms", &nms, py::arg("boxes"), py::arg("scores"), py::arg("iou_threshold"));
  m.def("smooth_l1", &smooth_l1);
  m.def("smooth_l1_grad", &smooth_l1_grad);
  m.def("box_reg_loss", &box_reg_loss);
  m.def("cls_loss", &cls_loss);
  m.def("multitask_loss", &multitask_loss, py::arg("p"), py::arg("u"), py::arg("t_u"),
        py::arg("v"), py::arg("lambda_"));
  m.def("rpn_loss", &rpn_loss);
  m.def("encode_box", &encode_box);
  m.def("decode_box", &decode_box);
  m.def("anchor_grid", &anchor_grid, py::arg("image_w"), py::arg("image_h"), py::arg("stride"),
        py::arg("scales"), py::arg("ratios"));

  // images ---------------------------------------------------------------
  py::class_<Rgb>(m, "Rgb")
      .def(py::init<>())
      .def(py::init<std::uint8_t, std::uint8_t, std::uint8_t>())
      .def_readwrite("r", &Rgb::r)
      .def_readwrite("g", &Rgb::g)
      .def_readwrite("b", &Rgb::b);

  py::class_<RgbImage>(m, "RgbImage")
      .def(py::init<>())
      .def_static("filled", &RgbImage::filled)
      .def_readonly("width", &RgbImage::width)
      .def_readonly("height", &RgbImage::height)
      .def("at", &RgbImage::at)
      .def("set", &RgbImage::set)
      .def("to_bytes", [](const RgbImage& img) {
        return py::bytes(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
      });

  m.def("encode_ppm", [](const RgbImage& img) {
    auto bytes = encode_ppm(img);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("decode_ppm", [](const py::bytes& data) {
    const std::string s = data;
    return decode_ppm(std::vector<std::uint8_t>(s.begin(), s.end()));
  });
  m.def("write_ppm", &write_ppm);
  m.def("read_ppm", &read_ppm);

  // die model ------------------------------------------------------------
  py::class_<ProfileParams>(m, "ProfileParams")
      .def(py::init<>())
      .def_readwrite("pd", &ProfileParams::pd)
      .def_readwrite("ul", &ProfileParams::ul)
      .def_readwrite("gl", &ProfileParams::gl)
      .def_readwrite("land", &ProfileParams::land)
      .def_readwrite("body_w", &ProfileParams::body_w)
      .def_readwrite("body_h", &ProfileParams::body_h)
      .def_readwrite("distractors", &ProfileParams::distractors)
      .def("validate", &ProfileParams::validate);

  py::class_<ParamRanges>(m, "ParamRanges")
      .def(py::init<>())
      .def_static("defaults", &ParamRanges::defaults)
      .def_readwrite("lo", &ParamRanges::lo)
      .def_readwrite("hi", &ParamRanges::hi);

  py::class_<TrimmingLine>(m, "TrimmingLine")
      .def_readonly("line_id", &TrimmingLine::line_id)
      .def_readonly("polyline", &TrimmingLine::polyline)
      .def_readonly("is_target", &TrimmingLine::is_target)
      .def_readonly("profile", &TrimmingLine::profile)
      .def("arc_length", &TrimmingLine::arc_length);

  py::class_<Aabb3>(m, "Aabb3")
      .def_readonly("lo", &Aabb3::lo)
      .def_readonly("hi", &Aabb3::hi);

  py::class_<DieDesign>(m, "DieDesign")
      .def_readonly("design_id", &DieDesign::design_id)
      .def_readonly("seed", &DieDesign::seed)
      .def_readonly("extents", &DieDesign::extents)
      .def_readonly("trimming_lines", &DieDesign::trimming_lines)
      .def("target_line", &DieDesign::target_line, py::return_value_policy::reference_internal);

  py::class_<InspectionSpot>(m, "InspectionSpot")
      .def_readonly("line_id", &InspectionSpot::line_id)
      .def_readonly("spot_index", &InspectionSpot::spot_index)
      .def_readonly("position", &InspectionSpot::position)
      .def_readonly("tangent", &InspectionSpot::tangent)
      .def_readonly("section_normal", &InspectionSpot::section_normal);

  py::class_<TruthLengths>(m, "TruthLengths")
      .def_readonly("pd", &TruthLengths::pd)
      .def_readonly("ul", &TruthLengths::ul)
      .def_readonly("gl", &TruthLengths::gl);

  py::class_<SectionProfile>(m, "SectionProfile")
      .def_readonly("truth_points", &SectionProfile::truth_points)
      .def_readonly("truth_lengths", &SectionProfile::truth_lengths)
      .def_readonly("target_center", &SectionProfile::target_center)
      .def_readonly("distractor_centers", &SectionProfile::distractor_centers);

  m.def("generate_design", &generate_design, py::arg("seed"), py::arg("n_lines") = 3,
        py::arg("ranges") = ParamRanges::defaults());
  m.def("place_spots", &place_spots, py::arg("design"), py::arg("line_id"), py::arg("n_spots"));
  m.def("section_at", &section_at);
  m.def("design_to_json", &design_to_json);
  m.def("design_from_json", &design_from_json);
  m.def("save_design", &save_design);
  m.def("load_design", &load_design);

  // raster ---------------------------------------------------------------
  py::class_<Viewport>(m, "Viewport")
      .def(py::init<>())
      .def(py::init([](Vec2 center, double mm_per_px, int width, int height) {
             return Viewport{center, mm_per_px, width, height};
           }),
           py::arg("center"), py::arg("mm_per_px"), py::arg("width"), py::arg("height"))
      .def_readwrite("center", &Viewport::center)
      .def_readwrite("mm_per_px", &Viewport::mm_per_px)
      .def_readwrite("width", &Viewport::width)
      .def_readwrite("height", &Viewport::height);

  m.def("mm_to_px", &mm_to_px);
  m.def("px_to_mm", &px_to_mm);
  m.def("render_section", [](const SectionProfile& p, const Viewport& vp, bool shortcut_on) {
        SectionRender r = render_section(p, vp, shortcut_on);
        return py::make_tuple(std::move(r.image), std::move(r.truth_boxes));
      },
      py::arg("profile"), py::arg("viewport"), py::arg("shortcut_on") = true);
  m.def("render_zoom", [](const SectionProfile& p, Vec2 center, double mm_per_px, int size) {
        return render_zoom(p, center, mm_per_px, size);
      },
      py::arg("profile"), py::arg("center"), py::arg("mm_per_px"), py::arg("size"));
  m.def("render_calibration_circle",
        [](double mm_per_px, int size) { return render_calibration_circle(mm_per_px, size); },
        py::arg("mm_per_px"), py::arg("size"));

  // detector ---------------------------------------------------------------
  py::class_<Detection>(m, "Detection")
      .def(py::init<>())
      .def_readwrite("box", &Detection::box)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("label", &Detection::label)
      .def("__repr__", [](const Detection& d) {
        return "Detection(" + d.label + ", score=" + std::to_string(d.score) + ")";
      });

  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init<>())
      .def_readwrite("use_shortcut", &DetectorConfig::use_shortcut)
      .def_readwrite("proposal_iou_nms", &DetectorConfig::proposal_iou_nms)
      .def_readwrite("junction_score_threshold", &DetectorConfig::junction_score_threshold)
      .def_readwrite("point_box_size", &DetectorConfig::point_box_size)
      .def_readwrite("min_arm_px", &DetectorConfig::min_arm_px)
      .def_readwrite("cluster_radius_px", &DetectorConfig::cluster_radius_px)
      .def_readwrite("min_cluster_corners", &DetectorConfig::min_cluster_corners)
      .def_readwrite("region_box_px", &DetectorConfig::region_box_px);

  py::class_<LabelStats>(m, "LabelStats")
      .def_readonly("total", &LabelStats::total)
      .def_readonly("detected", &LabelStats::detected)
      .def("accuracy", &LabelStats::accuracy);

  py::class_<EvalStats>(m, "EvalStats")
      .def_readonly("per_label", &EvalStats::per_label)
      .def_readonly("total", &EvalStats::total)
      .def_readonly("detected", &EvalStats::detected)
      .def("overall", &EvalStats::overall);

  m.def("detect_trimming_region", &detect_trimming_region, py::arg("image"), py::arg("cfg"));
  m.def("detect_target_points", &detect_target_points, py::arg("crop"), py::arg("cfg"));
  m.def("evaluate_detections", &evaluate_detections, py::arg("dets"), py::arg("truths"),
        py::arg("iou_threshold"));

  // measurement -----------------------------------------------------------
  py::class_<ScaleFactor>(m, "ScaleFactor")
      .def(py::init<>())
      .def_readwrite("gamma", &ScaleFactor::gamma)
      .def_readwrite("px_circle", &ScaleFactor::px_circle)
      .def_readwrite("d_circle", &ScaleFactor::d_circle);

  py::class_<Measurements>(m, "Measurements")
      .def_readonly("pd", &Measurements::pd)
      .def_readonly("ul", &Measurements::ul)
      .def_readonly("gl", &Measurements::gl)
      .def_readonly("pd_px", &Measurements::pd_px)
      .def_readonly("ul_px", &Measurements::ul_px)
      .def_readonly("gl_px", &Measurements::gl_px)
      .def_readonly("source_spot", &Measurements::source_spot);

  py::class_<LengthTolerance>(m, "LengthTolerance")
      .def(py::init<>())
      .def_readwrite("nominal", &LengthTolerance::nominal)
      .def_readwrite("lower", &LengthTolerance::lower)
      .def_readwrite("upper", &LengthTolerance::upper);

  py::class_<ToleranceSpec>(m, "ToleranceSpec")
      .def(py::init<>())
      .def_readwrite("relative_mode", &ToleranceSpec::relative_mode)
      .def_readwrite("max_rel_pct", &ToleranceSpec::max_rel_pct)
      .def_readwrite("pd", &ToleranceSpec::pd)
      .def_readwrite("ul", &ToleranceSpec::ul)
      .def_readwrite("gl", &ToleranceSpec::gl);

  py::class_<Judgment>(m, "Judgment")
      .def_readonly("pd_pass", &Judgment::pd_pass)
      .def_readonly("ul_pass", &Judgment::ul_pass)
      .def_readonly("gl_pass", &Judgment::gl_pass)
      .def_readonly("overall", &Judgment::overall);

  py::class_<FailureModel>(m, "FailureModel")
      .def(py::init<>())
      .def_readwrite("p_point", &FailureModel::p_point)
      .def_readwrite("n_points", &FailureModel::n_points)
      .def_readwrite("redundancy_k", &FailureModel::redundancy_k);

  m.def("scale_factor", &scale_factor);
  m.def("measure_lengths", &measure_lengths, py::arg("points"), py::arg("gamma"),
        py::arg("euclidean") = false);
  m.def("relative_error", &relative_error);
  m.def("judge", &judge);
  m.def("spot_success_prob", &spot_success_prob);
  m.def("line_failure_rate", &line_failure_rate);

  // pipeline ----------------------------------------------------------------
  py::enum_<SpotStatus>(m, "SpotStatus")
      .value("ok", SpotStatus::ok)
      .value("region_miss", SpotStatus::region_miss)
      .value("point_miss", SpotStatus::point_miss);

  py::class_<StageTiming>(m, "StageTiming")
      .def(py::init<>())
      .def_readwrite("data_processing", &StageTiming::data_processing)
      .def_readwrite("selective_cropping", &StageTiming::selective_cropping)
      .def_readwrite("region_detection", &StageTiming::region_detection)
      .def_readwrite("point_detection_measurement", &StageTiming::point_detection_measurement)
      .def_readwrite("zigzag_overhead", &StageTiming::zigzag_overhead);

  m.def("total_time", &total_time, py::arg("timing"), py::arg("n_spots"));

  py::class_<GenerationConfig>(m, "GenerationConfig")
      .def(py::init<>())
      .def_readwrite("seed", &GenerationConfig::seed)
      .def_readwrite("n_lines", &GenerationConfig::n_lines)
      .def_readwrite("ranges", &GenerationConfig::ranges);

  py::class_<SectionViewConfig>(m, "SectionViewConfig")
      .def(py::init<>())
      .def_readwrite("mm_per_px", &SectionViewConfig::mm_per_px)
      .def_readwrite("width", &SectionViewConfig::width)
      .def_readwrite("height", &SectionViewConfig::height)
      .def_readwrite("jitter_x", &SectionViewConfig::jitter_x)
      .def_readwrite("jitter_y", &SectionViewConfig::jitter_y);

  py::class_<CropConfig>(m, "CropConfig")
      .def(py::init<>())
      .def_readwrite("size", &CropConfig::size)
      .def_readwrite("region_span_px", &CropConfig::region_span_px);

  py::class_<OutputConfig>(m, "OutputConfig")
      .def(py::init<>())
      .def_readwrite("dir", &OutputConfig::dir)
      .def_readwrite("dump_images", &OutputConfig::dump_images);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("generation", &PipelineConfig::generation)
      .def_readwrite("n_spots", &PipelineConfig::n_spots)
      .def_readwrite("viewport", &PipelineConfig::viewport)
      .def_readwrite("crop", &PipelineConfig::crop)
      .def_readwrite("detector", &PipelineConfig::detector)
      .def_readwrite("tolerances", &PipelineConfig::tolerances)
      .def_readwrite("failure_model", &PipelineConfig::failure_model)
      .def_readwrite("output", &PipelineConfig::output)
      .def_readwrite("eval_iou", &PipelineConfig::eval_iou)
      .def_readwrite("threads", &PipelineConfig::threads);

  py::class_<RelErrors>(m, "RelErrors")
      .def_readonly("pd", &RelErrors::pd)
      .def_readonly("ul", &RelErrors::ul)
      .def_readonly("gl", &RelErrors::gl);

  py::class_<SpotResult>(m, "SpotResult")
      .def_readonly("spot_index", &SpotResult::spot_index)
      .def_readonly("status", &SpotResult::status)
      .def_readonly("region_detections", &SpotResult::region_detections)
      .def_readonly("region_hit", &SpotResult::region_hit)
      .def_readonly("gamma", &SpotResult::gamma)
      .def_readonly("point_detections", &SpotResult::point_detections)
      .def_readonly("point_hit", &SpotResult::point_hit)
      .def_readonly("measurements", &SpotResult::measurements)
      .def_readonly("judgment", &SpotResult::judgment)
      .def_readonly("rel_errors", &SpotResult::rel_errors);

  py::class_<ReportAggregates>(m, "ReportAggregates")
      .def_readonly("region_accuracy", &ReportAggregates::region_accuracy)
      .def_readonly("point_accuracy", &ReportAggregates::point_accuracy)
      .def_readonly("point_accuracy_avg", &ReportAggregates::point_accuracy_avg)
      .def_readonly("mean_rel_error", &ReportAggregates::mean_rel_error)
      .def_readonly("frac_err_lt_1", &ReportAggregates::frac_err_lt_1)
      .def_readonly("frac_err_lt_4", &ReportAggregates::frac_err_lt_4)
      .def_readonly("pass_rate", &ReportAggregates::pass_rate)
      .def_readonly("measured_point_rate", &ReportAggregates::measured_point_rate)
      .def_readonly("predicted_line_failure_rate",
                    &ReportAggregates::predicted_line_failure_rate);

  py::class_<InspectionReport>(m, "InspectionReport")
      .def_readonly("design_id", &InspectionReport::design_id)
      .def_readonly("line_id", &InspectionReport::line_id)
      .def_readonly("truth", &InspectionReport::truth)
      .def_readonly("spots", &InspectionReport::spots)
      .def_readonly("aggregates", &InspectionReport::aggregates)
      .def_readonly("timing", &InspectionReport::timing)
      .def("to_json", &report_to_json);

  py::enum_<ReportFormat>(m, "ReportFormat")
      .value("structured", ReportFormat::structured)
      .value("tabular", ReportFormat::tabular);

  m.def("inspect_die", &inspect_die, py::arg("design"), py::arg("cfg") = PipelineConfig{});
  m.def("emit_report", &emit_report);
  m.def("load_report", &load_report);
  m.def("verify_report_consistency", &verify_report_consistency);
  m.def("config_to_json", &config_to_json);
  m.def("config_from_json", &config_from_json);

  // kernel checks ------------------------------------------------------------
  py::class_<checks::CheckOptions>(m, "CheckOptions")
      .def(py::init<>())
      .def_readwrite("grad_trials", &checks::CheckOptions::grad_trials)
      .def_readwrite("nms_trials", &checks::CheckOptions::nms_trials)
      .def_readwrite("roundtrip_trials", &checks::CheckOptions::roundtrip_trials)
      .def_readwrite("seed", &checks::CheckOptions::seed)
      .def_readwrite("inject_fault", &checks::CheckOptions::inject_fault);

  py::class_<checks::CheckResult>(m, "CheckResult")
      .def_readonly("name", &checks::CheckResult::name)
      .def_readonly("passed", &checks::CheckResult::passed)
      .def_readonly("detail", &checks::CheckResult::detail);

  m.def("run_detmath_checks", &checks::run_detmath_checks);

  m.attr("__version__") = "0.1.0";
}
