#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trimdie/detector.hpp"
#include "trimdie/diemodel.hpp"
#include "trimdie/measure.hpp"
#include "trimdie/raster.hpp"

namespace trimdie {

struct GenerationConfig {
  std::uint64_t seed = 1;
  int n_lines = 3;
  ParamRanges ranges = ParamRanges::defaults();
};

struct SectionViewConfig {
  double mm_per_px = 1.25;
  int width = 1880;
  int height = 933;
  double jitter_x = 150.0;  // seeded viewport-center jitter, mm
  double jitter_y = 100.0;
};

struct CropConfig {
  int size = 640;
  double region_span_px = 400.0;  // target pixel span of the trimming region
};

struct OutputConfig {
  std::string dir;  // when set, inspect_die writes <dir>/<design>_report.{json,csv}
  bool dump_images = false;
};

struct PipelineConfig {
  GenerationConfig generation;
  int n_spots = 50;
  SectionViewConfig viewport;
  CropConfig crop;
  DetectorConfig detector;
  ToleranceSpec tolerances;  // nominals default to the line's design values
  FailureModel failure_model;
  OutputConfig output;
  double eval_iou = 0.5;
  int threads = 1;

  void validate() const;
};

std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

enum class SpotStatus { ok, region_miss, point_miss };
std::string to_string(SpotStatus s);

// Average seconds per spot for the four zigzag stages, plus the one-off
// per-die interaction overhead.
struct StageTiming {
  double data_processing = 0.0;
  double selective_cropping = 0.0;
  double region_detection = 0.0;
  double point_detection_measurement = 0.0;
  double zigzag_overhead = 0.0;
};

double total_time(const StageTiming& t, int n_spots);

struct RelErrors {
  double pd = 0.0;
  double ul = 0.0;
  double gl = 0.0;
};

struct SpotResult {
  int spot_index = 0;
  SpotStatus status = SpotStatus::region_miss;
  std::vector<Detection> region_detections;
  bool region_hit = false;
  Vec2 crop_center_mm;
  double crop_mm_per_px = 0.0;
  double gamma = 0.0;
  std::vector<Detection> point_detections;
  std::array<bool, 5> point_hit{};
  std::optional<Measurements> measurements;
  std::optional<Judgment> judgment;
  std::optional<RelErrors> rel_errors;
};

struct ReportAggregates {
  double region_accuracy = 0.0;
  std::array<double, 5> point_accuracy{};
  double point_accuracy_avg = 0.0;
  double mean_rel_error = 0.0;
  double mean_rel_error_pd = 0.0;
  double mean_rel_error_ul = 0.0;
  double mean_rel_error_gl = 0.0;
  double frac_err_lt_1 = 0.0;
  double frac_err_lt_4 = 0.0;
  double pass_rate = 0.0;
  double measured_point_rate = 0.0;
  double predicted_spot_failure = 0.0;
  double predicted_line_failure_rate = 0.0;
};

struct InspectionReport {
  std::string design_id;
  std::string line_id;
  TruthLengths truth;
  PipelineConfig config;
  std::vector<SpotResult> spots;
  ReportAggregates aggregates;
  StageTiming timing;
};

// Section viewport for one spot: centered on the target region with a
// seeded jitter so the region is not always image-centered.
Viewport section_viewport(const DieDesign& design, const SectionViewConfig& view,
                          const SectionProfile& profile, int spot_index);

// Runs the full zigzag inspection over every spot of the target line.
// Stage failures degrade to per-spot statuses; only config/geometry errors
// abort the die.
InspectionReport inspect_die(const DieDesign& design, const PipelineConfig& cfg);

ReportAggregates recompute_aggregates(const std::vector<SpotResult>& spots,
                                      const FailureModel& failure_model);

enum class ReportFormat { structured, tabular };

void emit_report(const InspectionReport& report, const std::string& path, ReportFormat format);
std::string report_to_json(const InspectionReport& report);
InspectionReport report_from_json(const std::string& text);
InspectionReport load_report(const std::string& path);

// Aggregates must be recomputable from the per-spot rows exactly.
bool verify_report_consistency(const InspectionReport& report);

}  // namespace trimdie
