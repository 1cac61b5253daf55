#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trimdie/checks.hpp"
#include "trimdie/error.hpp"
#include "trimdie/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trimdie;

namespace {

std::string num(double v) { return json(v).dump(); }

int cmd_gen(std::uint64_t seed, int designs, int lines, const std::string& out_dir) {
  if (designs < 1) throw ConfigError("gen: --designs must be >= 1");
  fs::create_directories(out_dir);
  const ParamRanges ranges = ParamRanges::defaults();
  for (int i = 0; i < designs; ++i) {
    const DieDesign design = generate_design(seed + static_cast<std::uint64_t>(i), lines, ranges);
    char name[32];
    std::snprintf(name, sizeof(name), "design_%03d.json", i);
    save_design(design, (fs::path(out_dir) / name).string());
    std::cout << name << "  id=" << design.design_id
              << "  lines=" << design.trimming_lines.size() << "\n";
  }
  // a default pipeline config to start from
  PipelineConfig cfg;
  cfg.generation.seed = seed;
  cfg.generation.n_lines = lines;
  save_config(cfg, (fs::path(out_dir) / "config.json").string());
  return 0;
}

int cmd_inspect(const std::string& die_path, const std::string& config_path,
                const std::string& out_dir, int spots_override, int threads_override) {
  const DieDesign design = load_design(die_path);
  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
  if (spots_override > 0) cfg.n_spots = spots_override;
  if (threads_override > 0) cfg.threads = threads_override;
  cfg.output.dir = out_dir;

  const InspectionReport report = inspect_die(design, cfg);
  const std::string json_path = (fs::path(out_dir) / (design.design_id + "_report.json")).string();
  const std::string csv_path = (fs::path(out_dir) / (design.design_id + "_report.csv")).string();

  const ReportAggregates& a = report.aggregates;
  std::cout << "design " << report.design_id << ", line " << report.line_id << ", "
            << report.spots.size() << " spots\n";
  std::cout << "region_accuracy        " << num(a.region_accuracy) << "\n";
  std::cout << "point_accuracy_avg     " << num(a.point_accuracy_avg) << "\n";
  std::cout << "mean_rel_error_pct     " << num(a.mean_rel_error) << "\n";
  std::cout << "frac_err_lt_1          " << num(a.frac_err_lt_1) << "\n";
  std::cout << "frac_err_lt_4          " << num(a.frac_err_lt_4) << "\n";
  std::cout << "pass_rate              " << num(a.pass_rate) << "\n";
  std::cout << "line_failure_rate      " << num(a.predicted_line_failure_rate) << "\n";
  std::cout << "timing per spot [s]: data_processing " << num(report.timing.data_processing)
            << ", selective_cropping " << num(report.timing.selective_cropping)
            << ", region_detection " << num(report.timing.region_detection)
            << ", point_detection_measurement "
            << num(report.timing.point_detection_measurement) << "\n";
  std::cout << "zigzag_overhead [s]: " << num(report.timing.zigzag_overhead) << ", total "
            << num(total_time(report.timing, static_cast<int>(report.spots.size()))) << "\n";
  std::cout << "reports: " << json_path << " " << csv_path << "\n";
  return 0;
}

struct AblateRow {
  std::string design_id;
  double with_shortcut = 0.0;
  double without_shortcut = 0.0;
};

// Region-detection accuracy of the top-1 candidate, with and without the
// shortcut mark, over every section of one design.
AblateRow ablate_design(const DieDesign& design, const PipelineConfig& cfg) {
  const TrimmingLine& line = design.target_line();
  const auto spots = place_spots(design, line.line_id, cfg.n_spots);

  AblateRow row;
  row.design_id = design.design_id;
  int hit_with = 0, hit_without = 0;
  for (std::size_t i = 0; i < spots.size(); ++i) {
    const SectionProfile profile = section_at(design, spots[i]);
    const Viewport vp = section_viewport(design, cfg.viewport, profile, spots[i].spot_index);

    for (const bool shortcut : {true, false}) {
      const SectionRender render = render_section(profile, vp, shortcut);
      DetectorConfig dc = cfg.detector;
      dc.use_shortcut = shortcut;
      const auto dets = detect_trimming_region(render.image, dc);
      const bool hit = !dets.empty() &&
                       iou(dets.front().box, render.truth_boxes.front().box) >= cfg.eval_iou;
      (shortcut ? hit_with : hit_without) += hit ? 1 : 0;
    }
  }
  row.with_shortcut = static_cast<double>(hit_with) / spots.size();
  row.without_shortcut = static_cast<double>(hit_without) / spots.size();
  return row;
}

int cmd_ablate(const std::string& dies_dir, const std::string& out_file, int n_spots) {
  std::vector<fs::path> files;
  if (fs::is_directory(dies_dir)) {
    for (const auto& e : fs::directory_iterator(dies_dir))
      if (e.path().extension() == ".json" && e.path().filename() != "config.json")
        files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("ablate: no die files in " + dies_dir);

  PipelineConfig cfg;
  if (n_spots > 0) cfg.n_spots = n_spots;

  std::string csv = "design_id,with_shortcut,without_shortcut\n";
  double sum_with = 0.0, sum_without = 0.0;
  std::cout << "design_id          with    without\n";
  for (const auto& f : files) {
    const AblateRow row = ablate_design(load_design(f.string()), cfg);
    csv += row.design_id + "," + num(row.with_shortcut) + "," + num(row.without_shortcut) + "\n";
    std::printf("%-18s %.4f  %.4f\n", row.design_id.c_str(), row.with_shortcut,
                row.without_shortcut);
    sum_with += row.with_shortcut;
    sum_without += row.without_shortcut;
  }
  std::printf("%-18s %.4f  %.4f\n", "overall", sum_with / files.size(),
              sum_without / files.size());
  csv += "overall," + num(sum_with / files.size()) + "," + num(sum_without / files.size()) + "\n";

  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw Error("ablate: cannot write " + out_file);
    out << csv;
  }
  return 0;
}

// gamma accuracy across zoom levels, and measurement error across crop
// resolutions; plot-ready CSV.
int cmd_sweep(const std::string& out_file) {
  std::string csv = "sweep,setting,value\n";
  std::cout << "gamma sweep (mm_per_px -> |gamma-mm_per_px|/mm_per_px):\n";
  for (const double mpp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    const int size = static_cast<int>(20.0 / mpp) + 16;
    const RgbImage circle = render_calibration_circle(mpp, size);
    const ScaleFactor sf = scale_factor(circle);
    const double rel = std::abs(sf.gamma - mpp) / mpp;
    std::cout << "  " << num(mpp) << " -> " << num(rel) << "\n";
    csv += "gamma_rel_error," + num(mpp) + "," + num(rel) + "\n";
  }

  std::cout << "measurement error vs crop size (mean rel error %, 1 design x 8 spots):\n";
  for (const int crop_size : {320, 480, 640, 800}) {
    PipelineConfig cfg;
    cfg.n_spots = 8;
    cfg.crop.size = crop_size;
    cfg.crop.region_span_px = crop_size * 0.625;
    const DieDesign design = generate_design(11, 3, cfg.generation.ranges);
    const InspectionReport report = inspect_die(design, cfg);
    std::cout << "  " << crop_size << " -> " << num(report.aggregates.mean_rel_error) << "\n";
    csv += "mean_rel_error_pct," + std::to_string(crop_size) + "," +
           num(report.aggregates.mean_rel_error) + "\n";
  }

  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw Error("sweep: cannot write " + out_file);
    out << csv;
  }
  return 0;
}

int cmd_detmath_check(int trials, const std::string& fault) {
  checks::CheckOptions opts;
  if (trials > 0) {
    opts.grad_trials = trials;
    opts.nms_trials = trials;
    opts.roundtrip_trials = trials;
  }
  opts.inject_fault = fault;

  const auto results = checks::run_detmath_checks(opts);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.detail << ")\n";
    failed += r.passed ? 0 : 1;
  }
  if (failed == 0) {
    std::cout << "all " << results.size() << " properties passed\n";
    return 0;
  }
  std::cerr << failed << " of " << results.size() << " properties failed\n";
  return 1;
}

int cmd_report(const std::string& report_path) {
  // load_report re-derives the aggregates and rejects mismatches
  const InspectionReport report = load_report(report_path);
  const ReportAggregates& a = report.aggregates;
  std::cout << "design " << report.design_id << ", " << report.spots.size() << " spots, truth pd/ul/gl "
            << num(report.truth.pd) << "/" << num(report.truth.ul) << "/" << num(report.truth.gl)
            << "\n";
  int ok = 0, region_miss = 0, point_miss = 0;
  for (const auto& s : report.spots) {
    if (s.status == SpotStatus::ok) ++ok;
    if (s.status == SpotStatus::region_miss) ++region_miss;
    if (s.status == SpotStatus::point_miss) ++point_miss;
  }
  std::cout << "status: ok " << ok << ", region_miss " << region_miss << ", point_miss "
            << point_miss << "\n";
  std::cout << "region_accuracy " << num(a.region_accuracy) << ", point_accuracy_avg "
            << num(a.point_accuracy_avg) << ", mean_rel_error_pct " << num(a.mean_rel_error)
            << ", pass_rate " << num(a.pass_rate) << "\n";
  std::cout << "aggregates consistent with rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic trimming-die design inspection pipeline"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate synthetic die-model files");
  std::uint64_t gen_seed = 1;
  int gen_designs = 4;
  int gen_lines = 3;
  std::string gen_out = "dies";
  gen->add_option("--seed", gen_seed, "base seed");
  gen->add_option("--designs", gen_designs, "number of designs");
  gen->add_option("--lines", gen_lines, "trimming lines per design");
  gen->add_option("--out", gen_out, "output directory");

  auto* inspect = app.add_subcommand("inspect", "run the zigzag inspection on one die");
  std::string die_path, config_path, inspect_out = "out";
  int spots_override = 0, threads_override = 0;
  inspect->add_option("--die", die_path, "die-model file")->required();
  inspect->add_option("--config", config_path, "pipeline config file");
  inspect->add_option("--out", inspect_out, "output directory");
  inspect->add_option("--spots", spots_override, "override n_spots");
  inspect->add_option("--threads", threads_override, "override worker thread count");

  auto* ablate = app.add_subcommand("ablate", "region detection with vs without shortcuts");
  std::string dies_dir, ablate_out;
  int ablate_spots = 0;
  ablate->add_option("--dies", dies_dir, "directory of die-model files")->required();
  ablate->add_option("--out", ablate_out, "comparison CSV path");
  ablate->add_option("--spots", ablate_spots, "sections per design");

  auto* sweep = app.add_subcommand("sweep", "metrology sweeps, plot-ready CSV");
  std::string sweep_out;
  sweep->add_option("--out", sweep_out, "CSV path");

  auto* check = app.add_subcommand("detmath-check", "validate the detection math kernel");
  int check_trials = 0;
  std::string check_fault;
  check->add_option("--trials", check_trials, "randomized trial count per property");
  check->add_option("--inject-fault", check_fault,
                    "harness self-test: smoothl1-branch | nms-threshold | encode-sign");

  auto* rep = app.add_subcommand("report", "summarize and validate a JSON report");
  std::string report_path;
  rep->add_option("--in", report_path, "report JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_seed, gen_designs, gen_lines, gen_out);
    if (inspect->parsed())
      return cmd_inspect(die_path, config_path, inspect_out, spots_override, threads_override);
    if (ablate->parsed()) return cmd_ablate(dies_dir, ablate_out, ablate_spots);
    if (sweep->parsed()) return cmd_sweep(sweep_out);
    if (check->parsed()) return cmd_detmath_check(check_trials, check_fault);
    if (rep->parsed()) return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
