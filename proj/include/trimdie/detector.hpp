#pragma once

#include <map>
#include <string>
#include <vector>

#include "trimdie/detmath.hpp"
#include "trimdie/image.hpp"

// AI-domain stages. Everything here sees only pixel-space inputs: images,
// boxes, scalars. No mm-domain geometry types cross this boundary.

namespace trimdie {

struct Detection {
  Box box;              // px
  double score = 0.0;   // [0,1]
  std::string label;    // "region" or "point_1".."point_5"
};

struct DetectorConfig {
  bool use_shortcut = true;
  double proposal_iou_nms = 0.5;
  double junction_score_threshold = 0.5;
  int point_box_size = 12;

  // junction/corner heuristic parameters; held fixed within a suite
  int min_arm_px = 4;            // minimum straight run for an arm
  int cluster_radius_px = 42;    // Chebyshev radius joining corner blobs
  int min_cluster_corners = 4;   // candidate blobs need this many corners
  double junction_t_norm = 2.0;  // T-intersection count normalizer
  double min_circularity = 0.6;  // shortcut-mark filter (4*pi*A/P^2)
  int min_mark_px = 20;          // minimum shortcut component size
  int region_box_px = 30;        // returned region box side

  Rgb line_color{0, 0, 0};
  Rgb shortcut_color{255, 0, 0};

  void validate() const;
};

// Finds the target trimming region. Shortcut mode looks for the red circle
// mark; otherwise candidate junctions are scored by a corner-pattern
// heuristic and suppressed with NMS. Results are score-descending.
std::vector<Detection> detect_trimming_region(const RgbImage& image, const DetectorConfig& cfg);

// Finds target points #1..#5 on an enlarged trimming-region crop. Missing
// corners yield a partial list; points are never fabricated.
std::vector<Detection> detect_target_points(const RgbImage& crop, const DetectorConfig& cfg);

struct LabelStats {
  int total = 0;
  int detected = 0;
  double accuracy() const { return total > 0 ? static_cast<double>(detected) / total : 0.0; }
};

struct EvalStats {
  std::map<std::string, LabelStats> per_label;
  int total = 0;
  int detected = 0;
  double overall() const { return total > 0 ? static_cast<double>(detected) / total : 0.0; }
};

// A truth box counts as detected iff some same-label detection overlaps it
// with IoU >= threshold.
EvalStats evaluate_detections(const std::vector<Detection>& dets,
                              const std::vector<LabeledBox>& truths, double iou_threshold);

}  // namespace trimdie
