#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trimdie::checks {

// Validation harness for the detection math kernel. The oracles here
// (central finite differences, brute-force suppression) are written
// independently of the implementations they check.
struct CheckOptions {
  int grad_trials = 100;       // random points per gradient check
  int nms_trials = 500;        // randomized NMS instances
  int roundtrip_trials = 1000; // encode/decode pairs
  std::uint64_t seed = 20240613;
  std::string inject_fault;    // "", "smoothl1-branch", "nms-threshold", "encode-sign"
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_detmath_checks(const CheckOptions& opts);

}  // namespace trimdie::checks
