// Compiled without any CAD-domain header: proves the AI-domain operations
// admit only pixel-space inputs. Inclusion of the mm-domain geometry module
// anywhere under detector.hpp fails this translation unit.
#include "trimdie/detector.hpp"

#ifdef TRIMDIE_DIEMODEL_INCLUDED
#error "detector.hpp must not pull in mm-domain geometry headers"
#endif

#include <type_traits>

namespace trimdie_acceptance {

static_assert(std::is_invocable_r_v<std::vector<trimdie::Detection>,
                                    decltype(trimdie::detect_trimming_region),
                                    const trimdie::RgbImage&, const trimdie::DetectorConfig&>);
static_assert(std::is_invocable_r_v<std::vector<trimdie::Detection>,
                                    decltype(trimdie::detect_target_points),
                                    const trimdie::RgbImage&, const trimdie::DetectorConfig&>);
static_assert(std::is_invocable_r_v<trimdie::EvalStats, decltype(trimdie::evaluate_detections),
                                    const std::vector<trimdie::Detection>&,
                                    const std::vector<trimdie::LabeledBox>&, double>);

bool boundary_probe_ok() { return true; }

}  // namespace trimdie_acceptance
