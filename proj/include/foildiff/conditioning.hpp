#pragma once

#include <cmath>
#include <string>

#include "foildiff/common.hpp"

namespace foildiff {

enum class ConditioningKind {
  lift_coefficient,
  drag_coefficient,
  max_thickness,
  max_camber,
  none,
};

inline const char* to_string(ConditioningKind kind) {
  switch (kind) {
    case ConditioningKind::lift_coefficient: return "lift_coefficient";
    case ConditioningKind::drag_coefficient: return "drag_coefficient";
    case ConditioningKind::max_thickness: return "max_thickness";
    case ConditioningKind::max_camber: return "max_camber";
    case ConditioningKind::none: return "none";
  }
  return "none";
}

inline ConditioningKind conditioning_kind_from_string(const std::string& s) {
  if (s == "lift_coefficient" || s == "cl") return ConditioningKind::lift_coefficient;
  if (s == "drag_coefficient" || s == "cd") return ConditioningKind::drag_coefficient;
  if (s == "max_thickness") return ConditioningKind::max_thickness;
  if (s == "max_camber") return ConditioningKind::max_camber;
  if (s == "none") return ConditioningKind::none;
  fail(ErrorCode::InvalidRange, "unknown conditioning kind: " + s);
}

// Normalization statistics stored with a trained model; raw conditioning
// values are z-scored against them.
struct NormalizationStats {
  double mean = 0.0;
  double stddev = 1.0;

  double normalize(double raw) const { return (raw - mean) / stddev; }
};

struct ConditioningSpec {
  ConditioningKind kind = ConditioningKind::none;
  double raw_value = 0.0;
  double normalized_value = 0.0;

  static ConditioningSpec none() { return ConditioningSpec{}; }

  static ConditioningSpec make(ConditioningKind kind, double raw, const NormalizationStats& stats) {
    if (kind == ConditioningKind::none) return none();
    return ConditioningSpec{kind, raw, stats.normalize(raw)};
  }
};

}  // namespace foildiff
