#ifndef SEMIORD_ROTATION_HPP
#define SEMIORD_ROTATION_HPP

#include "semiord/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace semiord {

// Two-margin coefficient pair (effect on Pr(y<=lowest), effect on
// Pr(y<=middle)). Defined only for K=3 models.
struct CoefficientPair {
  double b_neg = 0.0;
  double b_zero = 0.0;
  std::string label;
};

struct RotatedPair {
  double positivity = 0.0;
  double neutrality = 0.0;
  std::string label;
};

// Orthogonal map to the positivity-neutrality plane: flip the second
// coordinate, then rotate by 135 degrees. Equivalently
//   positivity = -(b_neg + b_zero)/sqrt(2),  neutrality = (b_zero - b_neg)/sqrt(2).
RotatedPair to_positivity_neutrality(const CoefficientPair& pair);

CoefficientPair from_positivity_neutrality(const RotatedPair& rot);

enum class Quadrant {
  HarmfulOrIrrelevant,  // (+,+): toward negative or neutral perception
  IncreasedNeutrality,  // (-,+)
  Polarization,         // (+,-)
  Beneficial,           // (-,-)
  AxisBorderline        // within tolerance of an axis
};

std::string quadrant_label(Quadrant q);

Quadrant classify_quadrant(const CoefficientPair& pair, double tolerance = 0.0);

struct RankedEffect {
  RotatedPair pair;
  double value = 0.0;  // coordinate used for ranking
  std::optional<std::pair<double, double>> band;
};

enum class RotationAxis { Positivity, Neutrality };

// Stable descending sort on the chosen coordinate; per-entry percentile
// bands are passed through when supplied.
std::vector<RankedEffect> rank_effects(
    const std::vector<RotatedPair>& pairs, RotationAxis axis,
    const std::vector<std::pair<double, double>>& bands = {});

}  // namespace semiord

#endif
