#include "semiord/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace semiord {

namespace {
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
}

RotatedPair to_positivity_neutrality(const CoefficientPair& pair) {
  RotatedPair rot;
  rot.positivity = -(pair.b_neg + pair.b_zero) * kInvSqrt2;
  rot.neutrality = (pair.b_zero - pair.b_neg) * kInvSqrt2;
  rot.label = pair.label;
  return rot;
}

CoefficientPair from_positivity_neutrality(const RotatedPair& rot) {
  CoefficientPair pair;
  pair.b_neg = (-rot.positivity - rot.neutrality) * kInvSqrt2;
  pair.b_zero = (-rot.positivity + rot.neutrality) * kInvSqrt2;
  pair.label = rot.label;
  return pair;
}

std::string quadrant_label(Quadrant q) {
  switch (q) {
    case Quadrant::HarmfulOrIrrelevant: return "harmful-or-irrelevant";
    case Quadrant::IncreasedNeutrality: return "increased-neutrality";
    case Quadrant::Polarization: return "polarization";
    case Quadrant::Beneficial: return "beneficial";
    case Quadrant::AxisBorderline: return "axis-borderline";
  }
  return "unknown";
}

Quadrant classify_quadrant(const CoefficientPair& pair, double tolerance) {
  if (std::abs(pair.b_neg) <= tolerance || std::abs(pair.b_zero) <= tolerance)
    return Quadrant::AxisBorderline;
  if (pair.b_neg > 0.0)
    return pair.b_zero > 0.0 ? Quadrant::HarmfulOrIrrelevant
                             : Quadrant::Polarization;
  return pair.b_zero > 0.0 ? Quadrant::IncreasedNeutrality
                           : Quadrant::Beneficial;
}

std::vector<RankedEffect> rank_effects(
    const std::vector<RotatedPair>& pairs, RotationAxis axis,
    const std::vector<std::pair<double, double>>& bands) {
  if (pairs.empty()) throw ConfigError("nothing to rank");
  if (!bands.empty() && bands.size() != pairs.size())
    throw StructuralError("band count does not match pair count");
  std::vector<RankedEffect> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    RankedEffect e;
    e.pair = pairs[i];
    e.value = axis == RotationAxis::Positivity ? pairs[i].positivity
                                               : pairs[i].neutrality;
    if (!bands.empty()) e.band = bands[i];
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedEffect& a, const RankedEffect& b) {
                     return a.value > b.value;
                   });
  return out;
}

}  // namespace semiord
