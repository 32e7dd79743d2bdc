#ifndef SEMIORD_SYNTH_HPP
#define SEMIORD_SYNTH_HPP

#include "semiord/design.hpp"
#include "semiord/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semiord {

// Synthetic survey-like population: optional sex/age stratification block,
// extra binary and numeric covariates, optional two-way interactions, and an
// LHU membership with one fixed effect per unit.
struct PopulationConfig {
  int n = 1000;
  int n_lhu = 0;                 // 0 disables the LHU block
  bool stratify_sex_age = false; // adds sex (binary) and ageclass (3 levels)
  int n_binary = 0;
  int n_numeric = 0;
  bool interactions = false;
  int n_categories = 3;
  CoefficientSet truth;  // dimension must match the implied design
  std::uint64_t seed = 0;
};

struct SyntheticData {
  OrdinalDataset dataset;
  DesignMatrix design;  // unscaled design the truth refers to
  CoefficientSet truth;
  std::vector<VariableSpec> specs;
  double invalid_rate = 0.0;  // first-draw units outside the valid region
};

// Variable specs implied by a config (sex/age first, then binaries, numerics).
std::vector<VariableSpec> population_specs(const PopulationConfig& config);

// Number of design columns the truth must cover.
int population_dim(const PopulationConfig& config);

// Random truth with margin-specific deviations small enough to keep the
// cumulative construction valid for typical covariate draws.
CoefficientSet random_truth(const PopulationConfig& config, std::uint64_t seed,
                            double shared_scale = 0.5,
                            double specific_scale = 0.1);

// Draws covariates per config and responses from the cumulative-logit model
// at the true coefficients. Units landing outside the valid probability
// region are redrawn; an initial invalid rate above 0.1% is an error.
SyntheticData generate(const PopulationConfig& config);

// Observed class proportions within one covariate cell, keyed by the exact
// combination of the named variables ("LHU" allowed).
Vector empirical_probabilities(const OrdinalDataset& data,
                               const std::vector<std::string>& cell_vars,
                               const std::string& cell_key);

}  // namespace semiord

#endif
