#ifndef SEMIORD_OPTIMIZER_HPP
#define SEMIORD_OPTIMIZER_HPP

#include "semiord/core_model.hpp"
#include "semiord/types.hpp"

#include <optional>
#include <vector>

namespace semiord {

struct HyperParams {
  double lambda = 1e-4;  // overall penalization
  double alpha = 0.5;    // lasso (1) vs ridge (0) mix
  double rho = 1.0;      // extra weight on the shared-coefficient block

  void validate() const;
};

enum class Restriction { None, Parallel, NonParallel };

struct FitOptions {
  int max_outer_iterations = 200;
  int max_inner_cycles = 100;           // coordinate cycles per quadratic model
  double objective_tolerance = 1e-9;    // relative, per outer sweep
  double coordinate_tolerance = 1e-12;  // skip smaller proposed moves
  int step_halving_max = 30;
  Restriction restriction = Restriction::None;
  std::optional<CoefficientSet> warm_start;
};

struct ModelFit {
  CoefficientSet coefs;
  HyperParams hyper;
  Restriction restriction = Restriction::None;
  std::vector<double> objective_trace;
  bool converged = false;
  int n_iterations = 0;
  bool separation = false;      // some coefficient exceeded the logit cap
  bool ridge_fallback = false;  // refit with a tiny ridge after separation
};

// lambda * ( rho * sum_p en(beta_p) + sum_{p,j} en(B_{p,j}) ) with
// en(t) = alpha|t| + (1-alpha)/2 t^2. Thresholds are never penalized.
double penalty_value(const CoefficientSet& coefs, const HyperParams& hyper);

// Negative weighted log-likelihood plus penalty; +inf outside the valid
// probability region so line searches can retreat.
double objective(const Matrix& design, const std::vector<int>& y,
                 const Vector& weights, const CoefficientSet& coefs,
                 const HyperParams& hyper);
double objective(const OrdinalDataset& data, const Matrix& design,
                 const CoefficientSet& coefs, const HyperParams& hyper);

double soft_threshold(double z, double gamma);

// Thresholds of the intercept-only model: logit of weighted cumulative
// class proportions.
Vector intercept_only_thresholds(const std::vector<int>& y,
                                 const Vector& weights, int n_categories);

// Proximal coordinate descent on the penalized objective. Each outer sweep
// builds a per-coordinate quadratic model of the negative log-likelihood,
// cycles soft-thresholded updates, then step-halves on the true objective
// until it decreases and the iterate stays in the valid region.
ModelFit fit(const Matrix& design, const std::vector<int>& y,
             const Vector& weights, int n_categories,
             const HyperParams& hyper, const FitOptions& options = {});
ModelFit fit(const OrdinalDataset& data, const Matrix& design,
             const HyperParams& hyper, const FitOptions& options = {});

// Parallel (B == 0) or non-parallel (beta == 0) fits; lambda = 0 is allowed
// here. Unpenalized fits that hit separation are refit with a tiny ridge.
ModelFit fit_restricted(const Matrix& design, const std::vector<int>& y,
                        const Vector& weights, int n_categories,
                        Restriction restriction, const HyperParams& hyper,
                        FitOptions options = {});
ModelFit fit_restricted(const OrdinalDataset& data, const Matrix& design,
                        Restriction restriction, const HyperParams& hyper,
                        const FitOptions& options = {});

}  // namespace semiord

#endif
