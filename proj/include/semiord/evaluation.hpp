#ifndef SEMIORD_EVALUATION_HPP
#define SEMIORD_EVALUATION_HPP

#include "semiord/design.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semiord {

// n_v x K predicted category probabilities.
struct ProbabilisticForecast {
  Matrix probs;
};

struct FoldAssignment {
  std::vector<int> fold_of;  // values in 0..V-1
  int n_folds = 0;
  std::uint64_t seed = 0;
};

// (1/n_v) sum_i sum_k (F_ik - Fhat_ik)^2 over predicted and realized CDFs.
double rps(const ProbabilisticForecast& forecast, const std::vector<int>& outcomes);

// Fraction of units whose modal predicted category differs from the observed
// one; argmax ties break toward the lowest category.
double misclassification(const ProbabilisticForecast& forecast,
                         const std::vector<int>& outcomes);

FoldAssignment make_folds(int n, int n_folds, std::uint64_t seed);

enum class ModelKind {
  MarginalBaseline,
  StratifiedBaseline,
  Parallel,
  NonParallel,
  SemiParallel
};

struct ModelDescriptor {
  std::string name;
  ModelKind kind = ModelKind::MarginalBaseline;
  std::vector<std::string> stratum_vars;  // stratified baseline only
  HyperParams hyper;                      // semi-parallel only
  bool include_lhu = true;                // fitted models
};

struct FoldResult {
  double rps = 0.0;
  double me = 0.0;
  bool fallback_used = false;  // unseen stratum fell back to marginal
};

struct ModelEvaluation {
  std::string model;
  std::vector<FoldResult> folds;
  double avg_rps = 0.0;
  double avg_me = 0.0;
};

struct EvaluationReport {
  std::vector<ModelEvaluation> models;
  FoldAssignment folds;
};

struct CrossValidationOptions {
  int n_folds = 5;
  std::uint64_t seed = 0;
  FitOptions fit_options;
  std::optional<ScalingMode> scaling;  // nullopt: per-spec scaling
  std::optional<FoldAssignment> preassigned_folds;
};

EvaluationReport cross_validate(const OrdinalDataset& data,
                                const std::vector<VariableSpec>& specs,
                                const std::vector<ModelDescriptor>& models,
                                const CrossValidationOptions& options);

// Constant weighted class-proportion forecast from a training sample.
Vector baseline_marginal(const std::vector<int>& outcomes, const Vector& weights,
                         int n_categories);

// Per-stratum class proportions with marginal fallback for unseen strata.
struct StratifiedBaseline {
  std::vector<std::string> keys;
  std::vector<Vector> proportions;
  Vector marginal;

  Vector predict(const std::string& key, bool* fallback = nullptr) const;
};

StratifiedBaseline baseline_stratified(const std::vector<int>& outcomes,
                                       const Vector& weights, int n_categories,
                                       const std::vector<std::string>& stratum_keys);

// Composite stratum key "var1=...|var2=..." for a record row; the pseudo
// variable "LHU" refers to the dataset's LHU labels.
std::vector<std::string> stratum_keys(const OrdinalDataset& data,
                                      const std::vector<std::string>& vars);

struct GridPoint {
  double lambda = 0.0;
  double rho = 0.0;
  double avg_rps = 0.0;
  double avg_me = 0.0;
  bool failed = false;
  std::string failure;
};

struct GridReport {
  std::vector<GridPoint> points;
  HyperParams best;
  bool any_success = false;
};

// Evaluates every (lambda, rho) pair by average CV RPS of the semi-parallel
// model; ties break toward larger lambda, then larger rho.
GridReport grid_search(const OrdinalDataset& data,
                       const std::vector<VariableSpec>& specs,
                       const std::vector<double>& lambda_grid,
                       const std::vector<double>& rho_grid, double alpha,
                       const CrossValidationOptions& options);

std::vector<double> default_lambda_grid();  // 10^{-6.00 .. -2.00}, 7 points
std::vector<double> default_rho_grid();     // 0.50 .. 1.50, 7 points

// Forecast from a fitted model on a (possibly out-of-sample) design; the
// predicted CDF is made monotone by a cumulative max before differencing.
ProbabilisticForecast predict(const ModelFit& fit_result, const Matrix& design);

}  // namespace semiord

#endif
