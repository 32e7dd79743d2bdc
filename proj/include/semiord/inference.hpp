#ifndef SEMIORD_INFERENCE_HPP
#define SEMIORD_INFERENCE_HPP

#include "semiord/design.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace semiord {

struct Stratum {
  std::string key;
  std::vector<int> indices;
  std::size_t size() const { return indices.size(); }
};

// Partition of the dataset by composite key (e.g. LHU x sex x age class).
std::vector<Stratum> build_strata(const std::vector<std::string>& keys);

// Draws size(s) units with replacement within every stratum; the union is the
// replicate. Deterministic in the seed.
std::vector<int> stratified_resample(const std::vector<Stratum>& strata,
                                     std::uint64_t seed);

struct BootstrapFailure {
  int replicate = 0;
  std::string reason;
};

struct BootstrapEnsemble {
  std::vector<CoefficientSet> replicates;
  std::vector<int> replicate_ids;
  std::vector<std::uint64_t> seeds;
  std::vector<BootstrapFailure> failures;
  bool warm_started = false;
  bool unreliable = false;  // more than 10% of replicate fits failed
};

struct BootstrapOptions {
  int replicates = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> stratum_vars = {"LHU"};
  FitOptions fit_options;
  std::optional<ScalingMode> scaling;
  bool include_lhu = true;
  Restriction restriction = Restriction::None;
};

// Stratified bootstrap: every replicate resamples within strata, rebuilds the
// design and refits with the given hyperparameters, warm-starting from the
// full-data fit. Per-replicate RNG streams are derived from the master seed
// by replicate index, so the ensemble is identical for any thread count.
BootstrapEnsemble bootstrap(const OrdinalDataset& data,
                            const std::vector<VariableSpec>& specs,
                            const HyperParams& hyper,
                            const BootstrapOptions& options);

// Empirical percentile interval (type-7 quantiles) of one coefficient across
// replicates. index walks thresholds, then shared, then specific by column.
std::pair<double, double> percentile_interval(const BootstrapEnsemble& ensemble,
                                              int coefficient_index,
                                              double level);

// Flattened coefficient vector in the interval indexing order.
Vector flatten_coefficients(const CoefficientSet& coefs);

double quantile_type7(std::vector<double> values, double prob);

// sigma2_j = sample variance of eta_j; R2_j = sigma2 / (sigma2 + pi^2/3).
Vector pseudo_r2(const ModelFit& fit_result, const Matrix& design);

struct MarginDecomposition {
  double var_eta = 0.0;        // sample variance of the linear predictor
  double var_lhu = 0.0;        // variance of the LHU-block contribution
  double var_main = 0.0;       // variance of the main-effects contribution
  double covariance = 0.0;     // Cov(main part, LHU part)
  double pseudo_r2 = 0.0;
  double latent_total = 0.0;   // var_eta + pi^2/3
};

struct VarianceDecomposition {
  std::vector<MarginDecomposition> margins;
  bool has_lhu_block = false;
};

VarianceDecomposition variance_decomposition(const ModelFit& fit_result,
                                             const DesignMatrix& design);

}  // namespace semiord

#endif
