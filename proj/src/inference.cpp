#include "semiord/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <thread>

namespace semiord {

std::vector<Stratum> build_strata(const std::vector<std::string>& keys) {
  std::map<std::string, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(keys.size()); ++i)
    groups[keys[i]].push_back(i);
  std::vector<Stratum> strata;
  for (auto& [key, indices] : groups) {
    if (indices.empty()) throw StructuralError("empty stratum '" + key + "'");
    strata.push_back(Stratum{key, std::move(indices)});
  }
  return strata;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(replicate) + 1));
}

}  // namespace

std::vector<int> stratified_resample(const std::vector<Stratum>& strata,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> rows;
  for (const auto& s : strata) {
    const std::uint64_t n_s = s.indices.size();
    for (std::uint64_t d = 0; d < n_s; ++d)
      rows.push_back(s.indices[static_cast<std::size_t>(rng() % n_s)]);
  }
  return rows;
}

BootstrapEnsemble bootstrap(const OrdinalDataset& data,
                            const std::vector<VariableSpec>& specs,
                            const HyperParams& hyper,
                            const BootstrapOptions& options) {
  if (options.replicates < 1) throw ConfigError("replicates must be >= 1");
  const auto keys = [&] {
    // stratum_keys lives in evaluation; rebuild the composite key here to
    // keep the dependency one-way.
    std::vector<std::string> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::string key;
      for (std::size_t v = 0; v < options.stratum_vars.size(); ++v) {
        if (v > 0) key += '|';
        const auto& var = options.stratum_vars[v];
        if (var == "LHU") {
          if (data.lhu.empty()) throw SchemaError("dataset has no LHU labels");
          key += data.lhu[i];
          continue;
        }
        const RawColumn* col = data.records.find(var);
        if (!col) throw SchemaError("unknown stratum variable '" + var + "'");
        key += col->is_numeric
                   ? std::to_string(col->values[i])
                   : (col->levels.empty() ? std::to_string(col->codes[i])
                                          : col->levels[col->codes[i]]);
      }
      out[i] = key;
    }
    return out;
  }();
  const auto strata = build_strata(keys);

  DesignMatrix full_design =
      build_design(data.records, specs, options.include_lhu, data.lhu);
  full_design = apply_scaling(full_design, specs, options.scaling);
  FitOptions full_opts = options.fit_options;
  full_opts.restriction = options.restriction;
  const ModelFit full_fit = options.restriction == Restriction::None
                                ? fit(data, full_design.values, hyper, full_opts)
                                : fit_restricted(data, full_design.values,
                                                 options.restriction, hyper,
                                                 full_opts);

  const int r_total = options.replicates;
  std::vector<CoefficientSet> results(r_total);
  std::vector<bool> ok(r_total, false);
  std::vector<std::string> errors(r_total);
  std::vector<std::uint64_t> seeds(r_total);
  for (int r = 0; r < r_total; ++r) seeds[r] = replicate_seed(options.seed, r);

  auto run_one = [&](int r) {
    try {
      const auto rows = stratified_resample(strata, seeds[r]);
      const OrdinalDataset boot = subset_dataset(data, rows);
      DesignMatrix boot_design =
          build_design(boot.records, specs, options.include_lhu, boot.lhu);
      boot_design = apply_scaling(boot_design, specs, options.scaling);
      FitOptions opts = options.fit_options;
      opts.restriction = options.restriction;
      opts.warm_start = full_fit.coefs;
      const ModelFit rf =
          options.restriction == Restriction::None
              ? fit(boot, boot_design.values, hyper, opts)
              : fit_restricted(boot, boot_design.values, options.restriction,
                               hyper, opts);
      results[r] = rf.coefs;
      ok[r] = true;
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  };

  const int workers = std::max(1, options.threads);
  if (workers == 1) {
    for (int r = 0; r < r_total; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < r_total; r = next.fetch_add(1))
          run_one(r);
      });
    for (auto& t : pool) t.join();
  }

  BootstrapEnsemble ensemble;
  ensemble.warm_started = true;
  for (int r = 0; r < r_total; ++r) {
    if (ok[r]) {
      ensemble.replicates.push_back(std::move(results[r]));
      ensemble.replicate_ids.push_back(r);
      ensemble.seeds.push_back(seeds[r]);
    } else {
      ensemble.failures.push_back(BootstrapFailure{r, errors[r]});
    }
  }
  ensemble.unreliable =
      ensemble.failures.size() * 10 > static_cast<std::size_t>(r_total);
  return ensemble;
}

Vector flatten_coefficients(const CoefficientSet& coefs) {
  const int j_count = coefs.margins();
  const int p_count = coefs.dim();
  Vector flat(j_count + p_count + p_count * j_count);
  int k = 0;
  for (int j = 0; j < j_count; ++j) flat[k++] = coefs.thresholds[j];
  for (int p = 0; p < p_count; ++p) flat[k++] = coefs.shared[p];
  for (int j = 0; j < j_count; ++j)
    for (int p = 0; p < p_count; ++p) flat[k++] = coefs.specific(p, j);
  return flat;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw ConfigError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> percentile_interval(const BootstrapEnsemble& ensemble,
                                              int coefficient_index,
                                              double level) {
  if (ensemble.replicates.size() < 20)
    throw ConfigError("too few successful replicates for an interval");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("interval level must be in (0,1)");
  std::vector<double> values;
  values.reserve(ensemble.replicates.size());
  for (const auto& r : ensemble.replicates)
    values.push_back(flatten_coefficients(r)[coefficient_index]);
  const double tail = (1.0 - level) / 2.0;
  return {quantile_type7(values, tail), quantile_type7(values, 1.0 - tail)};
}

namespace {

double sample_variance(const Vector& v) {
  const long n = v.size();
  if (n < 2) throw StructuralError("variance needs at least 2 observations");
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(n - 1);
}

constexpr double kLogisticVariance =
    std::numbers::pi * std::numbers::pi / 3.0;

}  // namespace

Vector pseudo_r2(const ModelFit& fit_result, const Matrix& design) {
  const Matrix eta = linear_predictor_matrix(design, fit_result.coefs);
  Vector r2(eta.cols());
  for (long j = 0; j < eta.cols(); ++j) {
    const double s2 = sample_variance(eta.col(j));
    r2[j] = s2 / (s2 + kLogisticVariance);
  }
  return r2;
}

VarianceDecomposition variance_decomposition(const ModelFit& fit_result,
                                             const DesignMatrix& design) {
  const auto lhu_cols = design.lhu_columns();
  VarianceDecomposition out;
  out.has_lhu_block = !lhu_cols.empty();
  std::vector<bool> is_lhu(design.cols(), false);
  for (int c : lhu_cols) is_lhu[c] = true;

  const int j_count = fit_result.coefs.margins();
  for (int j = 0; j < j_count; ++j) {
    const Vector gamma = fit_result.coefs.margin_coefficients(j);
    Vector gamma_main = gamma, gamma_lhu = gamma;
    for (int c = 0; c < design.cols(); ++c)
      (is_lhu[c] ? gamma_main : gamma_lhu)[c] = 0.0;

    const Vector main_part = design.values * gamma_main;
    const Vector eta = main_part.array() + fit_result.coefs.thresholds[j] +
                       (design.values * gamma_lhu).array();

    MarginDecomposition md;
    md.var_eta = sample_variance(eta);
    md.var_main = sample_variance(main_part);
    md.var_lhu =
        out.has_lhu_block ? sample_variance(design.values * gamma_lhu) : 0.0;
    md.covariance = (md.var_eta - md.var_main - md.var_lhu) / 2.0;
    md.pseudo_r2 = md.var_eta / (md.var_eta + kLogisticVariance);
    md.latent_total = md.var_eta + kLogisticVariance;
    out.margins.push_back(md);
  }
  return out;
}

}  // namespace semiord
