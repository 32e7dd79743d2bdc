#include "semiord/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace semiord {

double rps(const ProbabilisticForecast& forecast, const std::vector<int>& outcomes) {
  const long n = forecast.probs.rows();
  const int k_count = static_cast<int>(forecast.probs.cols());
  if (n == 0) throw ConfigError("empty validation set");
  if (static_cast<long>(outcomes.size()) != n)
    throw StructuralError("forecast/outcome size mismatch");
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    double cdf = 0.0;
    for (int k = 0; k < k_count - 1; ++k) {  // top-category term is 0
      cdf += forecast.probs(i, k);
      const double realized = outcomes[i] <= k ? 1.0 : 0.0;
      total += (realized - cdf) * (realized - cdf);
    }
  }
  return total / static_cast<double>(n);
}

double misclassification(const ProbabilisticForecast& forecast,
                         const std::vector<int>& outcomes) {
  const long n = forecast.probs.rows();
  const int k_count = static_cast<int>(forecast.probs.cols());
  if (n == 0) throw ConfigError("empty validation set");
  if (static_cast<long>(outcomes.size()) != n)
    throw StructuralError("forecast/outcome size mismatch");
  long errors = 0;
  for (long i = 0; i < n; ++i) {
    int best = 0;
    for (int k = 1; k < k_count; ++k)
      if (forecast.probs(i, k) > forecast.probs(i, best)) best = k;
    if (best != outcomes[i]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

FoldAssignment make_folds(int n, int n_folds, std::uint64_t seed) {
  if (n < n_folds) throw ConfigError("fewer observations than folds");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  FoldAssignment fa;
  fa.fold_of.resize(n);
  fa.n_folds = n_folds;
  fa.seed = seed;
  for (int i = 0; i < n; ++i) fa.fold_of[order[i]] = i % n_folds;
  return fa;
}

Vector baseline_marginal(const std::vector<int>& outcomes, const Vector& weights,
                         int n_categories) {
  if (outcomes.empty()) throw ConfigError("empty training sample");
  Vector counts = Vector::Zero(n_categories);
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    counts[outcomes[i]] += weights[static_cast<long>(i)];
  return counts / counts.sum();
}

Vector StratifiedBaseline::predict(const std::string& key, bool* fallback) const {
  for (std::size_t s = 0; s < keys.size(); ++s)
    if (keys[s] == key) {
      if (fallback) *fallback = false;
      return proportions[s];
    }
  if (fallback) *fallback = true;
  return marginal;
}

StratifiedBaseline baseline_stratified(const std::vector<int>& outcomes,
                                       const Vector& weights, int n_categories,
                                       const std::vector<std::string>& keys) {
  if (outcomes.size() != keys.size())
    throw StructuralError("stratum key length mismatch");
  StratifiedBaseline out;
  out.marginal = baseline_marginal(outcomes, weights, n_categories);
  std::map<std::string, Vector> counts;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto [it, inserted] = counts.try_emplace(keys[i], Vector::Zero(n_categories));
    it->second[outcomes[i]] += weights[static_cast<long>(i)];
  }
  for (auto& [key, c] : counts) {
    out.keys.push_back(key);
    out.proportions.push_back(c / c.sum());
  }
  return out;
}

std::vector<std::string> stratum_keys(const OrdinalDataset& data,
                                      const std::vector<std::string>& vars) {
  const std::size_t n = data.size();
  std::vector<std::string> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream key;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (v > 0) key << '|';
      if (vars[v] == "LHU") {
        if (data.lhu.empty()) throw SchemaError("dataset has no LHU labels");
        key << data.lhu[i];
        continue;
      }
      const RawColumn* col = data.records.find(vars[v]);
      if (!col) throw SchemaError("unknown stratum variable '" + vars[v] + "'");
      if (col->is_numeric)
        key << col->values[i];
      else
        key << (col->levels.empty() ? std::to_string(col->codes[i])
                                    : col->levels[col->codes[i]]);
    }
    keys[i] = key.str();
  }
  return keys;
}

ProbabilisticForecast predict(const ModelFit& fit_result, const Matrix& design) {
  const Matrix eta = linear_predictor_matrix(design, fit_result.coefs);
  const long n = eta.rows();
  const int j_count = static_cast<int>(eta.cols());
  ProbabilisticForecast out;
  out.probs.resize(n, j_count + 1);
  for (long i = 0; i < n; ++i) {
    double prev = 0.0;
    for (int j = 0; j < j_count; ++j) {
      const double cum = std::max(prev, sigmoid(eta(i, j)));
      out.probs(i, j) = cum - prev;
      prev = cum;
    }
    out.probs(i, j_count) = 1.0 - prev;
  }
  return out;
}

namespace {

struct FoldContext {
  OrdinalDataset train;
  OrdinalDataset valid;
  // Designs built lazily, keyed by include_lhu.
  std::map<bool, std::pair<DesignMatrix, DesignMatrix>> designs;

  const std::pair<DesignMatrix, DesignMatrix>& get_designs(
      const std::vector<VariableSpec>& specs, bool include_lhu,
      std::optional<ScalingMode> scaling) {
    auto it = designs.find(include_lhu);
    if (it != designs.end()) return it->second;
    DesignMatrix train_design =
        build_design(train.records, specs, include_lhu, train.lhu);
    train_design = apply_scaling(train_design, specs, scaling);
    DesignMatrix valid_design =
        transfer_scaling(valid.records, specs, train_design, valid.lhu);
    return designs.emplace(include_lhu,
                           std::make_pair(std::move(train_design),
                                          std::move(valid_design)))
        .first->second;
  }
};

}  // namespace

EvaluationReport cross_validate(const OrdinalDataset& data,
                                const std::vector<VariableSpec>& specs,
                                const std::vector<ModelDescriptor>& models,
                                const CrossValidationOptions& options) {
  const int n = static_cast<int>(data.size());
  EvaluationReport report;
  report.folds = options.preassigned_folds
                     ? *options.preassigned_folds
                     : make_folds(n, options.n_folds, options.seed);
  if (static_cast<int>(report.folds.fold_of.size()) != n)
    throw StructuralError("fold assignment does not cover the dataset");
  for (const auto& m : models) {
    ModelEvaluation ev;
    ev.model = m.name;
    report.models.push_back(ev);
  }

  for (int v = 0; v < report.folds.n_folds; ++v) {
    std::vector<int> train_rows, valid_rows;
    for (int i = 0; i < n; ++i)
      (report.folds.fold_of[i] == v ? valid_rows : train_rows).push_back(i);

    FoldContext ctx;
    ctx.train = subset_dataset(data, train_rows);
    ctx.valid = subset_dataset(data, valid_rows);

    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto& desc = models[m];
      FoldResult fr;
      ProbabilisticForecast forecast;
      switch (desc.kind) {
        case ModelKind::MarginalBaseline: {
          const Vector p = baseline_marginal(ctx.train.y, ctx.train.weights,
                                             data.n_categories);
          forecast.probs = p.transpose().replicate(
              static_cast<long>(ctx.valid.size()), 1);
          break;
        }
        case ModelKind::StratifiedBaseline: {
          const auto train_keys = stratum_keys(ctx.train, desc.stratum_vars);
          const auto valid_keys = stratum_keys(ctx.valid, desc.stratum_vars);
          const auto rule = baseline_stratified(
              ctx.train.y, ctx.train.weights, data.n_categories, train_keys);
          forecast.probs.resize(static_cast<long>(ctx.valid.size()),
                                data.n_categories);
          for (std::size_t i = 0; i < ctx.valid.size(); ++i) {
            bool fb = false;
            forecast.probs.row(static_cast<long>(i)) =
                rule.predict(valid_keys[i], &fb).transpose();
            fr.fallback_used = fr.fallback_used || fb;
          }
          break;
        }
        case ModelKind::Parallel:
        case ModelKind::NonParallel:
        case ModelKind::SemiParallel: {
          const auto& [train_design, valid_design] =
              ctx.get_designs(specs, desc.include_lhu, options.scaling);
          ModelFit fitted;
          if (desc.kind == ModelKind::SemiParallel) {
            fitted = fit(ctx.train, train_design.values, desc.hyper,
                         options.fit_options);
          } else {
            HyperParams unpenalized;
            unpenalized.lambda = 0.0;
            fitted = fit_restricted(ctx.train, train_design.values,
                                    desc.kind == ModelKind::Parallel
                                        ? Restriction::Parallel
                                        : Restriction::NonParallel,
                                    unpenalized, options.fit_options);
          }
          forecast = predict(fitted, valid_design.values);
          break;
        }
      }
      fr.rps = rps(forecast, ctx.valid.y);
      fr.me = misclassification(forecast, ctx.valid.y);
      report.models[m].folds.push_back(fr);
    }
  }

  for (auto& ev : report.models) {
    double sr = 0.0, sm = 0.0;
    for (const auto& f : ev.folds) {
      sr += f.rps;
      sm += f.me;
    }
    ev.avg_rps = sr / static_cast<double>(ev.folds.size());
    ev.avg_me = sm / static_cast<double>(ev.folds.size());
  }
  return report;
}

std::vector<double> default_lambda_grid() {
  const double exponents[] = {-6.00, -5.33, -4.67, -4.00, -3.33, -2.67, -2.00};
  std::vector<double> grid;
  for (double e : exponents) grid.push_back(std::pow(10.0, e));
  return grid;
}

std::vector<double> default_rho_grid() {
  return {0.50, 0.67, 0.83, 1.00, 1.17, 1.33, 1.50};
}

GridReport grid_search(const OrdinalDataset& data,
                       const std::vector<VariableSpec>& specs,
                       const std::vector<double>& lambda_grid,
                       const std::vector<double>& rho_grid, double alpha,
                       const CrossValidationOptions& options) {
  if (lambda_grid.empty() || rho_grid.empty())
    throw ConfigError("empty hyperparameter grid");
  GridReport report;
  for (double lambda : lambda_grid) {
    for (double rho : rho_grid) {
      GridPoint point;
      point.lambda = lambda;
      point.rho = rho;
      ModelDescriptor desc;
      desc.name = "semi-parallel";
      desc.kind = ModelKind::SemiParallel;
      desc.hyper = HyperParams{lambda, alpha, rho};
      try {
        const auto ev = cross_validate(data, specs, {desc}, options);
        point.avg_rps = ev.models[0].avg_rps;
        point.avg_me = ev.models[0].avg_me;
      } catch (const std::exception& e) {
        point.failed = true;
        point.failure = e.what();
      }
      report.points.push_back(point);
    }
  }
  bool have_best = false;
  GridPoint best;
  for (const auto& p : report.points) {
    if (p.failed) continue;
    const bool better =
        !have_best || p.avg_rps < best.avg_rps ||
        (p.avg_rps == best.avg_rps &&
         (p.lambda > best.lambda ||
          (p.lambda == best.lambda && p.rho > best.rho)));
    if (better) {
      best = p;
      have_best = true;
    }
  }
  report.any_success = have_best;
  if (have_best) report.best = HyperParams{best.lambda, alpha, best.rho};
  return report;
}

}  // namespace semiord
