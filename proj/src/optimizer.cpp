#include "semiord/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semiord {

namespace {

constexpr double kThresholdGap = 1e-8;
constexpr double kLogitCap = 30.0;  // separation heuristic

double elastic_net_term(double t, double alpha) {
  return alpha * std::abs(t) + 0.5 * (1.0 - alpha) * t * t;
}

}  // namespace

void HyperParams::validate() const {
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
  if (rho < 0.0) throw ConfigError("rho must be nonnegative");
}

double penalty_value(const CoefficientSet& coefs, const HyperParams& hyper) {
  double shared_part = 0.0;
  for (long p = 0; p < coefs.shared.size(); ++p)
    shared_part += elastic_net_term(coefs.shared[p], hyper.alpha);
  double specific_part = 0.0;
  for (long j = 0; j < coefs.specific.cols(); ++j)
    for (long p = 0; p < coefs.specific.rows(); ++p)
      specific_part += elastic_net_term(coefs.specific(p, j), hyper.alpha);
  return hyper.lambda * (hyper.rho * shared_part + specific_part);
}

double objective(const Matrix& design, const std::vector<int>& y,
                 const Vector& weights, const CoefficientSet& coefs,
                 const HyperParams& hyper) {
  try {
    return -log_likelihood(design, y, weights, coefs) +
           penalty_value(coefs, hyper);
  } catch (const InvalidRegion&) {
    return std::numeric_limits<double>::infinity();
  }
}

double objective(const OrdinalDataset& data, const Matrix& design,
                 const CoefficientSet& coefs, const HyperParams& hyper) {
  return objective(design, data.y, data.weights, coefs, hyper);
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

Vector intercept_only_thresholds(const std::vector<int>& y,
                                 const Vector& weights, int n_categories) {
  const long n = static_cast<long>(y.size());
  Vector counts = Vector::Zero(n_categories);
  for (long i = 0; i < n; ++i) counts[y[i]] += weights[i];
  const double total = counts.sum();
  Vector thresholds(n_categories - 1);
  double cum = 0.0;
  for (int j = 0; j < n_categories - 1; ++j) {
    cum += counts[j];
    double q = std::clamp(cum / total, 1e-10, 1.0 - 1e-10);
    thresholds[j] = std::log(q / (1.0 - q));
    if (j > 0 && thresholds[j] <= thresholds[j - 1] + kThresholdGap)
      thresholds[j] = thresholds[j - 1] + kThresholdGap;
  }
  return thresholds;
}

namespace {

struct SweepState {
  Matrix resid;     // n x J, current quadratic-model gradient in eta space
  Vector resid_row;  // row sums of resid
  Matrix curv;      // n x J, positive curvature
  Vector curv_row;  // row sums of curv
};

// Applies the eta change a * delta on margin j and keeps residuals in sync.
inline void push_column_update(SweepState& s, int j, const Vector& a,
                               double delta) {
  Vector change = (s.curv.col(j).array() * a.array()).matrix() * delta;
  s.resid.col(j) += change;
  s.resid_row += change;
}

}  // namespace

ModelFit fit(const Matrix& design, const std::vector<int>& y,
             const Vector& weights, int n_categories,
             const HyperParams& hyper, const FitOptions& options) {
  hyper.validate();
  if (options.restriction == Restriction::None && hyper.lambda <= 0.0)
    throw ConfigError(
        "the unrestricted semi-parallel model requires lambda > 0");
  const long n = design.rows();
  const int p_count = static_cast<int>(design.cols());
  const int j_count = n_categories - 1;
  if (static_cast<long>(y.size()) != n || weights.size() != n)
    throw StructuralError("design/response/weight size mismatch");

  CoefficientSet coefs = CoefficientSet::zeros(p_count, j_count);
  coefs.thresholds = intercept_only_thresholds(y, weights, n_categories);
  if (options.warm_start) {
    const auto& ws = *options.warm_start;
    if (ws.dim() == p_count && ws.margins() == j_count &&
        std::isfinite(objective(design, y, weights, ws, hyper)))
      coefs = ws;
  }

  ModelFit result;
  result.hyper = hyper;
  result.restriction = options.restriction;

  double obj = objective(design, y, weights, coefs, hyper);
  result.objective_trace.push_back(obj);

  const double l1_shared = hyper.lambda * hyper.alpha * hyper.rho;
  const double l2_shared = hyper.lambda * (1.0 - hyper.alpha) * hyper.rho;
  const double l1_specific = hyper.lambda * hyper.alpha;
  const double l2_specific = hyper.lambda * (1.0 - hyper.alpha);
  const double inv_n = 1.0 / static_cast<double>(n);

  SweepState s;
  s.resid.resize(n, j_count);
  s.curv.resize(n, j_count);
  Vector d1(j_count), d2(j_count), row_eta(j_count);

  for (int iter = 1; iter <= options.max_outer_iterations; ++iter) {
    result.n_iterations = iter;

    // Quadratic model of the negative log-likelihood around the iterate.
    const Matrix eta = linear_predictor_matrix(design, coefs);
    for (long i = 0; i < n; ++i) {
      row_eta = eta.row(i);
      detail::eta_derivatives(row_eta, y[i], weights[i] * inv_n, d1, d2);
      for (int j = 0; j < j_count; ++j) {
        s.resid(i, j) = -d1[j];
        // The floor only guards signs/zeros; it must stay far below any real
        // curvature so separated coefficients can run off to the cap.
        s.curv(i, j) = std::max(-d2[j], 1e-14 * weights[i] * inv_n);
      }
    }
    s.resid_row = s.resid.rowwise().sum();
    s.curv_row = s.curv.rowwise().sum();

    CoefficientSet cand = coefs;
    const Vector ones = Vector::Ones(n);

    // Solve the penalized quadratic subproblem by cyclic coordinate descent.
    for (int cycle = 0; cycle < options.max_inner_cycles; ++cycle) {
      double moved = 0.0;

      // Thresholds: unpenalized Newton step, order-preserving clamp.
      for (int j = 0; j < j_count; ++j) {
        const double g = s.resid.col(j).sum();
        const double q = s.curv.col(j).sum();
        if (q <= 0.0) continue;
        double value = cand.thresholds[j] - g / q;
        if (j > 0)
          value = std::max(value, cand.thresholds[j - 1] + kThresholdGap);
        if (j + 1 < j_count)
          value = std::min(value, cand.thresholds[j + 1] - kThresholdGap);
        const double delta = value - cand.thresholds[j];
        if (std::abs(delta) < options.coordinate_tolerance) continue;
        cand.thresholds[j] = value;
        moved = std::max(moved, std::abs(delta));
        push_column_update(s, j, ones, delta);
      }

      // Shared coefficients (skipped under the non-parallel restriction).
      if (options.restriction != Restriction::NonParallel) {
        for (int p = 0; p < p_count; ++p) {
          const auto x = design.col(p);
          const double g = x.dot(s.resid_row);
          const double q = x.array().square().matrix().dot(s.curv_row);
          const double denom = q + l2_shared;
          if (denom <= 0.0) continue;
          const double value =
              soft_threshold(q * cand.shared[p] - g, l1_shared) / denom;
          const double delta = value - cand.shared[p];
          if (std::abs(delta) < options.coordinate_tolerance) continue;
          cand.shared[p] = value;
          moved = std::max(moved, std::abs(delta));
          for (int j = 0; j < j_count; ++j) push_column_update(s, j, x, delta);
        }
      }

      // Margin-specific coefficients (skipped under the parallel restriction).
      if (options.restriction != Restriction::Parallel) {
        for (int p = 0; p < p_count; ++p) {
          const auto x = design.col(p);
          for (int j = 0; j < j_count; ++j) {
            const double g = x.dot(s.resid.col(j));
            const double q =
                (x.array().square() * s.curv.col(j).array()).sum();
            const double denom = q + l2_specific;
            if (denom <= 0.0) continue;
            const double value =
                soft_threshold(q * cand.specific(p, j) - g, l1_specific) /
                denom;
            const double delta = value - cand.specific(p, j);
            if (std::abs(delta) < options.coordinate_tolerance) continue;
            cand.specific(p, j) = value;
            moved = std::max(moved, std::abs(delta));
            push_column_update(s, j, x, delta);
          }
        }
      }

      if (moved < 1e-10) break;
    }

    // Full-sweep step-halving on the true objective.
    double step = 1.0;
    bool accepted = false;
    CoefficientSet trial;
    double trial_obj = obj;
    for (int h = 0; h <= options.step_halving_max; ++h) {
      trial.thresholds =
          coefs.thresholds + step * (cand.thresholds - coefs.thresholds);
      trial.shared = coefs.shared + step * (cand.shared - coefs.shared);
      trial.specific = coefs.specific + step * (cand.specific - coefs.specific);
      trial_obj = objective(design, y, weights, trial, hyper);
      if (trial_obj <= obj) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;  // no descent direction left
      break;
    }

    const double drop = obj - trial_obj;
    double move = (trial.thresholds - coefs.thresholds).cwiseAbs().maxCoeff();
    if (p_count > 0) {
      move = std::max(move,
                      (trial.shared - coefs.shared).cwiseAbs().maxCoeff());
      move = std::max(
          move, (trial.specific - coefs.specific).cwiseAbs().maxCoeff());
    }
    coefs = trial;
    obj = trial_obj;
    result.objective_trace.push_back(obj);

    if (hyper.lambda == 0.0 && p_count > 0) {
      const double cap =
          std::max(coefs.shared.cwiseAbs().maxCoeff(),
                   coefs.specific.cwiseAbs().maxCoeff());
      if (cap > kLogitCap) {
        result.separation = true;
        break;
      }
    }

    // A converged iterate is a fixed point of the sweep: both the objective
    // drop and the coordinate movement must be negligible.
    if (drop <= options.objective_tolerance * std::max(std::abs(obj), 1.0) &&
        move <= 1e-9) {
      result.converged = true;
      break;
    }
  }

  result.coefs = coefs;
  return result;
}

ModelFit fit(const OrdinalDataset& data, const Matrix& design,
             const HyperParams& hyper, const FitOptions& options) {
  return fit(design, data.y, data.weights, data.n_categories, hyper, options);
}

ModelFit fit_restricted(const Matrix& design, const std::vector<int>& y,
                        const Vector& weights, int n_categories,
                        Restriction restriction, const HyperParams& hyper,
                        FitOptions options) {
  options.restriction = restriction;
  ModelFit result = fit(design, y, weights, n_categories, hyper, options);
  if (result.separation) {
    HyperParams ridge;
    ridge.lambda = 1e-8;
    ridge.alpha = 0.0;
    ridge.rho = hyper.rho;
    options.warm_start.reset();
    ModelFit refit = fit(design, y, weights, n_categories, ridge, options);
    refit.separation = true;
    refit.ridge_fallback = true;
    refit.restriction = restriction;
    return refit;
  }
  return result;
}

ModelFit fit_restricted(const OrdinalDataset& data, const Matrix& design,
                        Restriction restriction, const HyperParams& hyper,
                        const FitOptions& options) {
  return fit_restricted(design, data.y, data.weights, data.n_categories,
                        restriction, hyper, options);
}

}  // namespace semiord
