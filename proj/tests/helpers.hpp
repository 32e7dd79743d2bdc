#ifndef SEMIORD_TEST_HELPERS_HPP
#define SEMIORD_TEST_HELPERS_HPP

#include "semiord/core_model.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace semiord::testing {

// Independent finite-difference oracle for the log-likelihood gradient.
inline Gradient finite_difference_gradient(const Matrix& design,
                                           const std::vector<int>& y,
                                           const Vector& weights,
                                           const CoefficientSet& coefs,
                                           double step = 1e-6) {
  auto eval = [&](const CoefficientSet& c) {
    return log_likelihood(design, y, weights, c);
  };
  Gradient g;
  g.d_thresholds.resize(coefs.margins());
  g.d_shared.resize(coefs.dim());
  g.d_specific.resize(coefs.dim(), coefs.margins());
  CoefficientSet hi = coefs, lo = coefs;
  for (int j = 0; j < coefs.margins(); ++j) {
    hi = coefs;
    lo = coefs;
    hi.thresholds[j] += step;
    lo.thresholds[j] -= step;
    g.d_thresholds[j] = (eval(hi) - eval(lo)) / (2.0 * step);
  }
  for (int p = 0; p < coefs.dim(); ++p) {
    hi = coefs;
    lo = coefs;
    hi.shared[p] += step;
    lo.shared[p] -= step;
    g.d_shared[p] = (eval(hi) - eval(lo)) / (2.0 * step);
  }
  for (int j = 0; j < coefs.margins(); ++j)
    for (int p = 0; p < coefs.dim(); ++p) {
      hi = coefs;
      lo = coefs;
      hi.specific(p, j) += step;
      lo.specific(p, j) -= step;
      g.d_specific(p, j) = (eval(hi) - eval(lo)) / (2.0 * step);
    }
  return g;
}

// Random instance guaranteed to start inside the valid probability region
// (small margin-specific deviations).
struct RandomInstance {
  Matrix design;
  std::vector<int> y;
  Vector weights;
  int n_categories;
  CoefficientSet coefs;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int n, int p,
                                      int k, double specific_scale = 0.1) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RandomInstance inst;
  inst.n_categories = k;
  inst.design.resize(n, p);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) inst.design(i, c) = gauss(rng);
  inst.weights.resize(n);
  for (long i = 0; i < n; ++i) inst.weights[i] = 0.5 + unif(rng);
  inst.weights *= static_cast<double>(n) / inst.weights.sum();
  inst.coefs = CoefficientSet::zeros(p, k - 1);
  for (int j = 0; j < k - 1; ++j)
    inst.coefs.thresholds[j] = -1.0 + 2.0 * j / std::max(1, k - 2);
  for (int c = 0; c < p; ++c) inst.coefs.shared[c] = 0.5 * gauss(rng);
  for (int j = 0; j < k - 1; ++j)
    for (int c = 0; c < p; ++c)
      inst.coefs.specific(c, j) = specific_scale * gauss(rng);

  // draw responses from the model; redraw covariates on invalid rows
  inst.y.resize(n);
  for (long i = 0; i < n; ++i) {
    Vector pi;
    for (int tries = 0;; ++tries) {
      try {
        pi = cumulative_probabilities(
            linear_predictors(inst.design.row(i).transpose(), inst.coefs));
        break;
      } catch (const InvalidRegion&) {
        if (tries > 200) throw;
        for (int c = 0; c < p; ++c) inst.design(i, c) = gauss(rng);
      }
    }
    const double u = unif(rng);
    double cum = 0.0;
    inst.y[i] = k - 1;
    for (int cat = 0; cat < k; ++cat) {
      cum += pi[cat];
      if (u <= cum) {
        inst.y[i] = cat;
        break;
      }
    }
  }
  return inst;
}

// Worst-case violation of the elastic-net subgradient conditions at a fitted
// solution. Thresholds are unpenalized; coefficients follow the usual
// active/inactive split.
inline double kkt_violation(const Matrix& design, const std::vector<int>& y,
                            const Vector& weights, const ModelFit& fit_result) {
  const auto& coefs = fit_result.coefs;
  const auto& hyper = fit_result.hyper;
  const Gradient g = gradient(design, y, weights, coefs);  // of +loglik
  double worst = 0.0;
  for (int j = 0; j < coefs.margins(); ++j)
    worst = std::max(worst, std::abs(-g.d_thresholds[j]));

  auto coordinate = [&](double value, double grad_neg_ll, double scale) {
    const double l1 = hyper.lambda * hyper.alpha * scale;
    const double l2 = hyper.lambda * (1.0 - hyper.alpha) * scale;
    if (value != 0.0) {
      return std::abs(grad_neg_ll + l2 * value +
                      l1 * (value > 0.0 ? 1.0 : -1.0));
    }
    return std::max(0.0, std::abs(grad_neg_ll) - l1);
  };
  if (fit_result.restriction != Restriction::NonParallel)
    for (int p = 0; p < coefs.dim(); ++p)
      worst = std::max(worst,
                       coordinate(coefs.shared[p], -g.d_shared[p], hyper.rho));
  if (fit_result.restriction != Restriction::Parallel)
    for (int j = 0; j < coefs.margins(); ++j)
      for (int p = 0; p < coefs.dim(); ++p)
        worst = std::max(
            worst, coordinate(coefs.specific(p, j), -g.d_specific(p, j), 1.0));
  return worst;
}

}  // namespace semiord::testing

#endif
