#ifndef SEMIORD_CORE_MODEL_HPP
#define SEMIORD_CORE_MODEL_HPP

#include "semiord/types.hpp"

namespace semiord {

// Numerically stable logistic CDF and its log.
double sigmoid(double x);
double log_sigmoid(double x);

// eta_j = c_j + x.beta + x.B_j for one design row.
Vector linear_predictors(const Vector& row, const CoefficientSet& coefs);

// n x J matrix of linear predictors for a full design.
Matrix linear_predictor_matrix(const Matrix& design, const CoefficientSet& coefs);

// Multinomial probabilities from the cumulative construction.
// Throws InvalidRegion if any interior probability is negative.
Vector cumulative_probabilities(const Vector& eta);

// (1/n) sum_i w_i log pi_{y_i, i}. Weights must already sum to n.
double log_likelihood(const Matrix& design, const std::vector<int>& y,
                      const Vector& weights, const CoefficientSet& coefs);
double log_likelihood(const OrdinalDataset& data, const Matrix& design,
                      const CoefficientSet& coefs);

struct Gradient {
  Vector d_thresholds;  // length J
  Vector d_shared;      // length P
  Matrix d_specific;    // P x J
};

// Exact partial derivatives of log_likelihood in every parameter.
Gradient gradient(const Matrix& design, const std::vector<int>& y,
                  const Vector& weights, const CoefficientSet& coefs);
Gradient gradient(const OrdinalDataset& data, const Matrix& design,
                  const CoefficientSet& coefs);

// Threshold-ordering violations at the zero covariate vector.
std::vector<std::string> validate_coefficients(const CoefficientSet& coefs);

namespace detail {
// Per-observation first and second derivatives of w_i/n * log pi_{y_i}
// with respect to each eta_j. Used by gradient and the optimizer.
void eta_derivatives(const Vector& eta, int y, double weight_over_n,
                     Vector& d1, Vector& d2);
}  // namespace detail

}  // namespace semiord

#endif
