#include "semiord/core_model.hpp"

#include <cmath>
#include <sstream>

namespace semiord {

double log_sigmoid(double x) {
  // log(1/(1+exp(-x))) without overflow for large |x|.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double sigmoid(double x) { return std::exp(log_sigmoid(x)); }

Vector linear_predictors(const Vector& row, const CoefficientSet& coefs) {
  if (row.size() != coefs.shared.size() ||
      coefs.specific.rows() != coefs.shared.size())
    throw StructuralError("design row dimension does not match coefficients");
  Vector eta = coefs.thresholds;
  const double xb = row.dot(coefs.shared);
  for (int j = 0; j < coefs.margins(); ++j)
    eta[j] += xb + row.dot(coefs.specific.col(j));
  return eta;
}

Matrix linear_predictor_matrix(const Matrix& design, const CoefficientSet& coefs) {
  if (design.cols() != coefs.shared.size())
    throw StructuralError("design dimension does not match coefficients");
  Matrix eta = design * coefs.specific;
  eta.colwise() += Vector(design * coefs.shared);
  eta.rowwise() += coefs.thresholds.transpose();
  return eta;
}

Vector cumulative_probabilities(const Vector& eta) {
  const int j_count = static_cast<int>(eta.size());
  Vector cum(j_count);
  for (int j = 0; j < j_count; ++j) {
    if (!std::isfinite(eta[j])) throw InvalidRegion(j, "non-finite linear predictor");
    cum[j] = sigmoid(eta[j]);
  }
  Vector pi(j_count + 1);
  pi[0] = cum[0];
  for (int j = 1; j < j_count; ++j) {
    pi[j] = cum[j] - cum[j - 1];
    if (pi[j] < 0.0) {
      std::ostringstream msg;
      msg << "cumulative probabilities decrease at margin " << j;
      throw InvalidRegion(j, msg.str());
    }
  }
  pi[j_count] = 1.0 - cum[j_count - 1];
  return pi;
}

namespace detail {

void eta_derivatives(const Vector& eta, int y, double weight_over_n,
                     Vector& d1, Vector& d2) {
  const int j_count = static_cast<int>(eta.size());
  d1.setZero(j_count);
  d2.setZero(j_count);

  // pi_y depends on at most two adjacent margins: y and y-1.
  double lo = (y > 0) ? sigmoid(eta[y - 1]) : 0.0;
  double hi = (y < j_count) ? sigmoid(eta[y]) : 1.0;
  double pi = hi - lo;
  if (pi <= 0.0) throw InvalidRegion(y, "observed category has zero probability");

  if (y < j_count) {
    const double s = hi;
    const double s1 = s * (1.0 - s);
    const double s2 = s1 * (1.0 - 2.0 * s);
    d1[y] = weight_over_n * s1 / pi;
    d2[y] = weight_over_n * (s2 / pi - (s1 * s1) / (pi * pi));
  }
  if (y > 0) {
    const double s = lo;
    const double s1 = s * (1.0 - s);
    const double s2 = s1 * (1.0 - 2.0 * s);
    d1[y - 1] = -weight_over_n * s1 / pi;
    d2[y - 1] = weight_over_n * (-s2 / pi - (s1 * s1) / (pi * pi));
  }
}

}  // namespace detail

double log_likelihood(const Matrix& design, const std::vector<int>& y,
                      const Vector& weights, const CoefficientSet& coefs) {
  const long n = design.rows();
  if (static_cast<long>(y.size()) != n || weights.size() != n)
    throw StructuralError("design/response/weight size mismatch");
  const Matrix eta = linear_predictor_matrix(design, coefs);
  const int j_count = coefs.margins();
  double ll = 0.0;
  for (long i = 0; i < n; ++i) {
    const int yi = y[i];
    const double lo = (yi > 0) ? sigmoid(eta(i, yi - 1)) : 0.0;
    const double hi = (yi < j_count) ? sigmoid(eta(i, yi)) : 1.0;
    const double pi = hi - lo;
    if (pi <= 0.0)
      throw InvalidRegion(yi, "observed category has non-positive probability");
    ll += weights[i] * std::log(std::max(pi, 1e-300));
  }
  return ll / static_cast<double>(n);
}

double log_likelihood(const OrdinalDataset& data, const Matrix& design,
                      const CoefficientSet& coefs) {
  return log_likelihood(design, data.y, data.weights, coefs);
}

Gradient gradient(const Matrix& design, const std::vector<int>& y,
                  const Vector& weights, const CoefficientSet& coefs) {
  const long n = design.rows();
  if (static_cast<long>(y.size()) != n || weights.size() != n)
    throw StructuralError("design/response/weight size mismatch");
  const Matrix eta = linear_predictor_matrix(design, coefs);
  const int j_count = coefs.margins();
  Matrix g(n, j_count);  // d log_likelihood / d eta_{j,i}
  Vector d1, d2;
  Vector row_eta(j_count);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    row_eta = eta.row(i);
    detail::eta_derivatives(row_eta, y[i], weights[i] * inv_n, d1, d2);
    g.row(i) = d1.transpose();
  }
  Gradient out;
  out.d_thresholds = g.colwise().sum();
  out.d_specific = design.transpose() * g;
  out.d_shared = design.transpose() * Vector(g.rowwise().sum());
  return out;
}

Gradient gradient(const OrdinalDataset& data, const Matrix& design,
                  const CoefficientSet& coefs) {
  return gradient(design, data.y, data.weights, coefs);
}

std::vector<std::string> validate_coefficients(const CoefficientSet& coefs) {
  std::vector<std::string> violations;
  for (int j = 1; j < coefs.margins(); ++j) {
    if (!(coefs.thresholds[j - 1] < coefs.thresholds[j])) {
      std::ostringstream msg;
      msg << "thresholds not strictly increasing between margins " << (j - 1)
          << " and " << j;
      violations.push_back(msg.str());
    }
  }
  if (coefs.specific.rows() != coefs.shared.size())
    violations.push_back("shared and specific coefficient dimensions differ");
  return violations;
}

}  // namespace semiord
