#include <doctest.h>

#include "helpers.hpp"
#include "semiord/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace semiord;

namespace {

CoefficientSet make_coefs(std::vector<double> c, std::vector<double> beta,
                          Matrix b) {
  CoefficientSet out;
  out.thresholds = Eigen::Map<Vector>(c.data(), static_cast<long>(c.size()));
  out.shared = Eigen::Map<Vector>(beta.data(), static_cast<long>(beta.size()));
  out.specific = std::move(b);
  return out;
}

}  // namespace

TEST_CASE("linear predictors follow the over-parameterized form") {
  SUBCASE("zero covariates leave the thresholds") {
    CoefficientSet coefs = CoefficientSet::zeros(3, 2);
    coefs.thresholds << -1.0, 1.0;
    coefs.shared << 0.3, -0.2, 1.0;
    coefs.specific.setRandom();
    const Vector eta = linear_predictors(Vector::Zero(3), coefs);
    CHECK(eta[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(eta[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("single covariate") {
    Matrix b(1, 2);
    b << -1.0, 1.0;
    const auto coefs = make_coefs({0.0, 0.5}, {2.0}, b);
    Vector row(1);
    row << 1.0;
    const Vector eta = linear_predictors(row, coefs);
    CHECK(eta[0] == doctest::Approx(1.0));
    CHECK(eta[1] == doctest::Approx(3.5));
  }
  SUBCASE("shared parts can cancel") {
    const auto coefs = make_coefs({0.0, 1.0}, {1.0, -1.0}, Matrix::Zero(2, 2));
    Vector row(2);
    row << 1.0, 1.0;
    const Vector eta = linear_predictors(row, coefs);
    CHECK(eta[0] == doctest::Approx(0.0));
    CHECK(eta[1] == doctest::Approx(1.0));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(linear_predictors(Vector::Zero(2),
                                      CoefficientSet::zeros(3, 2)),
                    StructuralError);
  }
}

TEST_CASE("cumulative probabilities") {
  SUBCASE("logistic at zero, degenerate-but-valid middle") {
    Vector eta(2);
    eta << 0.0, 0.0;
    const Vector pi = cumulative_probabilities(eta);
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pi[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(pi[2] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("symmetric spread") {
    Vector eta(2);
    eta << -2.0, 2.0;
    const Vector pi = cumulative_probabilities(eta);
    CHECK(pi[0] == doctest::Approx(0.1192029).epsilon(1e-5));
    CHECK(pi[1] == doctest::Approx(0.7615942).epsilon(1e-5));
    CHECK(pi[2] == doctest::Approx(0.1192029).epsilon(1e-5));
  }
  SUBCASE("non-monotone cumulative values are rejected") {
    Vector eta(2);
    eta << 1.0, -1.0;
    CHECK_THROWS_AS(cumulative_probabilities(eta), InvalidRegion);
    try {
      cumulative_probabilities(eta);
    } catch (const InvalidRegion& e) {
      CHECK(e.margin() == 1);
    }
  }
  SUBCASE("sums to one and stays in [0,1] on random valid inputs") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
      const int j_count = 2 + static_cast<int>(rng() % 3);
      std::vector<double> vals(j_count);
      for (auto& v : vals) v = gauss(rng);
      std::sort(vals.begin(), vals.end());
      Vector eta = Eigen::Map<Vector>(vals.data(), j_count);
      const Vector pi = cumulative_probabilities(eta);
      CHECK(std::abs(pi.sum() - 1.0) < 1e-12);
      CHECK(pi.minCoeff() >= 0.0);
      CHECK(pi.maxCoeff() <= 1.0);
    }
  }
  SUBCASE("raising one margin raises its cumulative probability") {
    Vector eta(2);
    eta << -0.5, 1.0;
    const Vector before = cumulative_probabilities(eta);
    eta[0] += 0.3;
    const Vector after = cumulative_probabilities(eta);
    CHECK(after[0] > before[0]);
  }
}

TEST_CASE("log likelihood") {
  const Matrix empty_design = Matrix::Zero(1, 0);
  const Vector unit_weight = Vector::Ones(1);
  auto coefs = CoefficientSet::zeros(0, 2);

  SUBCASE("lowest category at eta=(0,0)") {
    const double ll = log_likelihood(empty_design, {0}, unit_weight, coefs);
    CHECK(ll == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("middle category with zero probability is invalid") {
    CHECK_THROWS_AS(log_likelihood(empty_design, {1}, unit_weight, coefs),
                    InvalidRegion);
  }
  SUBCASE("weight semantics after dataset normalization") {
    const OrdinalDataset one = make_dataset({0}, {-1, 0, 1}, Vector::Ones(1));
    Vector w(2);
    w << 2.0, 0.0;
    const OrdinalDataset two = make_dataset({0, 0}, {-1, 0, 1}, w);
    const double a = log_likelihood(one, Matrix::Zero(1, 0), coefs);
    const double b = log_likelihood(two, Matrix::Zero(2, 0), coefs);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
  }
  SUBCASE("invariant to permuting observations") {
    std::mt19937_64 rng(11);
    auto inst = testing::random_instance(rng, 30, 3, 3);
    const double before =
        log_likelihood(inst.design, inst.y, inst.weights, inst.coefs);
    std::vector<int> order(30);
    for (int i = 0; i < 30; ++i) order[i] = 29 - i;
    Matrix design(30, 3);
    Vector weights(30);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) {
      design.row(i) = inst.design.row(order[i]);
      weights[i] = inst.weights[order[i]];
      y[i] = inst.y[order[i]];
    }
    CHECK(before ==
          doctest::Approx(log_likelihood(design, y, weights, inst.coefs))
              .epsilon(1e-14));
  }
  SUBCASE("B=0 equals the parallel computation") {
    std::mt19937_64 rng(12);
    auto inst = testing::random_instance(rng, 25, 4, 3, 0.0);
    inst.coefs.specific.setZero();
    const double semi =
        log_likelihood(inst.design, inst.y, inst.weights, inst.coefs);
    // parallel path computed directly from eta = c_j + x.beta
    double manual = 0.0;
    for (long i = 0; i < 25; ++i) {
      Vector eta = inst.coefs.thresholds;
      eta.array() += inst.design.row(i).dot(inst.coefs.shared);
      manual += inst.weights[i] * std::log(cumulative_probabilities(eta)[inst.y[i]]);
    }
    CHECK(semi == doctest::Approx(manual / 25.0).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient") {
  SUBCASE("first-order condition at the intercept-only optimum") {
    const std::vector<int> y = {0, 0, 1, 2, 2, 2};
    const Vector w = Vector::Ones(6);
    CoefficientSet coefs = CoefficientSet::zeros(0, 2);
    coefs.thresholds = intercept_only_thresholds(y, w, 3);
    const auto g = gradient(Matrix::Zero(6, 0), y, w, coefs);
    CHECK(g.d_thresholds.cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("matches central finite differences") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 10; ++rep) {
      const int n = 10 + static_cast<int>(rng() % 41);
      const int p = 1 + static_cast<int>(rng() % 10);
      const int k = 3 + static_cast<int>(rng() % 2);
      auto inst = testing::random_instance(rng, n, p, k);
      const auto g = gradient(inst.design, inst.y, inst.weights, inst.coefs);
      const auto fd = testing::finite_difference_gradient(
          inst.design, inst.y, inst.weights, inst.coefs);
      auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b));
      };
      for (int j = 0; j < inst.coefs.margins(); ++j)
        CHECK(close(g.d_thresholds[j], fd.d_thresholds[j]));
      for (int q = 0; q < p; ++q) CHECK(close(g.d_shared[q], fd.d_shared[q]));
      for (int j = 0; j < inst.coefs.margins(); ++j)
        for (int q = 0; q < p; ++q)
          CHECK(close(g.d_specific(q, j), fd.d_specific(q, j)));
    }
  }
  SUBCASE("duplicating an observation at half weight changes nothing") {
    std::mt19937_64 rng(31);
    auto inst = testing::random_instance(rng, 8, 2, 3);
    const OrdinalDataset base =
        make_dataset(inst.y, {-1, 0, 1}, inst.weights);
    const auto g0 = gradient(base, inst.design, inst.coefs);

    Matrix design2(9, 2);
    design2.topRows(8) = inst.design;
    design2.row(8) = inst.design.row(0);
    Vector w2(9);
    w2.head(8) = inst.weights;
    w2[0] = inst.weights[0] / 2.0;
    w2[8] = inst.weights[0] / 2.0;
    std::vector<int> y2 = inst.y;
    y2.push_back(inst.y[0]);
    const OrdinalDataset dup = make_dataset(y2, {-1, 0, 1}, w2);
    const auto g1 = gradient(dup, design2, inst.coefs);

    CHECK((g0.d_thresholds - g1.d_thresholds).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g0.d_shared - g1.d_shared).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g0.d_specific - g1.d_specific).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("coefficient validation") {
  CoefficientSet coefs = CoefficientSet::zeros(0, 2);
  coefs.thresholds << -1.0, 0.0;
  CHECK(validate_coefficients(coefs).empty());
  coefs.thresholds << 0.0, 0.0;
  CHECK(validate_coefficients(coefs).size() == 1);
  coefs.thresholds << 1.0, -1.0;
  CHECK(validate_coefficients(coefs).size() == 1);
}
