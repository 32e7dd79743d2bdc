#include <doctest.h>

#include "semiord/rotation.hpp"

#include <cmath>
#include <random>

using namespace semiord;

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

TEST_CASE("positivity-neutrality transform") {
  SUBCASE("anchor mappings") {
    const auto origin = to_positivity_neutrality({0.0, 0.0, ""});
    CHECK(std::abs(origin.positivity) < 1e-15);
    CHECK(std::abs(origin.neutrality) < 1e-15);

    const auto bisector = to_positivity_neutrality({-1.0, -1.0, ""});
    CHECK(std::abs(bisector.positivity - kSqrt2) < 1e-12);
    CHECK(std::abs(bisector.neutrality) < 1e-12);

    const auto anti = to_positivity_neutrality({-1.0, 1.0, ""});
    CHECK(std::abs(anti.positivity) < 1e-12);
    CHECK(std::abs(anti.neutrality - kSqrt2) < 1e-12);
  }

  SUBCASE("orthogonality: norms preserved on random pairs") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int rep = 0; rep < 1000; ++rep) {
      const CoefficientPair pair{gauss(rng), gauss(rng), ""};
      const auto rot = to_positivity_neutrality(pair);
      const double n0 = std::hypot(pair.b_neg, pair.b_zero);
      const double n1 = std::hypot(rot.positivity, rot.neutrality);
      CHECK(std::abs(n0 - n1) < 1e-12);
    }
  }

  SUBCASE("parallel pairs have zero neutrality, anti-parallel zero positivity") {
    for (double b : {-2.0, -0.5, 0.25, 3.0}) {
      CHECK(to_positivity_neutrality({b, b, ""}).neutrality == 0.0);
      CHECK(to_positivity_neutrality({b, -b, ""}).positivity == 0.0);
    }
  }

  SUBCASE("round trip") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      const CoefficientPair pair{gauss(rng), gauss(rng), "x"};
      const auto back = from_positivity_neutrality(to_positivity_neutrality(pair));
      CHECK(std::abs(back.b_neg - pair.b_neg) < 1e-12);
      CHECK(std::abs(back.b_zero - pair.b_zero) < 1e-12);
      CHECK(back.label == "x");
    }
    const auto inv = from_positivity_neutrality({2.0 * kSqrt2, 0.0, ""});
    CHECK(inv.b_neg == doctest::Approx(-2.0));
    CHECK(inv.b_zero == doctest::Approx(-2.0));
  }
}

TEST_CASE("quadrant classification") {
  SUBCASE("sign grid") {
    CHECK(classify_quadrant({0.5, 0.5, ""}) == Quadrant::HarmfulOrIrrelevant);
    CHECK(classify_quadrant({-0.5, 0.5, ""}) == Quadrant::IncreasedNeutrality);
    CHECK(classify_quadrant({0.5, -0.5, ""}) == Quadrant::Polarization);
    CHECK(classify_quadrant({-0.5, -0.5, ""}) == Quadrant::Beneficial);
  }
  SUBCASE("exhaustive sign enumeration at several magnitudes") {
    for (double a : {0.1, 1.0, 10.0})
      for (double b : {0.1, 1.0, 10.0}) {
        CHECK(classify_quadrant({a, b, ""}) == Quadrant::HarmfulOrIrrelevant);
        CHECK(classify_quadrant({-a, b, ""}) == Quadrant::IncreasedNeutrality);
        CHECK(classify_quadrant({a, -b, ""}) == Quadrant::Polarization);
        CHECK(classify_quadrant({-a, -b, ""}) == Quadrant::Beneficial);
      }
  }
  SUBCASE("axis tolerance") {
    CHECK(classify_quadrant({1e-12, 0.4, ""}, 1e-8) == Quadrant::AxisBorderline);
    CHECK(classify_quadrant({0.4, -1e-12, ""}, 1e-8) == Quadrant::AxisBorderline);
    CHECK(classify_quadrant({1e-12, 0.4, ""}, 0.0) ==
          Quadrant::HarmfulOrIrrelevant);
  }
  SUBCASE("labels are distinct and human readable") {
    CHECK(quadrant_label(Quadrant::Beneficial) !=
          quadrant_label(Quadrant::Polarization));
    CHECK_FALSE(quadrant_label(Quadrant::HarmfulOrIrrelevant).empty());
  }
}

TEST_CASE("effect ranking") {
  const std::vector<RotatedPair> pairs = {
      {2.0, -0.3, "a"}, {-1.0, 5.0, "b"}, {0.0, 5.0, "c"}, {2.0, 1.0, "d"}};

  SUBCASE("descending on positivity, stable on ties") {
    const auto ranked = rank_effects(pairs, RotationAxis::Positivity);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].pair.label == "a");  // before "d": equal value, stable
    CHECK(ranked[1].pair.label == "d");
    CHECK(ranked[2].pair.label == "c");
    CHECK(ranked[3].pair.label == "b");
    CHECK(ranked[0].value == doctest::Approx(2.0));
    CHECK_FALSE(ranked[0].band.has_value());
  }

  SUBCASE("neutrality axis") {
    const auto ranked = rank_effects(pairs, RotationAxis::Neutrality);
    CHECK(ranked[0].pair.label == "b");
    CHECK(ranked[1].pair.label == "c");
    CHECK(ranked[3].pair.label == "a");
  }

  SUBCASE("bands pass through aligned with their pairs") {
    const std::vector<std::pair<double, double>> bands = {
        {1.5, 2.5}, {-2.0, 0.0}, {-1.0, 1.0}, {1.0, 3.0}};
    const auto ranked = rank_effects(pairs, RotationAxis::Positivity, bands);
    REQUIRE(ranked[0].band.has_value());
    CHECK(ranked[0].band->first == doctest::Approx(1.5));   // "a"
    CHECK(ranked[3].band->second == doctest::Approx(0.0));  // "b"
  }

  SUBCASE("ranking by positivity equals ranking by -(b_neg+b_zero)") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<RotatedPair> rotated;
    std::vector<std::pair<double, std::string>> manual;
    for (int i = 0; i < 40; ++i) {
      const CoefficientPair pair{gauss(rng), gauss(rng), std::to_string(i)};
      rotated.push_back(to_positivity_neutrality(pair));
      manual.emplace_back(-(pair.b_neg + pair.b_zero), pair.label);
    }
    std::stable_sort(manual.begin(), manual.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    const auto ranked = rank_effects(rotated, RotationAxis::Positivity);
    for (std::size_t i = 0; i < ranked.size(); ++i)
      CHECK(ranked[i].pair.label == manual[i].second);
  }
}
