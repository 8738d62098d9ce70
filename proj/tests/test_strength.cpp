#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "shellhom/errors.hpp"
#include "shellhom/strength.hpp"

using namespace shellhom;

namespace {

Strain6 random_stress(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Strain6 s;
  for (double& v : s) v = dist(rng);
  return s;
}

MaterialTable with_yields(const std::vector<double>& yields) {
  MaterialTable table(yields.size());
  for (std::size_t p = 0; p < yields.size(); ++p)
    table[p].yield_strength = yields[p];
  return table;
}

}  // namespace

TEST_CASE("von Mises closed-form states") {
  CHECK(von_mises({7.5, 7.5, 7.5, 0, 0, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(von_mises({-2e9, -2e9, -2e9, 0, 0, 0}) ==
        doctest::Approx(0.0).scale(2e9).epsilon(1e-12));

  CHECK(von_mises({3.0, 0, 0, 0, 0, 0}) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(von_mises({0, -4.5, 0, 0, 0, 0}) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(von_mises({0, 0, 1e8, 0, 0, 0}) == doctest::Approx(1e8).epsilon(1e-12));

  const double tau = 2.25;
  for (int slot : {3, 4, 5}) {
    Strain6 s{};
    s[slot] = tau;
    CHECK(von_mises(s) == doctest::Approx(std::sqrt(3.0) * tau).epsilon(1e-12));
    s[slot] = -tau;
    CHECK(von_mises(s) == doctest::Approx(std::sqrt(3.0) * tau).epsilon(1e-12));
  }

  // superposing a hydrostatic part changes nothing
  std::mt19937 rng(421);
  for (int k = 0; k < 16; ++k) {
    Strain6 s = random_stress(rng, 5.0);
    Strain6 shifted = s;
    const double p = 3.75;
    for (int i = 0; i < 3; ++i) shifted[i] += p;
    CHECK(von_mises(shifted) == doctest::Approx(von_mises(s)).epsilon(1e-12));
  }
}

TEST_CASE("von Mises scale equivariance") {
  std::mt19937 rng(7);
  for (double c : {2.5, -3.0, 1e-6, 137.0}) {
    for (int k = 0; k < 8; ++k) {
      const Strain6 s = random_stress(rng, 2.0);
      Strain6 cs = s;
      for (double& v : cs) v *= c;
      CHECK(von_mises(cs) ==
            doctest::Approx(std::abs(c) * von_mises(s)).epsilon(1e-10));
    }
  }
}

TEST_CASE("direct critical load from the unit-load ratios") {
  // uniaxial stresses with ratios 2 and 1 against a unit yield
  std::vector<Strain6> stress = {{2, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0}};
  std::vector<int> tags = {0, 0};
  const auto report = critical_load(stress, tags, with_yields({1.0}));
  CHECK(report.critical_load_multiplier == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.critical_element == 0);
  CHECK(report.critical_phase == 0);
  CHECK(report.sigma_e_at_critical == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.method == SearchMethod::Direct);
  REQUIRE(report.per_phase_margin.size() == 1);
  CHECK(report.per_phase_margin[0].first == 0);
  CHECK(report.per_phase_margin[0].second == doctest::Approx(0.5).epsilon(1e-12));

  // single element in uniaxial tension: multiplier is yield / nominal stress
  const auto single =
      critical_load({{4, 0, 0, 0, 0, 0}}, {0}, with_yields({10.0}));
  CHECK(single.critical_load_multiplier == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("ties resolve to the lowest element id") {
  std::vector<Strain6> stress(5, Strain6{3, 0, 0, 0, 0, 0});
  std::vector<int> tags(5, 0);
  const auto report = critical_load(stress, tags, with_yields({6.0}));
  CHECK(report.critical_element == 0);
  CHECK(report.critical_load_multiplier == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("per-phase margins and the critical phase") {
  // phase 0 yields at multiplier 2, phase 1 at 0.25, phase 2 never stressed
  std::vector<Strain6> stress = {{1, 0, 0, 0, 0, 0},
                                 {0, 8, 0, 0, 0, 0},
                                 {0, 0, 0, 0, 0, 0},
                                 {0.5, 0, 0, 0, 0, 0}};
  std::vector<int> tags = {0, 1, 2, 0};
  const auto report = critical_load(stress, tags, with_yields({2.0, 2.0, 2.0}));
  CHECK(report.critical_load_multiplier == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.critical_element == 1);
  CHECK(report.critical_phase == 1);
  REQUIRE(report.per_phase_margin.size() == 3);
  CHECK(report.per_phase_margin[0].first == 0);
  CHECK(report.per_phase_margin[0].second == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(report.per_phase_margin[1].second == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.per_phase_margin[2].first == 2);
  CHECK(std::isinf(report.per_phase_margin[2].second));

  // the critical multiplier is the smallest finite margin
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& [phase, m] : report.per_phase_margin)
    min_margin = std::min(min_margin, m);
  CHECK(report.critical_load_multiplier ==
        doctest::Approx(min_margin).epsilon(1e-12));
}

TEST_CASE("bisection agrees with the direct method") {
  std::mt19937 rng(99);
  std::vector<Strain6> stress;
  std::vector<int> tags;
  for (int e = 0; e < 200; ++e) {
    stress.push_back(random_stress(rng, 4.0));
    tags.push_back(e % 3);
  }
  const MaterialTable table = with_yields({5.0, 9.0, 2.5});
  const auto direct = critical_load(stress, tags, table);

  // both expanding and shrinking brackets land on the same multiplier
  for (double init : {1e-3, 1.0, 1e3}) {
    const auto bis = critical_load(stress, tags, table,
                                   SearchMethod::Bisection, init, 1e-7);
    CHECK(bis.method == SearchMethod::Bisection);
    CHECK(bis.critical_load_multiplier ==
          doctest::Approx(direct.critical_load_multiplier).epsilon(1e-5));
    CHECK(bis.critical_element == direct.critical_element);
    CHECK(bis.critical_phase == direct.critical_phase);
  }
}

TEST_CASE("critical load scale equivariance") {
  std::mt19937 rng(1234);
  std::vector<Strain6> stress;
  std::vector<int> tags;
  for (int e = 0; e < 60; ++e) {
    stress.push_back(random_stress(rng, 1.0));
    tags.push_back(e % 2);
  }
  const MaterialTable table = with_yields({3.0, 1.5});
  const auto base = critical_load(stress, tags, table);
  for (double c : {2.0, 0.125, 1e4}) {
    std::vector<Strain6> scaled = stress;
    for (auto& s : scaled)
      for (double& v : s) v *= c;
    const auto report = critical_load(scaled, tags, table);
    CHECK(report.critical_load_multiplier ==
          doctest::Approx(base.critical_load_multiplier / c).epsilon(1e-10));
    CHECK(report.critical_element == base.critical_element);
  }
}

TEST_CASE("strength input validation") {
  const std::vector<Strain6> one = {{1, 0, 0, 0, 0, 0}};

  // zero stress everywhere has no finite critical load
  CHECK_THROWS_AS(critical_load({Strain6{}}, {0}, with_yields({1.0})),
                  NumericError);
  // hydrostatic stress is zero in the von Mises sense
  CHECK_THROWS_AS(
      critical_load({Strain6{5, 5, 5, 0, 0, 0}}, {0}, with_yields({1.0})),
      NumericError);

  CHECK_THROWS_AS(critical_load({}, {}, with_yields({1.0})), ConfigError);
  CHECK_THROWS_AS(critical_load(one, {0, 1}, with_yields({1.0})), ConfigError);
  CHECK_THROWS_AS(critical_load(one, {1}, with_yields({1.0})), ConfigError);
  CHECK_THROWS_AS(critical_load(one, {-1}, with_yields({1.0})), ConfigError);
  // referenced phase without a yield strength
  CHECK_THROWS_AS(critical_load(one, {0}, with_yields({0.0, 2.0})), ConfigError);
  // unreferenced phase without one is fine
  CHECK_NOTHROW(critical_load(one, {0}, with_yields({2.0, 0.0})));

  CHECK_THROWS_AS(critical_load(one, {0}, with_yields({1.0}),
                                SearchMethod::Bisection, -1.0, 1e-6),
                  ConfigError);
  CHECK_THROWS_AS(critical_load(one, {0}, with_yields({1.0}),
                                SearchMethod::Bisection, 1.0, 0.0),
                  ConfigError);
}
