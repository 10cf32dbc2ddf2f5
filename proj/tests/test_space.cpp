#include <catch2/catch_amalgamated.hpp>

#include "vexrisk/space.hpp"
#include "vexrisk/random.hpp"
#include "test_util.hpp"

using namespace vexrisk;

TEST_CASE("measure space validates weights") {
  CHECK_NOTHROW(FiniteMeasureSpace::with_weights({0.25, 0.25, 0.5}));
  CHECK_THROWS_AS(FiniteMeasureSpace::with_weights({}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteMeasureSpace::with_weights({0.5, 0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteMeasureSpace::with_weights({0.7, -0.2, 0.5}), std::invalid_argument);
  CHECK_THROWS_WITH(FiniteMeasureSpace::with_weights({0.49, 0.49}),
                    Catch::Matchers::ContainsSubstring("weights sum"));
  CHECK_THROWS_AS(FiniteMeasureSpace({"a"}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("round-off drift in weights is renormalized") {
  const auto sp = FiniteMeasureSpace::with_weights({0.5 + 4e-10, 0.5});
  CHECK(sp.weight(0) + sp.weight(1) == 1.0);
}

TEST_CASE("filtration construction invariants") {
  using P = Filtration::Partition;
  CHECK_NOTHROW(Filtration(3, {P{{0, 1, 2}}, P{{0, 1}, {2}}, P{{0}, {1}, {2}}}));
  // level 0 must be one atom
  CHECK_THROWS_AS(Filtration(3, {P{{0, 1}, {2}}, P{{0}, {1}, {2}}}), std::invalid_argument);
  // last level must be singletons
  CHECK_THROWS_AS(Filtration(3, {P{{0, 1, 2}}, P{{0, 1}, {2}}}), std::invalid_argument);
  // refinement: {0,2} straddles {0,1},{2}
  CHECK_THROWS_AS(
      Filtration(3, {P{{0, 1, 2}}, P{{0, 1}, {2}}, P{{0, 2}, {1}}}),
      std::invalid_argument);
  // missing outcome and duplicated outcome
  CHECK_THROWS_AS(Filtration(3, {P{{0, 1}}}), std::invalid_argument);
  CHECK_THROWS_AS(Filtration(2, {P{{0, 1, 1}}}), std::invalid_argument);
}

TEST_CASE("atoms carry masses and cover the space") {
  const auto sp = FiniteMeasureSpace::with_weights({0.25, 0.25, 0.5});
  const Filtration filt(3, {{{0, 1, 2}}, {{0, 1}, {2}}, {{0}, {1}, {2}}});
  CHECK(filt.horizon() == 2);

  const auto top = filt.atoms_at(sp, 0);
  REQUIRE(top.size() == 1);
  CHECK(top[0].mass == Catch::Approx(1.0));

  const auto mid = filt.atoms_at(sp, 1);
  REQUIRE(mid.size() == 2);
  CHECK(mid[0].mass == Catch::Approx(0.5));
  CHECK(mid[1].mass == Catch::Approx(0.5));

  CHECK(filt.atoms_at(sp, 2).size() == 3);
  CHECK_THROWS_AS(filt.atoms_at(sp, 3), std::out_of_range);
  CHECK_THROWS_AS(filt.atoms_at(sp, -1), std::out_of_range);
}

TEST_CASE("conditional expectation on hand examples") {
  {
    const auto sp = FiniteMeasureSpace::with_weights({1.0});
    const auto filt = Filtration::trivial(1);
    CHECK(conditional_expectation(sp, filt, {5.0}, 0) == std::vector<double>{5.0});
  }
  {
    const auto sp = FiniteMeasureSpace::with_weights({0.5, 0.5});
    const auto filt = Filtration::trivial(2);
    const auto ce = conditional_expectation(sp, filt, {0.0, 1.0}, 0);
    CHECK(ce[0] == Catch::Approx(0.5));
    CHECK(ce[1] == Catch::Approx(0.5));
  }
  {
    const auto sp = FiniteMeasureSpace::with_weights({0.25, 0.25, 0.5});
    const Filtration filt(3, {{{0, 1, 2}}, {{0, 1}, {2}}, {{0}, {1}, {2}}});
    const auto ce = conditional_expectation(sp, filt, {2.0, 4.0, 6.0}, 1);
    CHECK(ce[0] == Catch::Approx(3.0));  // (0.25*2 + 0.25*4) / 0.5
    CHECK(ce[1] == Catch::Approx(3.0));
    CHECK(ce[2] == Catch::Approx(6.0));
  }
}

TEST_CASE("conditional expectation is linear and positive") {
  Rng rng(11);
  const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(6));
  const auto filt = testutil::random_filtration(rng, 6);
  std::vector<double> x(6), y(6);
  for (auto& v : x) v = rng.uniform(-2, 2);
  for (auto& v : y) v = rng.uniform(0, 2);
  const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
  for (int t = 0; t <= filt.horizon(); ++t) {
    std::vector<double> combo(6);
    for (std::size_t i = 0; i < 6; ++i) combo[i] = a * x[i] + b * y[i];
    const auto lhs = conditional_expectation(sp, filt, combo, t);
    const auto ex = conditional_expectation(sp, filt, x, t);
    const auto ey = conditional_expectation(sp, filt, y, t);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(lhs[i] == Catch::Approx(a * ex[i] + b * ey[i]).margin(1e-12));
      CHECK(ey[i] >= 0.0);  // positivity: y >= 0 pointwise
    }
  }
}

TEST_CASE("total expectation at the root") {
  Rng rng(12);
  const auto w = rng.probability_vector(5);
  const auto sp = FiniteMeasureSpace::with_weights(w);
  const auto filt = testutil::random_filtration(rng, 5);
  std::vector<double> x(5);
  double mean = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    x[i] = rng.uniform(-3, 3);
    mean += sp.weight(i) * x[i];
  }
  for (double v : conditional_expectation(sp, filt, x, 0))
    CHECK(v == Catch::Approx(mean).margin(1e-14));
}

TEST_CASE("tower property") {
  Rng rng(13);
  const auto sp = FiniteMeasureSpace::uniform(8);
  const Filtration filt(8, {{{0, 1, 2, 3, 4, 5, 6, 7}},
                            {{0, 1, 2, 3}, {4, 5, 6, 7}},
                            {{0, 1}, {2, 3}, {4, 5}, {6, 7}},
                            {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}}});
  std::vector<double> x(8);
  for (auto& v : x) v = rng.uniform(-5, 5);
  CHECK(tower_check(sp, filt, x, 1, 1));                    // s = t idempotence
  CHECK(tower_check(sp, filt, std::vector<double>(8, 2.5), 0, 2));  // constant
  CHECK(tower_check(sp, filt, x, 0, 1));

  // property: random filtrations, all level pairs
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 5));
    const auto spr = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    const auto fr = testutil::random_filtration(rng, n);
    std::vector<double> xr(n);
    for (auto& v : xr) v = rng.uniform(-5, 5);
    for (int s = 0; s <= fr.horizon(); ++s)
      for (int t = s; t <= fr.horizon(); ++t) CHECK(tower_check(spr, fr, xr, s, t));
  }
  CHECK_THROWS_AS(tower_check(sp, filt, x, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(conditional_expectation(sp, filt, {1.0, 2.0}, 0), std::invalid_argument);
}
