#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "vexrisk/oce.hpp"
#include "vexrisk/random.hpp"
#include "test_util.hpp"

using namespace vexrisk;

namespace {

const FiniteMeasureSpace kTwoPoint = FiniteMeasureSpace::with_weights({0.5, 0.5});
const OrderedSpace kLine = OrderedSpace::unit(1);

RandomVector two_point_payoff() {
  RandomVector f(2, 1);
  f(1, 0) = 1.0;
  return f;
}

/// Independent closed form for the exponential core:
/// S = -(1/gamma) ln E exp(-gamma Y).
double entropic_oracle(const FiniteMeasureSpace& sp, const std::vector<double>& y, double gamma) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += sp.weight(i) * std::exp(-gamma * y[i]);
  return -std::log(acc) / gamma;
}

}  // namespace

TEST_CASE("utility admissibility") {
  CHECK_THROWS_AS(Utility::exponential(0.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Utility::cvar(1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Utility::cvar(0.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Utility::piecewise_linear(0.9, 0.5, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Utility::piecewise_linear(2.0, 1.2, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Utility::piecewise_linear(2.0, -0.1, {1.0}), std::invalid_argument);

  const auto E2 = OrderedSpace::unit(2);
  CHECK_THROWS_AS(Utility::exponential(1.0, {0.5, -0.5}).validate(E2), std::invalid_argument);
  CHECK_THROWS_AS(Utility::exponential(1.0, {0.5, 0.6}).validate(E2), std::invalid_argument);
  CHECK_NOTHROW(Utility::exponential(1.0, {0.3, 0.7}).validate(E2));
  CHECK_THROWS_AS(oce(kTwoPoint, kLine, two_point_payoff(), Utility::exponential(1.0, {1.0}), 0.0),
                  std::invalid_argument);
}

TEST_CASE("constant payoffs price at their cash value for every family") {
  for (const auto& u : {Utility::exponential(1.3, {1.0}), Utility::cvar(0.4, {1.0}),
                        Utility::piecewise_linear(2.5, 0.3, {1.0})}) {
    const auto f = 2.0 * RandomVector::constant(2, kLine.numeraire());
    const auto r = oce(kTwoPoint, kLine, f, u);
    CHECK(r.value == Catch::Approx(2.0).margin(1e-8));
    CHECK(r.eta_star == Catch::Approx(2.0).margin(1e-5));
    CHECK(rho(kTwoPoint, kLine, RandomVector(2, 1), u) == Catch::Approx(0.0).margin(1e-8));
  }
}

TEST_CASE("exponential core matches the entropic closed form") {
  const auto u = Utility::exponential(1.0, {1.0});
  const auto r = oce(kTwoPoint, kLine, two_point_payoff(), u);
  const double closed = -std::log(0.5 * (1.0 + std::exp(-1.0)));
  CHECK(closed == Catch::Approx(0.3798854930417224).epsilon(1e-14));
  CHECK(r.value == Catch::Approx(closed).margin(1e-8));
  CHECK(rho(kTwoPoint, kLine, two_point_payoff(), u) == Catch::Approx(-closed).margin(1e-8));

  Rng rng(41);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rng.uniform_int(0, 5);
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    const double gamma = rng.uniform(0.4, 3.0);
    const auto ur = Utility::exponential(gamma, {1.0});
    const auto f = testutil::random_payoff(rng, n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = f(i, 0);
    CHECK(oce(sp, kLine, f, ur).value ==
          Catch::Approx(entropic_oracle(sp, y, gamma)).margin(1e-8));
  }
}

TEST_CASE("cvar core on the two-point example") {
  // objective is eta on eta <= 0, flat 0 on [0,1], 1 - eta beyond
  const auto u = Utility::cvar(0.5, {1.0});
  const auto r = oce(kTwoPoint, kLine, two_point_payoff(), u);
  CHECK(r.value == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("oce value dominates the objective everywhere") {
  Rng rng(42);
  const auto f = testutil::random_payoff(rng, 4, 1);
  const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(4));
  for (const auto& u : {Utility::exponential(2.0, {1.0}), Utility::cvar(0.3, {1.0}),
                        Utility::piecewise_linear(1.7, 0.6, {1.0})}) {
    const auto r = oce(sp, kLine, f, u);
    const auto y = u.scalarize_all(f);
    for (int k = 0; k <= 100; ++k) {
      const double eta = -5.0 + 0.1 * k;
      double obj = eta;
      for (std::size_t i = 0; i < 4; ++i) obj += sp.weight(i) * u.core(y[i] - eta);
      CHECK(r.value + 1e-8 >= obj);
    }
    // concavity of the objective along sampled triples
    for (int k = 0; k < 50; ++k) {
      const double e1 = rng.uniform(-4, 4), e2 = rng.uniform(-4, 4);
      const double lam = rng.uniform(0, 1);
      const auto obj = [&](double eta) {
        double acc = eta;
        for (std::size_t i = 0; i < 4; ++i) acc += sp.weight(i) * u.core(y[i] - eta);
        return acc;
      };
      CHECK(obj(lam * e1 + (1 - lam) * e2) >= lam * obj(e1) + (1 - lam) * obj(e2) - 1e-10);
    }
  }
}

TEST_CASE("translation, monotonicity and concavity") {
  Rng rng(43);
  const auto z2 = RandomVector::constant(3, {1.0, 1.0});
  const OrderedSpace E2(2, {1.0, 1.0});
  for (int rep = 0; rep < 400; ++rep) {
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(3));
    const auto u = rep % 3 == 0 ? Utility::exponential(rng.uniform(0.5, 2.5), {0.4, 0.6})
                   : rep % 3 == 1
                       ? Utility::cvar(rng.uniform(0.2, 0.8), {0.4, 0.6})
                       : Utility::piecewise_linear(rng.uniform(1.0, 3.0), rng.uniform(0.0, 1.0),
                                                   {0.4, 0.6});
    const auto f1 = testutil::random_payoff(rng, 3, 2);
    const auto f2 = testutil::random_payoff(rng, 3, 2);
    const double m = rng.uniform(-5.0, 5.0);
    const double s1 = oce(sp, E2, f1, u).value;

    CHECK(oce(sp, E2, f1 + m * z2, u).value == Catch::Approx(s1 + m).margin(1e-6));
    CHECK(rho(sp, E2, f1 + m * z2, u) == Catch::Approx(-s1 - m).margin(1e-6));

    RandomVector up = f1;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) up(i, j) += rng.uniform(0.0, 2.0);
    CHECK(oce(sp, E2, up, u).value >= s1 - 1e-6);

    const double lam = rng.uniform(0.0, 1.0);
    const double smix = oce(sp, E2, lam * f1 + (1.0 - lam) * f2, u).value;
    CHECK(smix >= lam * s1 + (1.0 - lam) * oce(sp, E2, f2, u).value - 1e-6);
  }
}

TEST_CASE("piecewise cores are positively homogeneous, the exponential is not") {
  Rng rng(44);
  const auto f = two_point_payoff();
  for (const auto& u : {Utility::cvar(0.5, {1.0}), Utility::piecewise_linear(2.0, 0.5, {1.0})}) {
    for (double a : {0.3, 1.0, 2.7, 4.0}) {
      CHECK(rho(kTwoPoint, kLine, a * f, u) ==
            Catch::Approx(a * rho(kTwoPoint, kLine, f, u)).margin(1e-6));
    }
  }
  const auto ue = Utility::exponential(1.0, {1.0});
  CHECK(std::abs(rho(kTwoPoint, kLine, 2.0 * f, ue) - 2.0 * rho(kTwoPoint, kLine, f, ue)) > 1e-3);
}

TEST_CASE("certainty equivalent") {
  const auto u = Utility::exponential(1.0, {1.0});
  CHECK(certainty_equivalent(kTwoPoint, kLine, 2.0 * RandomVector::constant(2, {1.0}), u) ==
        Catch::Approx(2.0).margin(1e-12));
  // entropic: C coincides with the optimized value
  CHECK(certainty_equivalent(kTwoPoint, kLine, two_point_payoff(), u) ==
        Catch::Approx(0.3798854930417224).margin(1e-12));
  const auto sp1 = FiniteMeasureSpace::with_weights({1.0});
  RandomVector f7(1, 1);
  f7(0, 0) = 7.0;
  CHECK(certainty_equivalent(sp1, kLine, f7, u) == Catch::Approx(7.0).margin(1e-12));
  CHECK_THROWS_AS(certainty_equivalent(kTwoPoint, kLine, two_point_payoff(),
                                       Utility::cvar(0.5, {1.0})),
                  std::domain_error);
  CHECK_THROWS_AS(certainty_equivalent(kTwoPoint, kLine, two_point_payoff(),
                                       Utility::piecewise_linear(2.0, 0.0, {1.0})),
                  std::domain_error);
}

TEST_CASE("ssd comparison") {
  const auto u = Utility::exponential(1.0, {1.0});
  const auto f = two_point_payoff();
  {
    const auto rep = ssd_compare(kTwoPoint, kLine, f, f, u);
    CHECK(rep.su_order == 0);
    CHECK(rep.cu_order == 0);
  }
  {
    const auto rep =
        ssd_compare(kTwoPoint, kLine, f + RandomVector::constant(2, {1.0}), f, u);
    CHECK(rep.su_order == 1);
    CHECK(rep.cu_order == 1);
  }
  CHECK_THROWS_AS(ssd_compare(kTwoPoint, kLine, f, f, Utility::cvar(0.5, {1.0})),
                  std::domain_error);
  Rng rng(45);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    const auto g = Utility::exponential(rng.uniform(0.5, 2.0), {1.0});
    const auto r = ssd_compare(sp, kLine, testutil::random_payoff(rng, n, 1),
                               testutil::random_payoff(rng, n, 1), g, 1e-6);
    if (r.su_order != 0 && r.cu_order != 0) CHECK(r.su_order == r.cu_order);
  }
}

TEST_CASE("sub-homogeneity gap") {
  const auto u = Utility::exponential(1.0, {1.0});
  const auto f = two_point_payoff();
  CHECK(subhomogeneity_gap(kTwoPoint, kLine, f, u, 1.0) == Catch::Approx(0.0).margin(1e-8));
  CHECK(subhomogeneity_gap(kTwoPoint, kLine, f, u, 0.0) == Catch::Approx(0.0).margin(1e-8));
  CHECK_THROWS_AS(subhomogeneity_gap(kTwoPoint, kLine, f, u, -0.5), std::invalid_argument);
  // 2 S(f) - S(2f) with both values from the closed form
  const double s1 = -std::log(0.5 * (1.0 + std::exp(-1.0)));
  const double s2 = -std::log(0.5 * (1.0 + std::exp(-2.0)));
  CHECK(2.0 * s1 - s2 == Catch::Approx(0.1935518165664719).epsilon(1e-12));
  CHECK(subhomogeneity_gap(kTwoPoint, kLine, f, u, 2.0) ==
        Catch::Approx(2.0 * s1 - s2).margin(1e-8));

  Rng rng(46);
  for (int rep = 0; rep < 300; ++rep) {
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(3));
    const auto g = rep % 2 ? Utility::exponential(rng.uniform(0.5, 2.0), {1.0})
                           : Utility::cvar(rng.uniform(0.2, 0.8), {1.0});
    CHECK(subhomogeneity_gap(sp, kLine, testutil::random_payoff(rng, 3, 1), g,
                             rng.uniform(0.0, 5.0)) >= -1e-6);
  }
}
