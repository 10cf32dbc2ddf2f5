#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "vexrisk/dual.hpp"
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

/// Supremum of <g, -f1> over acceptance-set members f1 = f + rho(f) z,
/// computed by seeded sampling plus random-walk hill climbing. This is the
/// acceptance-set route to the minimal penalty, independent of both the
/// closed form and the gradient-based box search.
double penalty_via_acceptance_set(const FiniteMeasureSpace& sp, const OrderedSpace& E,
                                  const DualDensity& g, const Utility& u, double box,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = sp.size(), d = E.dim();
  const RandomVector z = RandomVector::constant(n, E.numeraire());
  const auto value_at = [&](const RandomVector& f) {
    const RandomVector member = f + rho(sp, E, f, u) * z;
    return pairing(sp, g, -1.0 * member);
  };
  RandomVector best(n, d);
  double best_val = value_at(best);
  for (int start = 0; start < 8; ++start) {
    RandomVector f(n, d);
    if (start > 0)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-box / 2, box / 2);
    double cur = value_at(f), radius = 1.0;
    for (int it = 0; it < 900 && radius > 1e-9; ++it) {
      RandomVector cand = f;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
          cand(i, j) = std::clamp(cand(i, j) + rng.uniform(-radius, radius), -box, box);
      const double cv = value_at(cand);
      if (cv > cur) {
        f = cand;
        cur = cv;
      } else {
        radius *= 0.97;
      }
    }
    best_val = std::max(best_val, cur);
  }
  return best_val;
}

}  // namespace

TEST_CASE("aggregate feasibility") {
  const auto g = density_from_scalar({1.6, 0.4}, {1.0});
  CHECK(dual_feasible_static(kTwoPoint, g, kLine));
  CHECK_FALSE(dual_feasible_pointwise(g, kLine));  // pointwise is stricter
  CHECK_FALSE(dual_feasible_static(kTwoPoint, density_from_scalar({1.6, 0.5}, {1.0}), kLine));
  CHECK_FALSE(dual_feasible_static(kTwoPoint, density_from_scalar({2.2, -0.2}, {1.0}), kLine));
  // pointwise-feasible densities are aggregate-feasible
  CHECK(dual_feasible_static(kTwoPoint, RandomVector::constant(2, {1.0}), kLine));
}

TEST_CASE("minimal penalty closed forms") {
  const auto ue = Utility::exponential(1.0, {1.0});
  // the reference density carries zero penalty
  CHECK(penalty_minimal(kTwoPoint, kLine, density_from_scalar({1.0, 1.0}, {1.0}), ue).value ==
        Catch::Approx(0.0).margin(1e-15));
  // relative entropy of q = (1.6, 0.4)
  const auto g = density_from_scalar({1.6, 0.4}, {1.0});
  const double oracle = 0.5 * (1.6 * std::log(1.6) + 0.4 * std::log(0.4));
  CHECK(oracle == Catch::Approx(0.1927447570217575).epsilon(1e-12));
  CHECK(penalty_minimal(kTwoPoint, kLine, g, ue).value == Catch::Approx(oracle).margin(1e-12));

  const auto uc = Utility::cvar(0.5, {1.0});
  CHECK(penalty_minimal(kTwoPoint, kLine, g, uc).value == 0.0);  // 1.6 <= 1/(1-0.5)
  CHECK(penalty_minimal(kTwoPoint, kLine,
                        density_from_scalar({0.5, 1.5}, {1.0}), Utility::cvar(0.4, {1.0}))
            .value == 0.0);
  // cap violated: q exceeds 1/(1-alpha)
  CHECK(penalty_minimal(kTwoPoint, kLine, density_from_scalar({1.9, 0.1}, {1.0}),
                        Utility::cvar(0.4, {1.0}))
            .infinite());

  const auto up = Utility::piecewise_linear(1.5, 0.5, {1.0});
  CHECK(penalty_minimal(kTwoPoint, kLine, density_from_scalar({1.4, 0.6}, {1.0}), up).value ==
        0.0);
  CHECK(penalty_minimal(kTwoPoint, kLine, density_from_scalar({1.6, 0.4}, {1.0}), up)
            .infinite());  // 0.4 < lower slope bound 0.5

  CHECK_THROWS_AS(
      penalty_minimal(kTwoPoint, kLine, density_from_scalar({1.6, 0.6}, {1.0}), ue),
      std::invalid_argument);
}

TEST_CASE("densities off the weight direction have infinite penalty") {
  const OrderedSpace E2(2, {1.0, 1.0});
  const auto sp = FiniteMeasureSpace::with_weights({0.5, 0.5});
  const auto u = Utility::exponential(1.0, {0.5, 0.5});
  // aggregate-feasible but not collinear with w
  RandomVector g(2, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  REQUIRE(dual_feasible_static(sp, g, E2));
  CHECK(penalty_minimal(sp, E2, g, u).infinite());
  // collinear: h_i = q_i w
  const auto gc = density_from_scalar({1.2, 0.8}, {0.5, 0.5});
  CHECK_FALSE(penalty_minimal(sp, E2, gc, u).infinite());
}

TEST_CASE("box search and acceptance-set route agree with the closed form") {
  const auto ue = Utility::exponential(1.0, {1.0});
  for (const auto& q : {std::vector<double>{1.0, 1.0}, {1.6, 0.4}, {0.4, 1.6}, {1.2, 0.8}}) {
    const auto g = density_from_scalar(q, {1.0});
    const double closed = penalty_minimal(kTwoPoint, kLine, g, ue).value;
    const auto box = penalty_minimal(kTwoPoint, kLine, g, ue, PenaltyStrategy::box_search);
    CHECK(std::string(box.method) == "supremum-over-f");
    CHECK(box.value == Catch::Approx(closed).margin(1e-4));
    CHECK(box.value <= closed + 1e-9);  // lower bound
    const double via_aset = penalty_via_acceptance_set(kTwoPoint, kLine, g, ue, 8.0, 55);
    CHECK(via_aset == Catch::Approx(closed).margin(1e-4));
    CHECK(via_aset <= closed + 1e-9);
  }
  // cvar with a feasible density: both routes sit at zero
  const auto uc = Utility::cvar(0.5, {1.0});
  const auto g = density_from_scalar({1.6, 0.4}, {1.0});
  CHECK(penalty_minimal(kTwoPoint, kLine, g, uc, PenaltyStrategy::box_search).value ==
        Catch::Approx(0.0).margin(1e-6));
  CHECK(penalty_via_acceptance_set(kTwoPoint, kLine, g, uc, 8.0, 56) ==
        Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("dual value on hand examples") {
  const auto ue = Utility::exponential(1.0, {1.0});
  const auto uc = Utility::cvar(0.5, {1.0});
  // cash payoffs: dual equals -c for both families
  for (double c : {-1.5, 0.0, 2.0}) {
    const auto f = c * RandomVector::constant(2, {1.0});
    CHECK(dual_value(kTwoPoint, kLine, f, ue).value == Catch::Approx(-c).margin(1e-9));
    CHECK(dual_value(kTwoPoint, kLine, f, uc).value == Catch::Approx(-c).margin(1e-12));
  }
  const auto f = two_point_payoff();
  CHECK(dual_value(kTwoPoint, kLine, f, ue).value ==
        Catch::Approx(-0.3798854930417224).margin(1e-6));
  CHECK(dual_value(kTwoPoint, kLine, f, uc).value == Catch::Approx(0.0).margin(1e-12));
  // the argmax density is aggregate-feasible
  const auto dv = dual_value(kTwoPoint, kLine, f, ue);
  CHECK(dual_feasible_static(kTwoPoint, dv.argmax, kLine, 1e-9));
}

TEST_CASE("strong duality on random instances") {
  Rng rng(61);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 1 + rng.uniform_int(0, 3), d = 1 + rng.uniform_int(0, 1);
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    std::vector<double> z(d);
    for (auto& x : z) x = rng.uniform(0.5, 2.0);
    const OrderedSpace E(d, z);
    std::vector<double> w(d);
    double wz = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      w[j] = rng.uniform(0.1, 1.0);
      wz += w[j] * z[j];
    }
    for (auto& x : w) x /= wz;
    const auto f = testutil::random_payoff(rng, n, d);
    for (const auto& u : {Utility::exponential(rng.uniform(0.5, 2.5), w),
                          Utility::cvar(rng.uniform(0.2, 0.8), w)}) {
      const auto rep_dc = dual_check(sp, E, f, u);
      CHECK(rep_dc.gap <= 1e-3);
      CHECK(rep_dc.dual <= rep_dc.primal + 1e-6);  // weak duality of the search value
    }
  }
}

TEST_CASE("strong duality beyond the grid range uses ascent only") {
  Rng rng(64);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + rng.uniform_int(0, 2);
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    const auto f = testutil::random_payoff(rng, n, 1);
    const auto ue = Utility::exponential(rng.uniform(0.5, 2.0), {1.0});
    CHECK(dual_check(sp, kLine, f, ue).gap <= 1e-3);
    const auto uc = Utility::cvar(rng.uniform(0.3, 0.7), {1.0});
    CHECK(dual_check(sp, kLine, f, uc).gap <= 1e-3);
  }
}

TEST_CASE("weak duality holds for every sampled feasible density") {
  Rng rng(62);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rng.uniform_int(0, 2);
    const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
    const auto u = rep % 2 ? Utility::exponential(rng.uniform(0.5, 2.0), {1.0})
                           : Utility::cvar(rng.uniform(0.3, 0.7), {1.0});
    const auto f = testutil::random_payoff(rng, n, 1);
    const double primal = rho(sp, kLine, f, u);
    for (int s = 0; s < 50; ++s) {
      const auto m = rng.probability_vector(n, 0.0);
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = m[i] / sp.weight(i);
      const auto g = density_from_scalar(q, {1.0});
      const auto pen = penalty_minimal(sp, kLine, g, u);
      if (pen.infinite()) continue;
      CHECK(pairing(sp, g, -1.0 * f) - pen.value <= primal + 1e-6);
    }
  }
}

TEST_CASE("the infimal penalty over feasible densities is zero") {
  Rng rng(63);
  const auto u = Utility::exponential(1.3, {1.0});
  const auto sp = FiniteMeasureSpace::with_weights(rng.probability_vector(3));
  double inf_pen = penalty_minimal(sp, kLine, density_from_scalar({1, 1, 1}, {1.0}), u).value;
  for (int s = 0; s < 200; ++s) {
    const auto m = rng.probability_vector(3, 0.0);
    std::vector<double> q(3);
    for (std::size_t i = 0; i < 3; ++i) q[i] = m[i] / sp.weight(i);
    const double pen = penalty_minimal(sp, kLine, density_from_scalar(q, {1.0}), u).value;
    inf_pen = std::min(inf_pen, pen);
    CHECK(pen >= -1e-12);
  }
  CHECK(inf_pen == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("acceptance membership") {
  const auto u = Utility::exponential(1.0, {1.0});
  const auto z = RandomVector::constant(2, {1.0});
  CHECK(acceptance_test(kTwoPoint, kLine, RandomVector(2, 1), u));
  CHECK_FALSE(acceptance_test(kTwoPoint, kLine, -1.0 * z, u));  // rho(-z) = 1
  CHECK(acceptance_test(kTwoPoint, kLine, z, u));               // rho(z) = -1
}

TEST_CASE("polar cone falsification") {
  const auto u = Utility::exponential(1.0, {1.0});
  CHECK(polar_cone_test(kTwoPoint, kLine, RandomVector(2, 1), u));  // zero functional
  // a density with a negative coordinate is falsified constructively
  CHECK_FALSE(polar_cone_test(kTwoPoint, kLine, density_from_scalar({1.5, -0.5}, {1.0}), u));
  // the reference measure passes the sampling battery
  CHECK(polar_cone_test(kTwoPoint, kLine, density_from_scalar({1.0, 1.0}, {1.0}), u, 2000));
}
