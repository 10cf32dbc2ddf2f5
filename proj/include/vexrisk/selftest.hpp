#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "vexrisk/dual.hpp"
#include "vexrisk/dynamic.hpp"
#include "vexrisk/fixtures.hpp"
#include "vexrisk/oce.hpp"
#include "vexrisk/random.hpp"
#include "vexrisk/report.hpp"
#include "vexrisk/scenario.hpp"
#include "vexrisk/varexp.hpp"

namespace vexrisk::selftest {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double ms = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

struct Instance {
  FiniteMeasureSpace space;
  OrderedSpace E;
  ExponentFunction p;
};

inline Instance random_instance(Rng& rng, std::size_t max_n, std::size_t max_d,
                                bool constant_exponent = false) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(max_n) - 1));
  const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(max_d) - 1));
  std::vector<double> pv(n);
  if (constant_exponent) {
    const double q = rng.uniform(1.1, 6.0);
    for (auto& x : pv) x = q;
  } else {
    for (auto& x : pv) x = rng.uniform(1.1, 6.0);
  }
  std::vector<double> z(d);
  for (auto& x : z) x = rng.uniform(0.5, 2.0);
  return Instance{FiniteMeasureSpace::with_weights(rng.probability_vector(n)),
                  OrderedSpace(d, std::move(z)), ExponentFunction(std::move(pv))};
}

inline RandomVector random_payoff(Rng& rng, std::size_t n, std::size_t d, double range = 3.0) {
  RandomVector f(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-range, range);
  return f;
}

inline std::vector<double> random_weight(Rng& rng, const OrderedSpace& E) {
  std::vector<double> w(E.dim());
  double wz = 0.0;
  for (std::size_t j = 0; j < E.dim(); ++j) {
    w[j] = rng.uniform(0.1, 1.0);
    wz += w[j] * E.numeraire()[j];
  }
  for (auto& x : w) x /= wz;
  return w;
}

inline Utility random_utility(Rng& rng, int family, const OrderedSpace& E) {
  auto w = random_weight(rng, E);
  switch (family) {
    case 0: return Utility::exponential(rng.uniform(0.5, 3.0), std::move(w));
    case 1: return Utility::cvar(rng.uniform(0.2, 0.8), std::move(w));
    default: {
      const double a = rng.uniform(1.0, 3.0), b = rng.uniform(0.0, 1.0);
      return Utility::piecewise_linear(a, b, std::move(w));
    }
  }
}

template <class Fn>
CriterionResult timed(int id, const std::string& name, Fn&& fn) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  const auto t0 = Clock::now();
  std::ostringstream detail;
  r.pass = fn(detail);
  r.ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  r.detail = detail.str();
  return r;
}

}  // namespace detail

/// 1. Norm axioms, unit-ball property and the constant-exponent cross-check.
inline CriterionResult criterion_norm_axioms() {
  return detail::timed(1, "norm axioms + unit ball", [](std::ostringstream& out) {
    Rng rng(101);
    int failures = 0;
    double worst_axiom = 0.0, worst_ball = 0.0, worst_const = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const bool constant = trial % 4 == 0;
      const auto inst = detail::random_instance(rng, 8, 3, constant);
      const std::size_t n = inst.space.size(), d = inst.E.dim();
      const auto f1 = detail::random_payoff(rng, n, d);
      const auto f2 = detail::random_payoff(rng, n, d);
      const double c = rng.uniform(-3.0, 3.0);

      const double n1 = luxemburg_norm(inst.space, f1, inst.p);
      const double n2 = luxemburg_norm(inst.space, f2, inst.p);
      const double nc = luxemburg_norm(inst.space, c * f1, inst.p);
      const double ns = luxemburg_norm(inst.space, f1 + f2, inst.p);

      const double hom = std::abs(nc - std::abs(c) * n1);
      const double tri = ns - (n1 + n2);
      worst_axiom = std::max({worst_axiom, hom, tri});
      if (hom > 1e-8 || tri > 1e-8) ++failures;

      if (f1.max_row_norm() > 1e-9) {
        if (!(n1 > 0.0)) ++failures;  // definiteness
        const double ball = std::abs(modular(inst.space, (1.0 / n1) * f1, inst.p) - 1.0);
        worst_ball = std::max(worst_ball, ball);
        if (ball > 1e-7) ++failures;
        if (n1 > f1.max_row_norm() + 1e-10) ++failures;  // probability-space bound
      }
      if (luxemburg_norm(inst.space, RandomVector(n, d), inst.p) != 0.0) ++failures;

      if (constant) {
        const double q = inst.p[0];
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          acc += inst.space.weight(i) * std::pow(f1.row_norm(i), q);
        const double qnorm = std::pow(acc, 1.0 / q);
        const double diff = std::abs(n1 - qnorm);
        worst_const = std::max(worst_const, diff);
        if (diff > 1e-8) ++failures;
      }
    }
    out << "failures=" << failures << " worst: axiom=" << format_number(worst_axiom)
        << " ball=" << format_number(worst_ball) << " const-p=" << format_number(worst_const);
    return failures == 0;
  });
}

/// 2. Holder bound with constant 2: gap never below -1e-9.
inline CriterionResult criterion_holder() {
  return detail::timed(2, "Holder pairing bound", [](std::ostringstream& out) {
    Rng rng(202);
    double worst = std::numeric_limits<double>::infinity();
    int failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const auto inst = detail::random_instance(rng, 8, 3);
      const auto f = detail::random_payoff(rng, inst.space.size(), inst.E.dim());
      const auto g = detail::random_payoff(rng, inst.space.size(), inst.E.dim());
      const double gap = holder_gap(inst.space, f, g, inst.p);
      worst = std::min(worst, gap);
      if (gap < -1e-9) ++failures;
    }
    out << "failures=" << failures << " min gap=" << format_number(worst);
    return failures == 0;
  });
}

/// 3. Certainty-equivalent axioms for all three families plus the
/// closed-form match for the exponential core.
inline CriterionResult criterion_oce_axioms() {
  return detail::timed(3, "OCE axioms + entropic closed form", [](std::ostringstream& out) {
    Rng rng(303);
    int failures = 0;
    double worst = 0.0, worst_closed = 0.0;
    const double tol = 1e-6;
    for (int family = 0; family < 3; ++family) {
      for (int axiom = 0; axiom < 3; ++axiom) {
        for (int trial = 0; trial < 10000; ++trial) {
          (void)trial;
          const auto inst = detail::random_instance(rng, 6, 3);
          const std::size_t n = inst.space.size(), d = inst.E.dim();
          const auto u = detail::random_utility(rng, family, inst.E);
          const auto f1 = detail::random_payoff(rng, n, d);
          const RandomVector z = RandomVector::constant(n, inst.E.numeraire());

          switch (axiom) {
            case 0: {  // translation along the numeraire, S and rho
              const double m = rng.uniform(-5.0, 5.0);
              const double s = oce(inst.space, inst.E, f1, u).value;
              const double sm = oce(inst.space, inst.E, f1 + m * z, u).value;
              const double r = rho(inst.space, inst.E, f1, u);
              const double rm = rho(inst.space, inst.E, f1 + m * z, u);
              const double err = std::max(std::abs(sm - s - m), std::abs(rm - r + m));
              worst = std::max(worst, err);
              if (err > tol) ++failures;
              break;
            }
            case 1: {  // monotonicity on a constructed comparable pair
              RandomVector f2 = f1;
              for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) f2(i, j) += rng.uniform(0.0, 2.0);
              const double s1 = oce(inst.space, inst.E, f1, u).value;
              const double s2 = oce(inst.space, inst.E, f2, u).value;
              const double err = std::max(s1 - s2, rho(inst.space, inst.E, f2, u) -
                                                       rho(inst.space, inst.E, f1, u));
              worst = std::max(worst, err);
              if (err > tol) ++failures;
              break;
            }
            default: {  // concavity of S / convexity of rho
              const auto f2 = detail::random_payoff(rng, n, d);
              const double lam = rng.uniform(0.0, 1.0);
              const RandomVector mix = lam * f1 + (1.0 - lam) * f2;
              const double s1 = oce(inst.space, inst.E, f1, u).value;
              const double s2 = oce(inst.space, inst.E, f2, u).value;
              const double sm = oce(inst.space, inst.E, mix, u).value;
              const double err = lam * s1 + (1.0 - lam) * s2 - sm;
              worst = std::max(worst, err);
              if (err > tol) ++failures;
              break;
            }
          }

          if (family == 0) {
            const auto y = u.scalarize_all(f1);
            double ee = 0.0;
            for (std::size_t i = 0; i < n; ++i)
              ee += inst.space.weight(i) * std::exp(-u.gamma() * y[i]);
            const double closed = -std::log(ee) / u.gamma();
            const double diff = std::abs(oce(inst.space, inst.E, f1, u).value - closed);
            worst_closed = std::max(worst_closed, diff);
            if (diff > 1e-8) ++failures;
          }
        }
      }
    }
    out << "failures=" << failures << " worst axiom err=" << format_number(worst)
        << " worst closed-form err=" << format_number(worst_closed);
    return failures == 0;
  });
}

/// 4. Sub-homogeneity of the certainty equivalent.
inline CriterionResult criterion_subhomogeneity() {
  return detail::timed(4, "sub-homogeneity", [](std::ostringstream& out) {
    Rng rng(404);
    int failures = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
      const auto inst = detail::random_instance(rng, 6, 3);
      const auto u = detail::random_utility(rng, trial % 3, inst.E);
      const auto f = detail::random_payoff(rng, inst.space.size(), inst.E.dim());
      const double a = rng.uniform(0.0, 5.0);
      const double gap = subhomogeneity_gap(inst.space, inst.E, f, u, a);
      worst = std::min(worst, gap);
      if (gap < -1e-6) ++failures;
    }
    out << "failures=" << failures << " min gap=" << format_number(worst);
    return failures == 0;
  });
}

/// 5. Order agreement of optimized and plain certainty equivalents.
inline CriterionResult criterion_ssd() {
  return detail::timed(5, "SSD order agreement", [](std::ostringstream& out) {
    Rng rng(505);
    int disagreements = 0, compared = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      const auto inst = detail::random_instance(rng, 6, 3);
      const auto u = detail::random_utility(rng, 0, inst.E);
      const auto f1 = detail::random_payoff(rng, inst.space.size(), inst.E.dim());
      const auto f2 = detail::random_payoff(rng, inst.space.size(), inst.E.dim());
      const auto rep = ssd_compare(inst.space, inst.E, f1, f2, u, 1e-6);
      if (rep.su_order != 0 && rep.cu_order != 0) {
        ++compared;
        if (rep.su_order != rep.cu_order) ++disagreements;
      }
    }
    out << "compared=" << compared << " disagreements=" << disagreements;
    return disagreements == 0 && compared > 0;
  });
}

/// 6. Static robust representation: primal vs. dual within 1e-3 and weak
/// duality on every sampled feasible density.
inline CriterionResult criterion_static_duality() {
  return detail::timed(6, "static strong + weak duality", [](std::ostringstream& out) {
    Rng rng(606);
    int gap_failures = 0, weak_failures = 0, infinite_checked = 0;
    double worst_gap = 0.0, worst_weak = 0.0;
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 3));
      const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, 1));
      const auto space = FiniteMeasureSpace::with_weights(rng.probability_vector(n));
      std::vector<double> z(d);
      for (auto& x : z) x = rng.uniform(0.5, 2.0);
      const OrderedSpace E(d, z);
      const auto f = detail::random_payoff(rng, n, d);
      for (int family : {0, 1}) {
        const auto u = detail::random_utility(rng, family, E);
        const auto rep = dual_check(space, E, f, u);
        worst_gap = std::max(worst_gap, rep.gap);
        if (rep.gap > 1e-3) ++gap_failures;

        for (int s = 0; s < 40; ++s) {
          const auto m = rng.probability_vector(n, 0.0);
          std::vector<double> q(n);
          for (std::size_t i = 0; i < n; ++i) q[i] = m[i] / space.weight(i);
          const auto g = density_from_scalar(q, u.weight());
          const auto pen = penalty_minimal(space, E, g, u);
          if (pen.infinite()) continue;
          const double lhs = pairing(space, g, -1.0 * f) - pen.value;
          const double excess = lhs - rep.primal;
          worst_weak = std::max(worst_weak, excess);
          if (excess > 1e-6) ++weak_failures;
        }
        if (d >= 2) {
          // a generic feasible density off the weight direction must be
          // excluded by an infinite penalty
          RandomVector g(n, d);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.uniform(0.1, 2.0);
          double total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += g(i, j) * z[j];
            total += space.weight(i) * dot;
          }
          g *= 1.0 / total;
          std::vector<double> q;
          if (!collinear_with_weight(g, E, u.weight(), q)) {
            ++infinite_checked;
            if (!penalty_minimal(space, E, g, u).infinite()) ++weak_failures;
          }
        }
      }
    }
    out << "gap failures=" << gap_failures << " weak failures=" << weak_failures
        << " worst gap=" << format_number(worst_gap)
        << " worst weak excess=" << format_number(worst_weak)
        << " off-direction densities=" << infinite_checked;
    return gap_failures == 0 && weak_failures == 0;
  });
}

/// 7. Conditional robust representation on the 4-leaf tree at t = 1 plus
/// the integrated-penalty and conditional-pairing identities.
inline CriterionResult criterion_conditional_duality() {
  return detail::timed(7, "conditional duality + penalty identity", [](std::ostringstream& out) {
    const auto doc = fixtures::binarytree4();
    const auto space = doc.space();
    const auto filt = doc.filtration();
    const auto E = doc.ordered();
    double worst_gap = 0.0, worst_lemma = 0.0, worst_eq53 = 0.0;
    bool dominated = true;

    Rng rng(707);
    for (int rep = 0; rep < 25; ++rep) {
      const auto f = rep == 0 ? doc.payoff("f") : detail::random_payoff(rng, 4, 1);
      for (const char* uname : {"entropic", "cvar"}) {
        const auto u = doc.utility(uname);
        worst_gap = std::max(worst_gap, conditional_dual_check(space, filt, E, f, u, 1).max_gap);
      }
    }

    for (const char* dname : {"flat", "tilted"}) {
      const auto g = doc.density(dname);
      for (const char* uname : {"entropic", "cvar"}) {
        const auto pcr =
            conditional_penalty_consistency(space, filt, E, g, doc.utility(uname), 1);
        if (pcr.finite_atoms > 0) worst_lemma = std::max(worst_lemma, pcr.max_gap);
        dominated = dominated && pcr.dominated;
      }
      // integration identity of the conditional pairing, exact arithmetic
      for (int t = 0; t <= filt.horizon(); ++t) {
        const auto f = doc.payoff("stair");
        const auto cp = conditional_pairing(space, filt, g, f, t).expand(filt);
        const auto& part = filt.partition(t);
        for (std::size_t mask = 1; mask < (1u << part.size()); ++mask) {
          double lhs = 0.0, rhs = 0.0;
          for (std::size_t a = 0; a < part.size(); ++a) {
            if (!(mask & (1u << a))) continue;
            for (std::size_t i : part[a]) {
              lhs += space.weight(i) * cp[i];
              rhs += space.weight(i) * (-g(i, 0) * f(i, 0));
            }
          }
          worst_eq53 = std::max(worst_eq53, std::abs(lhs - rhs));
        }
      }
    }
    out << "worst dual gap=" << format_number(worst_gap)
        << " worst penalty identity gap=" << format_number(worst_lemma)
        << " dominated=" << (dominated ? "yes" : "no")
        << " worst integration residual=" << format_number(worst_eq53);
    return worst_gap <= 1e-3 && worst_lemma <= 1e-3 && dominated && worst_eq53 <= 1e-12;
  });
}

/// 8. Time consistency: exponential family exact, composed family exact by
/// construction, conditional cvar falsified with a seeded witness, and the
/// acceptance decomposition verified on accepted samples.
inline CriterionResult criterion_time_consistency() {
  return detail::timed(8, "time consistency battery", [](std::ostringstream& out) {
    const auto doc = fixtures::binarytree4();
    const auto space = doc.space();
    const auto filt = doc.filtration();
    const auto E = doc.ordered();
    const int T = filt.horizon();

    const auto ent = DynamicFamily::direct_uniform(doc.utility("entropic"), T);
    const auto ent_rep = consistency_audit(space, filt, E, ent, 0, 1, 10000, 808, 1e-6);

    const auto composed = DynamicFamily::composed_uniform(doc.utility("cvar"), T);
    const auto comp_rep = consistency_audit(space, filt, E, composed, 0, 1, 10000, 809, 1e-6);

    const auto cvar = DynamicFamily::direct_uniform(doc.utility("cvar"), T);
    const auto cvar_rep = consistency_audit(space, filt, E, cvar, 0, 1, 5000, 7, 1e-6);

    int decompose_failures = 0;
    Rng rng(810);
    const RandomVector z = RandomVector::constant(4, E.numeraire());
    const auto composed_ent = DynamicFamily::composed_uniform(doc.utility("entropic"), T);
    for (int k = 0; k < 1000; ++k) {
      const int t = k % 2, s = 1;
      const auto raw = detail::random_payoff(rng, 4, 1, 2.0);
      const auto shift = family_rho(space, filt, E, composed_ent, raw, t).expand(filt);
      RandomVector accepted = raw;
      for (std::size_t i = 0; i < 4; ++i) accepted(i, 0) += shift[i] * E.numeraire()[0];
      const auto dec = decompose_acceptance(space, filt, E, composed_ent, accepted, t, s, 1e-6);
      if (!dec.verified(1e-6)) ++decompose_failures;
    }

    out << "entropic residual=" << format_number(ent_rep.max_residual)
        << " composed residual=" << format_number(comp_rep.max_residual)
        << " cvar witness residual=" << format_number(cvar_rep.max_residual)
        << " cvar implication violations=" << cvar_rep.implication_violations
        << " decompose failures=" << decompose_failures;
    return ent_rep.max_residual <= 1e-6 && ent_rep.consistent() &&
           comp_rep.max_residual <= 1e-6 && comp_rep.consistent() &&
           cvar_rep.has_witness && cvar_rep.max_residual > 1e-2 &&
           cvar_rep.implication_violations > 0 && decompose_failures == 0;
  });
}

/// 9. Acceptance-set structure: conditional convexity, solidity and
/// normalization with zero violations.
inline CriterionResult criterion_acceptance_sets() {
  return detail::timed(9, "acceptance-set properties", [](std::ostringstream& out) {
    const auto doc = fixtures::binarytree4();
    const auto space = doc.space();
    const auto filt = doc.filtration();
    const auto E = doc.ordered();
    const int T = filt.horizon();
    int convexity = 0, solidity = 0, trials = 0;
    bool normalization = true;
    std::uint64_t seed = 900;
    for (const char* uname : {"entropic", "cvar"}) {
      for (const auto& family : {DynamicFamily::direct_uniform(doc.utility(uname), T),
                                 DynamicFamily::composed_uniform(doc.utility(uname), T)}) {
        for (auto [t, s] : {std::pair{0, 1}, std::pair{1, 1}}) {
          const auto rep = acceptance_sets_audit(space, filt, E, family, t, s, 1250, seed++);
          trials += rep.trials;
          convexity += rep.convexity_violations;
          solidity += rep.solidity_violations;
          normalization = normalization && rep.normalization_ok;
        }
      }
    }
    out << "trials=" << trials << " convexity violations=" << convexity
        << " solidity violations=" << solidity
        << " normalization=" << (normalization ? "ok" : "violated");
    return trials >= 10000 && convexity == 0 && solidity == 0 && normalization;
  });
}

/// 10. Determinism: built-in documents survive the parse/serialize round
/// trip and seeded reports render byte-identically.
inline CriterionResult criterion_determinism() {
  return detail::timed(10, "round-trip + report determinism", [](std::ostringstream& out) {
    int roundtrip_failures = 0;
    for (const auto& doc : {fixtures::minimal(), fixtures::twopoint(), fixtures::binarytree4(),
                            fixtures::constant(), fixtures::vector2d()}) {
      const std::string s1 = serialize_scenario(doc);
      const auto reloaded = parse_scenario(s1, /*strict=*/true);
      if (!(reloaded == doc) || serialize_scenario(reloaded) != s1) ++roundtrip_failures;
    }

    const auto render_once = [] {
      const auto doc = fixtures::binarytree4();
      const auto space = doc.space();
      const auto filt = doc.filtration();
      const auto E = doc.ordered();
      const auto fam = DynamicFamily::direct_uniform(doc.utility("cvar"), filt.horizon());
      const auto rep = consistency_audit(space, filt, E, fam, 0, 1, 500, 7, 1e-6);
      Report r("consistency");
      r.config("scenario", doc.name);
      r.config("seed", 7.0);
      r.row("max_residual", rep.max_residual, "search", format_number(rep.tol));
      r.row("implication_violations", rep.implication_violations, "search", "exact");
      if (rep.has_witness) {
        std::ostringstream w;
        for (std::size_t i = 0; i < rep.witness.outcomes(); ++i)
          w << (i ? " " : "") << format_number(rep.witness(i, 0));
        r.witness(w.str());
      }
      return r.structured();
    };
    const bool reports_equal = render_once() == render_once();

    out << "round-trip failures=" << roundtrip_failures
        << " seeded reports byte-identical=" << (reports_equal ? "yes" : "no");
    return roundtrip_failures == 0 && reports_equal;
  });
}

inline std::vector<CriterionResult> run_all() {
  return {criterion_norm_axioms(),      criterion_holder(),
          criterion_oce_axioms(),       criterion_subhomogeneity(),
          criterion_ssd(),              criterion_static_duality(),
          criterion_conditional_duality(), criterion_time_consistency(),
          criterion_acceptance_sets(),  criterion_determinism()};
}

}  // namespace vexrisk::selftest
