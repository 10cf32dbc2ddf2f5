#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vexrisk/dual.hpp"
#include "vexrisk/oce.hpp"
#include "vexrisk/ordered.hpp"
#include "vexrisk/random.hpp"
#include "vexrisk/space.hpp"

namespace vexrisk {

/// A level-t measurable scalar function, stored per atom in partition
/// order. The expansion to a function on outcomes is constant on atoms by
/// construction.
struct ConditionalValue {
  int level = 0;
  std::vector<double> atom_values;

  std::vector<double> expand(const Filtration& filt) const {
    const auto& part = filt.partition(level);
    if (part.size() != atom_values.size())
      throw std::invalid_argument("conditional value does not match the level-" +
                                  std::to_string(level) + " partition");
    std::vector<double> out(filt.outcomes());
    for (std::size_t a = 0; a < part.size(); ++a)
      for (std::size_t i : part[a]) out[i] = atom_values[a];
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : atom_values) m = std::max(m, std::abs(v));
    return m;
  }
};

inline double max_abs_diff(const ConditionalValue& a, const ConditionalValue& b) {
  if (a.level != b.level || a.atom_values.size() != b.atom_values.size())
    throw std::invalid_argument("conditional values live on different partitions");
  double m = 0.0;
  for (std::size_t k = 0; k < a.atom_values.size(); ++k)
    m = std::max(m, std::abs(a.atom_values[k] - b.atom_values[k]));
  return m;
}

struct ConditionalOceResult {
  ConditionalValue value;               // S_u per atom
  std::vector<double> eta_star;         // maximizer per atom
  int iterations = 0;
};

/// Conditional optimized certainty equivalent at level t: the measurable
/// sup decouples across atoms, so each atom solves its own scalar problem
/// under the conditional weights mu_i / mu(A).
inline ConditionalOceResult conditional_oce(const FiniteMeasureSpace& space,
                                            const Filtration& filt, const OrderedSpace& E,
                                            const RandomVector& f, const Utility& u, int t,
                                            double tol = 1e-8) {
  if (f.outcomes() != space.size() || filt.outcomes() != space.size())
    throw std::invalid_argument("conditional_oce: shape mismatch");
  u.validate(E);
  const std::vector<double> y = u.scalarize_all(f);
  ConditionalOceResult out;
  out.value.level = t;
  for (const auto& members : filt.partition(t)) {
    double mass = 0.0;
    for (std::size_t i : members) mass += space.weight(i);
    std::vector<double> w, ya;
    w.reserve(members.size());
    ya.reserve(members.size());
    for (std::size_t i : members) {
      w.push_back(space.weight(i) / mass);
      ya.push_back(y[i]);
    }
    const auto solved = detail::scalar_oce(w, ya, u, tol);
    out.value.atom_values.push_back(solved.value);
    out.eta_star.push_back(solved.eta_star);
    out.iterations += solved.iterations;
  }
  return out;
}

/// A dynamic family of conditional risk measures, either applying a
/// per-level utility directly at each level or chaining one-step measures
/// backward through the tree (which makes the family time consistent by
/// construction).
class DynamicFamily {
public:
  static DynamicFamily direct(std::vector<Utility> per_level) {
    return DynamicFamily(std::move(per_level), false);
  }

  static DynamicFamily direct_uniform(const Utility& u, int horizon) {
    return DynamicFamily(std::vector<Utility>(static_cast<std::size_t>(horizon) + 1, u), false);
  }

  /// Backward recursion over one-step measures: the level-t value is the
  /// level-t measure applied to the certainty-equivalent payoff of t+1.
  static DynamicFamily composed(std::vector<Utility> per_level) {
    return DynamicFamily(std::move(per_level), true);
  }

  static DynamicFamily composed_uniform(const Utility& u, int horizon) {
    return DynamicFamily(std::vector<Utility>(static_cast<std::size_t>(horizon) + 1, u), true);
  }

  bool is_composed() const { return composed_; }
  int horizon() const { return static_cast<int>(utilities_.size()) - 1; }

  const Utility& utility_at(int t) const {
    if (t < 0 || t > horizon()) throw std::out_of_range("family has no level " + std::to_string(t));
    return utilities_[static_cast<std::size_t>(t)];
  }

private:
  DynamicFamily(std::vector<Utility> utilities, bool composed)
      : utilities_(std::move(utilities)), composed_(composed) {
    if (utilities_.empty()) throw std::invalid_argument("dynamic family needs at least one level");
  }

  std::vector<Utility> utilities_;
  bool composed_;
};

/// rho_t(f) for the family, per level-t atom.
inline ConditionalValue family_rho(const FiniteMeasureSpace& space, const Filtration& filt,
                                   const OrderedSpace& E, const DynamicFamily& family,
                                   const RandomVector& f, int t, double tol = 1e-8) {
  if (family.horizon() != filt.horizon())
    throw std::invalid_argument("family horizon does not match the filtration");
  if (t < 0 || t > filt.horizon())
    throw std::out_of_range("level " + std::to_string(t) + " out of range");
  const auto negate = [](ConditionalValue cv) {
    for (auto& v : cv.atom_values) v = -v;
    return cv;
  };
  if (!family.is_composed())
    return negate(conditional_oce(space, filt, E, f, family.utility_at(t), t, tol).value);

  const int T = filt.horizon();
  ConditionalValue cv =
      negate(conditional_oce(space, filt, E, f, family.utility_at(T), T, tol).value);
  for (int s = T - 1; s >= t; --s) {
    std::vector<double> c = cv.expand(filt);
    for (auto& ci : c) ci = -ci;
    const RandomVector payoff = RandomVector::scaled(c, E.numeraire());
    cv = negate(conditional_oce(space, filt, E, payoff, family.utility_at(s), s, tol).value);
  }
  return cv;
}

/// The level-t conditional inner product <g, -f>_t: the conditional
/// expectation of the pointwise pairing. Summing mu-weighted values over
/// any union of level-t atoms recovers the pairing restricted to it,
/// exactly in finite arithmetic.
inline ConditionalValue conditional_pairing(const FiniteMeasureSpace& space,
                                            const Filtration& filt, const DualDensity& g,
                                            const RandomVector& f, int t) {
  g.require_same_shape(f);
  if (g.outcomes() != space.size()) throw std::invalid_argument("measure space size mismatch");
  std::vector<double> pointwise(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < g.dim(); ++j) dot += g(i, j) * f(i, j);
    pointwise[i] = -dot;
  }
  ConditionalValue out;
  out.level = t;
  out.atom_values = atom_averages(space, filt, pointwise, t);
  return out;
}

/// Conditional minimal penalty per level-t atom, closed form. Densities
/// must be collinear with the utility weight on an atom for the value there
/// to be finite; the scalar part enters through the conditional relative
/// entropy (exponential core) or the conditional density bound (piecewise
/// cores), both relative to the atom mean of q so that densities normalized
/// per atom reproduce the plain conditional formulas.
inline ConditionalValue conditional_penalty_min(const FiniteMeasureSpace& space,
                                                const Filtration& filt, const OrderedSpace& E,
                                                const DualDensity& g, const Utility& u, int t) {
  u.validate(E);
  if (!dual_feasible_static(space, g, E))
    throw std::invalid_argument("conditional_penalty_min: density is not feasible");
  const auto q = numeraire_mass(g, E);
  const double scale = 1.0 + g.max_abs();
  ConditionalValue out;
  out.level = t;
  for (const auto& members : filt.partition(t)) {
    bool collinear = true;
    for (std::size_t i : members)
      for (std::size_t j = 0; j < g.dim() && collinear; ++j)
        if (std::abs(g(i, j) - q[i] * u.weight()[j]) > kCollinearTol * scale) collinear = false;
    out.atom_values.push_back(collinear
                                  ? detail::scalar_penalty_block(space, members, q, u)
                                  : std::numeric_limits<double>::infinity());
  }
  return out;
}

struct ConditionalDualReport {
  ConditionalValue primal;
  ConditionalValue dual;
  double max_gap = 0.0;
};

/// Conditional robust representation check at level t: per atom, the
/// supremum over atom-normalized scalar densities of
/// { <g, -f>_t - alpha_t(g) } against rho_t(f). Searches are the same
/// grid/ascent and capped-simplex routines as the static check, run on the
/// conditional weights of each atom.
inline ConditionalDualReport conditional_dual_check(const FiniteMeasureSpace& space,
                                                    const Filtration& filt, const OrderedSpace& E,
                                                    const RandomVector& f, const Utility& u, int t,
                                                    const DualSearchOptions& opts = {}) {
  u.validate(E);
  const std::vector<double> y = u.scalarize_all(f);
  ConditionalDualReport rep;
  rep.primal.level = rep.dual.level = t;
  for (const auto& members : filt.partition(t)) {
    double mass = 0.0;
    for (std::size_t i : members) mass += space.weight(i);
    std::vector<double> mu, ya;
    for (std::size_t i : members) {
      mu.push_back(space.weight(i) / mass);
      ya.push_back(y[i]);
    }
    const double primal = -detail::scalar_oce(mu, ya, u).value;

    std::vector<double> m;
    switch (u.kind()) {
      case CoreKind::exponential:
        m = detail::entropic_dual_search(mu, ya, u.gamma(), opts);
        break;
      case CoreKind::cvar: {
        std::vector<double> lo(mu.size(), 0.0), hi(mu.size());
        for (std::size_t k = 0; k < mu.size(); ++k) hi[k] = mu[k] / (1.0 - u.alpha());
        m = detail::capped_simplex_argmax(ya, lo, hi);
        break;
      }
      case CoreKind::piecewise_linear: {
        std::vector<double> lo(mu.size()), hi(mu.size());
        for (std::size_t k = 0; k < mu.size(); ++k) {
          lo[k] = u.slope_pos() * mu[k];
          hi[k] = u.slope_neg() * mu[k];
        }
        m = detail::capped_simplex_argmax(ya, lo, hi);
        break;
      }
    }
    double dual = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      dual -= m[k] * ya[k];
      if (u.kind() == CoreKind::exponential && m[k] > 0.0)
        dual -= m[k] * std::log(m[k] / mu[k]) / u.gamma();
    }
    rep.primal.atom_values.push_back(primal);
    rep.dual.atom_values.push_back(dual);
    rep.max_gap = std::max(rep.max_gap, std::abs(primal - dual));
  }
  return rep;
}

struct PenaltyConsistencyOptions {
  int grid = 200;
  int ascent_iters = 600;
  int samples = 400;
  std::uint64_t seed = 4242;
};

struct PenaltyConsistencyReport {
  ConditionalValue closed_form;
  ConditionalValue sampled_sup;
  double max_gap = 0.0;    // over atoms with finite closed form
  bool dominated = true;   // closed form >= every sampled value - 1e-9
  int finite_atoms = 0;
};

/// Checks the integrated-penalty identity: per atom, the closed-form
/// conditional penalty against an independently computed supremum of
/// conditional pairings over the level-t acceptance set. For the
/// exponential core the acceptance slice is reparameterized onto the
/// simplex (s_i = exp(-gamma y_i), conditional mean 1) and climbed with
/// multiplicative weights; piecewise cores are sampled through boundary
/// members. The sampled side is a lower bound; the closed form has to
/// dominate it and meet it within tolerance.
inline PenaltyConsistencyReport conditional_penalty_consistency(
    const FiniteMeasureSpace& space, const Filtration& filt, const OrderedSpace& E,
    const DualDensity& g, const Utility& u, int t, const PenaltyConsistencyOptions& opts = {}) {
  PenaltyConsistencyReport rep;
  rep.closed_form = conditional_penalty_min(space, filt, E, g, u, t);
  rep.sampled_sup.level = t;
  const auto q = numeraire_mass(g, E);
  Rng rng(opts.seed);

  const auto& part = filt.partition(t);
  for (std::size_t a = 0; a < part.size(); ++a) {
    const auto& members = part[a];
    double mass = 0.0;
    for (std::size_t i : members) mass += space.weight(i);
    std::vector<double> mu, qa;
    for (std::size_t i : members) {
      mu.push_back(space.weight(i) / mass);
      qa.push_back(q[i]);
    }
    const std::size_t k = members.size();
    double best = -std::numeric_limits<double>::infinity();

    if (u.kind() == CoreKind::exponential) {
      // maximize (1/gamma) sum mu_i q_i ln(sigma_i / mu_i) over the simplex
      const auto objective = [&](const std::vector<double>& sigma) {
        double v = 0.0;
        for (std::size_t i = 0; i < k; ++i)
          if (qa[i] > 0.0) v += mu[i] * qa[i] * std::log(sigma[i] / mu[i]);
        return v / u.gamma();
      };
      std::vector<double> sigma = mu;
      best = objective(sigma);
      if (k == 2 && opts.grid >= 2) {
        for (int j = 1; j < opts.grid; ++j) {
          const std::vector<double> cand = {static_cast<double>(j) / opts.grid,
                                            1.0 - static_cast<double>(j) / opts.grid};
          best = std::max(best, objective(cand));
        }
      }
      double step = 0.5, cur = objective(sigma);
      for (int it = 0; it < opts.ascent_iters && step > 1e-14; ++it) {
        std::vector<double> cand(k);
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          const double grad = mu[i] * qa[i] / std::max(sigma[i], 1e-300);
          cand[i] = sigma[i] * std::exp(step * grad);
          z += cand[i];
        }
        for (auto& ci : cand) ci /= z;
        const double cv = objective(cand);
        if (cv > cur) {
          sigma = cand;
          cur = cv;
          step *= 1.2;
        } else {
          step *= 0.5;
        }
      }
      best = std::max(best, cur);
    } else {
      // boundary sampling: y = draw + rho_A(y) along the numeraire lands on
      // the acceptance boundary; y = 0 is always a member.
      const auto pair_at = [&](const std::vector<double>& ya) {
        double v = 0.0;
        for (std::size_t i = 0; i < k; ++i) v -= mu[i] * qa[i] * ya[i];
        return v;
      };
      std::vector<double> zero(k, 0.0);
      best = pair_at(zero);
      for (int s = 0; s < opts.samples; ++s) {
        std::vector<double> ya(k);
        for (auto& yi : ya) yi = rng.uniform(-3.0, 3.0);
        const double shift = detail::scalar_oce(mu, ya, u).value;
        for (auto& yi : ya) yi -= shift;  // rho_A(y - rho... ) == 0
        best = std::max(best, pair_at(ya));
      }
    }

    rep.sampled_sup.atom_values.push_back(best);
    const double closed = rep.closed_form.atom_values[a];
    if (!std::isinf(closed)) {
      ++rep.finite_atoms;
      rep.max_gap = std::max(rep.max_gap, std::abs(closed - best));
      if (best > closed + 1e-9) rep.dominated = false;
    }
  }
  return rep;
}

struct AcceptanceSetsReport {
  int trials = 0;
  int members_level = 0;
  int members_stepped = 0;
  int convexity_violations = 0;
  int solidity_violations = 0;
  bool normalization_ok = false;
  bool pass() const {
    return normalization_ok && convexity_violations == 0 && solidity_violations == 0;
  }
};

/// Samples the level-t acceptance set and its stepped (level t+s
/// measurable) subset, validating conditional convexity, solidity and
/// normalization on every draw.
inline AcceptanceSetsReport acceptance_sets_audit(const FiniteMeasureSpace& space,
                                                  const Filtration& filt, const OrderedSpace& E,
                                                  const DynamicFamily& family, int t, int s,
                                                  int trials, std::uint64_t seed,
                                                  double tol = 1e-6) {
  if (!(t >= 0 && s >= 1 && t + s <= filt.horizon()))
    throw std::invalid_argument("acceptance_sets_audit: need 0 <= t < t+s <= horizon");
  const std::size_t n = space.size(), d = E.dim();
  Rng rng(seed);
  AcceptanceSetsReport rep;
  rep.trials = trials;

  const auto rho_at = [&](const RandomVector& f, int lvl) {
    return family_rho(space, filt, E, family, f, lvl);
  };
  const auto accepted = [&](const RandomVector& f) {
    ConditionalValue cv = rho_at(f, t);
    for (double v : cv.atom_values)
      if (v > tol) return false;
    return true;
  };
  const auto to_boundary = [&](RandomVector f) {
    ConditionalValue cv = rho_at(f, t);
    return f + RandomVector::scaled(cv.expand(filt), E.numeraire());
  };
  const auto random_payoff = [&] {
    RandomVector f(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-2.0, 2.0);
    return f;
  };

  {
    const RandomVector zero(n, d);
    ConditionalValue cv = rho_at(zero, t);
    rep.normalization_ok = cv.max_abs() <= tol;
  }

  for (int trial = 0; trial < trials; ++trial) {
    const RandomVector f1 = to_boundary(random_payoff());
    const RandomVector f2 = to_boundary(random_payoff());
    if (accepted(f1)) ++rep.members_level;

    // conditional convexity with a level-t measurable mixing weight
    std::vector<double> lam_atoms(filt.partition(t).size());
    for (auto& l : lam_atoms) l = rng.uniform(0.0, 1.0);
    const auto lam = ConditionalValue{t, lam_atoms}.expand(filt);
    RandomVector mix(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        mix(i, j) = lam[i] * f1(i, j) + (1.0 - lam[i]) * f2(i, j);
    if (!accepted(mix)) ++rep.convexity_violations;

    // solidity: anything above a member in the cone order stays accepted
    RandomVector up = f1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) up(i, j) += rng.uniform(0.0, 1.5);
    if (!accepted(up)) ++rep.solidity_violations;

    // stepped members: level-(t+s) measurable draws shifted to acceptance
    const auto& step_part = filt.partition(t + s);
    RandomVector fm(n, d);
    for (const auto& members : step_part) {
      std::vector<double> cell(d);
      for (auto& c : cell) c = rng.uniform(-2.0, 2.0);
      for (std::size_t i : members)
        for (std::size_t j = 0; j < d; ++j) fm(i, j) = cell[j];
    }
    if (accepted(to_boundary(fm))) ++rep.members_stepped;
  }
  return rep;
}

struct ConsistencyReport {
  int trials = 0;
  double tol = 0.0;
  double max_residual = 0.0;
  bool has_witness = false;
  RandomVector witness{1, 1};
  int implication_checked = 0;
  int implication_violations = 0;
  double max_implication_excess = 0.0;
  bool consistent() const { return max_residual <= tol && implication_violations == 0; }
};

/// Time-consistency audit over seeded trials: the recursion residual
/// | rho_t(-rho_{t+s}(f) z) - rho_t(f) | and the order-preservation
/// implication on sampled pairs comparable at t+s. Report-only; the verdict
/// is falsification-based.
inline ConsistencyReport consistency_audit(const FiniteMeasureSpace& space, const Filtration& filt,
                                           const OrderedSpace& E, const DynamicFamily& family,
                                           int t, int s, int trials, std::uint64_t seed,
                                           double tol = 1e-6, double range = 2.0) {
  if (!(t >= 0 && s >= 1 && t + s <= filt.horizon()))
    throw std::invalid_argument("consistency_audit: need 0 <= t < t+s <= horizon");
  const std::size_t n = space.size(), d = E.dim();
  Rng rng(seed);
  ConsistencyReport rep;
  rep.trials = trials;
  rep.tol = tol;

  const auto random_payoff = [&] {
    RandomVector f(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-range, range);
    return f;
  };
  const auto rho_at = [&](const RandomVector& f, int lvl) {
    return family_rho(space, filt, E, family, f, lvl);
  };

  for (int trial = 0; trial < trials; ++trial) {
    const RandomVector f = random_payoff();
    ConditionalValue inner = rho_at(f, t + s);
    std::vector<double> c = inner.expand(filt);
    for (auto& ci : c) ci = -ci;
    const RandomVector recomposed = RandomVector::scaled(c, E.numeraire());
    const double residual = max_abs_diff(rho_at(recomposed, t), rho_at(f, t));
    if (residual > rep.max_residual) {
      rep.max_residual = residual;
      if (residual > tol) {
        rep.has_witness = true;
        rep.witness = f;
      }
    }
    if (residual > tol) {
      // (f, recomposed) is ordered both ways at t+s (cash invariance makes
      // rho_{t+s} equal there), so a nonzero residual at t breaks the
      // order-preservation implication in one direction.
      ++rep.implication_checked;
      ++rep.implication_violations;
      rep.max_implication_excess = std::max(rep.max_implication_excess, residual);
    }

    if (trial % 2 == 0) {
      const RandomVector f2 = random_payoff();
      const ConditionalValue r1 = rho_at(f, t + s), r2 = rho_at(f2, t + s);
      bool ordered = true;
      for (std::size_t k = 0; k < r1.atom_values.size(); ++k)
        if (r1.atom_values[k] > r2.atom_values[k] + 1e-12) ordered = false;
      if (ordered) {
        ++rep.implication_checked;
        const ConditionalValue q1 = rho_at(f, t), q2 = rho_at(f2, t);
        for (std::size_t k = 0; k < q1.atom_values.size(); ++k) {
          const double excess = q1.atom_values[k] - q2.atom_values[k];
          if (excess > tol) {
            ++rep.implication_violations;
            rep.max_implication_excess = std::max(rep.max_implication_excess, excess);
            if (!rep.has_witness) {
              rep.has_witness = true;
              rep.witness = f;
            }
            break;
          }
        }
      }
    }
  }
  return rep;
}

struct Decomposition {
  RandomVector f1;  // level-(t+s) measurable cash part
  RandomVector f2;  // remainder, accepted at t+s
  double rho_f2_residual = 0.0;  // max |rho_{t+s}(f2)| (zero by cash invariance)
  double rho_f1_level_t = 0.0;   // max atom value of rho_t(f1) (<= 0 for consistent families)
  double recombination_error = 0.0;
  bool verified(double tol) const {
    return rho_f2_residual <= tol && rho_f1_level_t <= tol && recombination_error <= 1e-12;
  }
};

/// Splits an accepted position into a stepped cash part and a t+s-accepted
/// remainder: f2 = f + rho_{t+s}(f) z and f1 = -rho_{t+s}(f) z. Membership
/// of both parts is verified numerically; for families that fail the
/// consistency audit the f1 membership is not guaranteed and will show up
/// in the report.
inline Decomposition decompose_acceptance(const FiniteMeasureSpace& space, const Filtration& filt,
                                          const OrderedSpace& E, const DynamicFamily& family,
                                          const RandomVector& f, int t, int s, double tol = 1e-6) {
  if (!(t >= 0 && s >= 1 && t + s <= filt.horizon()))
    throw std::invalid_argument("decompose_acceptance: need 0 <= t < t+s <= horizon");
  {
    ConditionalValue at_t = family_rho(space, filt, E, family, f, t);
    for (double v : at_t.atom_values)
      if (v > tol)
        throw std::invalid_argument("decompose_acceptance: payoff not accepted at level " +
                                    std::to_string(t));
  }
  const ConditionalValue inner = family_rho(space, filt, E, family, f, t + s);
  const std::vector<double> c = inner.expand(filt);
  std::vector<double> neg_c = c;
  for (auto& x : neg_c) x = -x;

  Decomposition out{RandomVector::scaled(neg_c, E.numeraire()),
                    f + RandomVector::scaled(c, E.numeraire())};
  out.rho_f2_residual = family_rho(space, filt, E, family, out.f2, t + s).max_abs();
  ConditionalValue r1 = family_rho(space, filt, E, family, out.f1, t);
  for (double v : r1.atom_values) out.rho_f1_level_t = std::max(out.rho_f1_level_t, v);
  const RandomVector recombined = out.f1 + out.f2;
  for (std::size_t i = 0; i < f.outcomes(); ++i)
    for (std::size_t j = 0; j < f.dim(); ++j)
      out.recombination_error =
          std::max(out.recombination_error, std::abs(recombined(i, j) - f(i, j)));
  return out;
}

}  // namespace vexrisk
