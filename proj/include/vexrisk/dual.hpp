#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vexrisk/oce.hpp"
#include "vexrisk/ordered.hpp"
#include "vexrisk/random.hpp"
#include "vexrisk/space.hpp"

namespace vexrisk {

inline constexpr double kCollinearTol = 1e-9;

/// Aggregate feasibility: h in the dual cone with the numeraire mass
/// integrating to one, sum_i mu_i <h_i, z> = 1. Pointwise feasibility
/// (ordered.hpp) is the special case where every single outcome carries
/// unit mass; the aggregate reading is the one the static dual
/// representation ranges over.
inline bool dual_feasible_static(const FiniteMeasureSpace& space, const DualDensity& g,
                                 const OrderedSpace& E, double tol = kFeasibilityTol) {
  if (g.outcomes() != space.size()) throw std::invalid_argument("measure space size mismatch");
  for (std::size_t i = 0; i < g.outcomes(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j)
      if (g(i, j) < -tol) return false;
  const auto q = numeraire_mass(g, E);
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += space.weight(i) * q[i];
  return std::abs(total - 1.0) <= tol;
}

/// Density built from per-outcome scalars along a direction: h_i = q_i * w.
inline DualDensity density_from_scalar(const std::vector<double>& q,
                                       const std::vector<double>& w) {
  return RandomVector::scaled(q, w);
}

/// Tests whether h_i = q_i * w for all outcomes with q_i = <h_i, z>;
/// fills q on success. Densities of this shape are the only ones a
/// weight-composed utility assigns a finite penalty to (any component
/// orthogonal to w makes the defining supremum run away).
inline bool collinear_with_weight(const DualDensity& g, const OrderedSpace& E,
                                  const std::vector<double>& w, std::vector<double>& q,
                                  double tol = kCollinearTol) {
  q = numeraire_mass(g, E);
  const double scale = 1.0 + g.max_abs();
  for (std::size_t i = 0; i < g.outcomes(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j)
      if (std::abs(g(i, j) - q[i] * w[j]) > tol * scale) return false;
  return true;
}

enum class PenaltyStrategy { closed_form, box_search };

struct PenaltyValue {
  double value = 0.0;
  const char* method = "closed-form";
  double box = 0.0;  // box half-width when method == "supremum-over-f"
  bool infinite() const { return std::isinf(value); }
};

struct PenaltySearchOptions {
  double box = 8.0;
  int iterations = 4000;
  int restarts = 3;
  std::uint64_t seed = 20240901;
};

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Closed forms for the minimal penalty of a weight-composed core at a
/// collinear density h = q * w: relative entropy for the exponential core,
/// a density-bound indicator for the piecewise families. Scalars are taken
/// relative to the reference mean over the block [begin, end) of the sorted
/// outcome list, so the same routine serves the static case (one block =
/// everything) and the per-atom conditional case.
inline double scalar_penalty_block(const FiniteMeasureSpace& space,
                                   const std::vector<std::size_t>& members,
                                   const std::vector<double>& q, const Utility& u) {
  double mass = 0.0, mean = 0.0;
  for (std::size_t i : members) {
    mass += space.weight(i);
    mean += space.weight(i) * q[i];
  }
  mean /= mass;
  const double inf = std::numeric_limits<double>::infinity();
  switch (u.kind()) {
    case CoreKind::exponential: {
      double ent = 0.0;
      for (std::size_t i : members) ent += (space.weight(i) / mass) * xlogx(q[i]);
      // sup over the acceptance slice: E[q ln q] - E[q] ln E[q], conditional
      // relative entropy scaled by the block mean; zero iff q constant.
      return (ent - xlogx(mean)) / u.gamma();
    }
    case CoreKind::cvar: {
      const double cap = mean / (1.0 - u.alpha());
      for (std::size_t i : members)
        if (q[i] > cap + 1e-9) return inf;
      return 0.0;
    }
    case CoreKind::piecewise_linear: {
      const double hi = u.slope_neg() * mean, lo = u.slope_pos() * mean;
      for (std::size_t i : members)
        if (q[i] > hi + 1e-9 || q[i] < lo - 1e-9) return inf;
      return 0.0;
    }
  }
  return inf;
}

inline std::vector<std::size_t> all_outcomes(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace detail

/// Minimal penalty sup_f { <g, -f> - rho(f) }. The closed-form strategy
/// requires a density collinear with the utility weight (otherwise the
/// supremum is infinite, which is what gets reported); the box strategy
/// runs projected gradient ascent over f in [-B, B]^{n x d} and is a lower
/// bound by construction, labeled with the box size.
inline PenaltyValue penalty_minimal(const FiniteMeasureSpace& space, const OrderedSpace& E,
                                    const DualDensity& g, const Utility& u,
                                    PenaltyStrategy strategy = PenaltyStrategy::closed_form,
                                    const PenaltySearchOptions& opts = {}) {
  u.validate(E);
  if (!dual_feasible_static(space, g, E))
    throw std::invalid_argument("penalty_minimal: density is not feasible");

  if (strategy == PenaltyStrategy::closed_form) {
    PenaltyValue out;
    out.method = "closed-form";
    std::vector<double> q;
    if (!collinear_with_weight(g, E, u.weight(), q)) {
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value = detail::scalar_penalty_block(space, detail::all_outcomes(space.size()), q, u);
    return out;
  }

  // Box search: maximize J(f) = <g, -f> - rho(f) by projected gradient
  // ascent with the envelope (sub)gradient of the optimized certainty
  // equivalent, mu_i v'(y_i - eta*) w_j.
  const std::size_t n = space.size(), d = E.dim();
  const double B = opts.box;
  Rng rng(opts.seed);
  const auto value_of = [&](const RandomVector& f) {
    return pairing(space, g, -1.0 * f) - rho(space, E, f, u);
  };
  const auto slope = [&](double t) {
    if (u.kind() == CoreKind::exponential) return std::exp(-u.gamma() * t);
    return t < 0.0 ? u.slope_neg() : u.slope_pos();
  };
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    RandomVector f(n, d);
    if (r > 0)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-B / 2, B / 2);
    double cur = value_of(f);
    double step = 1.0;
    for (int it = 0; it < opts.iterations && step > 1e-12; ++it) {
      const auto sol = oce(space, E, f, u);
      RandomVector grad(n, d);
      const auto y = u.scalarize_all(f);
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = slope(y[i] - sol.eta_star);
        for (std::size_t j = 0; j < d; ++j)
          grad(i, j) = space.weight(i) * (vi * u.weight()[j] - g(i, j));
      }
      RandomVector cand = f + step * grad;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) cand(i, j) = std::clamp(cand(i, j), -B, B);
      const double cv = value_of(cand);
      if (cv > cur) {
        f = cand;
        cur = cv;
        step *= 1.3;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, cur);
  }
  PenaltyValue out;
  out.value = best;
  out.method = "supremum-over-f";
  out.box = B;
  return out;
}

struct DualSearchOptions {
  int grid = 48;           // simplex grid resolution (used for n <= 4)
  int polish_iters = 800;  // multiplicative-weights polish iterations
  int restarts = 2;
  std::uint64_t seed = 777;
};

namespace detail {

/// Objective of the dual search at scalar masses m on the probability
/// simplex (m_i = mu_i q_i): -sum m_i y_i - alpha(q).
inline double dual_objective(const FiniteMeasureSpace& space, const std::vector<double>& y,
                             const Utility& u, const std::vector<double>& m) {
  double lin = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) lin -= m[i] * y[i];
  switch (u.kind()) {
    case CoreKind::exponential: {
      double kl = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > 0.0) kl += m[i] * std::log(m[i] / space.weight(i));
      return lin - kl / u.gamma();
    }
    case CoreKind::cvar:
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > space.weight(i) / (1.0 - u.alpha()) + 1e-12)
          return -std::numeric_limits<double>::infinity();
      return lin;
    case CoreKind::piecewise_linear:
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] > u.slope_neg() * space.weight(i) + 1e-12)
          return -std::numeric_limits<double>::infinity();
        if (m[i] < u.slope_pos() * space.weight(i) - 1e-12)
          return -std::numeric_limits<double>::infinity();
      }
      return lin;
  }
  return -std::numeric_limits<double>::infinity();
}

/// Exact maximizer of -sum m_i y_i over the box-capped simplex
/// lo_i <= m_i <= hi_i, sum m_i = 1: fill the cheapest outcomes first.
inline std::vector<double> capped_simplex_argmax(const std::vector<double>& y,
                                                 const std::vector<double>& lo,
                                                 const std::vector<double>& hi) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  std::vector<double> m = lo;
  double remaining = 1.0 - std::accumulate(lo.begin(), lo.end(), 0.0);
  for (std::size_t k = 0; k < n && remaining > 0.0; ++k) {
    const std::size_t i = order[k];
    const double take = std::min(remaining, hi[i] - lo[i]);
    m[i] += take;
    remaining -= take;
  }
  return m;
}

template <class F>
void for_each_composition(std::size_t n, int total, std::vector<int>& scratch, std::size_t pos,
                          F&& fn) {
  if (pos + 1 == n) {
    scratch[pos] = total;
    fn(scratch);
    return;
  }
  for (int j = 0; j <= total; ++j) {
    scratch[pos] = j;
    for_each_composition(n, total - j, scratch, pos + 1, fn);
  }
}

/// Grid + multiplicative-weights ascent for the entropic dual objective
/// over the block [members] of outcomes with conditional reference weights.
/// Returns the best masses found (summing to 1 across the block).
inline std::vector<double> entropic_dual_search(const std::vector<double>& mu,
                                                const std::vector<double>& y, double gamma,
                                                const DualSearchOptions& opts) {
  const std::size_t n = mu.size();
  const auto objective = [&](const std::vector<double>& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v -= m[i] * y[i];
      if (m[i] > 0.0) v -= m[i] * std::log(m[i] / mu[i]) / gamma;
    }
    return v;
  };

  std::vector<double> best = mu;  // reference point, penalty zero
  double best_val = objective(best);

  if (n <= 4 && opts.grid >= 2) {
    std::vector<int> scratch(n);
    for_each_composition(n, opts.grid, scratch, 0, [&](const std::vector<int>& comp) {
      std::vector<double> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<double>(comp[i]) / opts.grid;
      const double v = objective(m);
      if (v > best_val) {
        best_val = v;
        best = m;
      }
    });
  }

  // Multiplicative-weights polish: stays interior, climbs the smooth
  // strictly concave objective. Gradient: -y_i - (ln(m_i/mu_i) + 1)/gamma.
  Rng rng(opts.seed);
  for (int r = 0; r <= opts.restarts; ++r) {
    std::vector<double> m(n);
    if (r == 0) {
      for (std::size_t i = 0; i < n; ++i) m[i] = 0.9 * best[i] + 0.1 * mu[i];
    } else {
      double s = 0.0;
      for (auto& mi : m) s += (mi = 0.05 + rng.uniform());
      for (auto& mi : m) mi /= s;
    }
    double cur = objective(m);
    double step = 0.5;
    for (int it = 0; it < opts.polish_iters && step > 1e-14; ++it) {
      std::vector<double> cand(n);
      double z = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double grad = -y[i] - (std::log(std::max(m[i], 1e-300) / mu[i]) + 1.0) / gamma;
        cand[i] = m[i] * std::exp(step * grad);
        z += cand[i];
      }
      for (auto& ci : cand) ci /= z;
      const double cv = objective(cand);
      if (cv > cur) {
        m = cand;
        cur = cv;
        step *= 1.2;
      } else {
        step *= 0.5;
      }
    }
    if (cur > best_val) {
      best_val = cur;
      best = m;
    }
  }
  return best;
}

}  // namespace detail

struct DualValueResult {
  double value = 0.0;
  DualDensity argmax;
  const char* method = "";
};

/// The robust-representation value sup over feasible densities of
/// { <g, -f> - alpha_min(g) }, searched over scalar densities along the
/// utility weight (the finite-penalty slice; everything else pays an
/// infinite penalty and cannot contribute). Exponential cores get a simplex
/// grid plus multiplicative-weights polish; the piecewise families reduce
/// to an exact capped-simplex linear program.
inline DualValueResult dual_value(const FiniteMeasureSpace& space, const OrderedSpace& E,
                                  const RandomVector& f, const Utility& u,
                                  const DualSearchOptions& opts = {}) {
  u.validate(E);
  if (f.outcomes() != space.size())
    throw std::invalid_argument("dual_value: measure space size mismatch");
  const std::vector<double> y = u.scalarize_all(f);
  const std::size_t n = space.size();
  std::vector<double> m;
  const char* method = "";
  switch (u.kind()) {
    case CoreKind::exponential:
      m = detail::entropic_dual_search(space.weights(), y, u.gamma(), opts);
      method = n <= 4 ? "grid+ascent" : "ascent";
      break;
    case CoreKind::cvar: {
      std::vector<double> lo(n, 0.0), hi(n);
      for (std::size_t i = 0; i < n; ++i) hi[i] = space.weight(i) / (1.0 - u.alpha());
      m = detail::capped_simplex_argmax(y, lo, hi);
      method = "vertex-enumeration";
      break;
    }
    case CoreKind::piecewise_linear: {
      std::vector<double> lo(n), hi(n);
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = u.slope_pos() * space.weight(i);
        hi[i] = u.slope_neg() * space.weight(i);
      }
      m = detail::capped_simplex_argmax(y, lo, hi);
      method = "vertex-enumeration";
      break;
    }
  }
  DualValueResult out{detail::dual_objective(space, y, u, m), RandomVector(n, E.dim()), method};
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = m[i] / space.weight(i);
  out.argmax = density_from_scalar(q, u.weight());
  return out;
}

struct DualCheckReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  DualDensity argmax{1, 1};
  const char* method = "";
};

/// Primal risk vs. dual supremum side by side.
inline DualCheckReport dual_check(const FiniteMeasureSpace& space, const OrderedSpace& E,
                                  const RandomVector& f, const Utility& u,
                                  const DualSearchOptions& opts = {}) {
  DualCheckReport r;
  r.primal = rho(space, E, f, u);
  auto dv = dual_value(space, E, f, u, opts);
  r.dual = dv.value;
  r.gap = std::abs(r.primal - r.dual);
  r.argmax = std::move(dv.argmax);
  r.method = dv.method;
  return r;
}

/// Membership in the acceptance set: rho(f) <= tol.
inline bool acceptance_test(const FiniteMeasureSpace& space, const OrderedSpace& E,
                            const RandomVector& f, const Utility& u, double tol = 1e-8) {
  return rho(space, E, f, u) <= tol;
}

/// Falsification test for membership of g in the polar cone of the
/// acceptance set: hunts for an accepted f with <g, f> < -tol, first along
/// directed rays through any negative density coordinate, then by seeded
/// sampling of boundary and interior members. Returning true means no
/// counterexample was found, not a proof.
inline bool polar_cone_test(const FiniteMeasureSpace& space, const OrderedSpace& E,
                            const DualDensity& g, const Utility& u, int samples = 1000,
                            std::uint64_t seed = 99, double tol = 1e-8) {
  u.validate(E);
  const std::size_t n = space.size(), d = E.dim();
  const RandomVector z = RandomVector::constant(n, E.numeraire());
  const auto accepted_shift = [&](const RandomVector& f) {
    return f + rho(space, E, f, u) * z;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (g(i, j) < -tol)
        for (double t : {1.0, 10.0, 100.0}) {
          RandomVector f(n, d);
          f(i, j) = t;
          if (pairing(space, g, accepted_shift(f)) < -tol) return false;
        }
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    RandomVector f(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-3.0, 3.0);
    RandomVector member = accepted_shift(f);
    if (s % 3 == 1) member += rng.uniform(0.0, 2.0) * z;
    if (pairing(space, g, member) < -tol) return false;
  }
  return true;
}

}  // namespace vexrisk
