#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vexrisk/ordered.hpp"
#include "vexrisk/space.hpp"

namespace vexrisk {

/// Per-outcome exponent p(w) on the strict reflexive range 1 < p < inf,
/// with the pointwise conjugate p' = p / (p - 1).
class ExponentFunction {
public:
  explicit ExponentFunction(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw std::invalid_argument("exponent function needs at least one outcome");
    p_min_ = p_max_ = p_[0];
    for (double pi : p_) {
      if (!(pi > 1.0) || !std::isfinite(pi))
        throw std::invalid_argument("exponent at boundary: need 1 < p < inf");
      p_min_ = std::min(p_min_, pi);
      p_max_ = std::max(p_max_, pi);
    }
  }

  static ExponentFunction constant(std::size_t n, double q) {
    return ExponentFunction(std::vector<double>(n, q));
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }

  /// Pointwise dual exponent: 1/p + 1/p' = 1.
  ExponentFunction dual() const {
    std::vector<double> q(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) q[i] = p_[i] / (p_[i] - 1.0);
    return ExponentFunction(std::move(q));
  }

private:
  std::vector<double> p_;
  double p_min_ = 0.0, p_max_ = 0.0;
};

/// The power modular sum_i mu_i |f_i|^{p_i}, |.| the Euclidean norm on E.
inline double modular(const FiniteMeasureSpace& space, const RandomVector& f,
                      const ExponentFunction& p) {
  if (f.outcomes() != space.size() || p.size() != space.size())
    throw std::invalid_argument("modular: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.outcomes(); ++i)
    acc += space.weight(i) * std::pow(f.row_norm(i), p[i]);
  return acc;
}

/// Luxemburg norm inf{lambda > 0 : modular(f / lambda) <= 1} by bisection.
/// The modular is strictly decreasing in lambda for f != 0 and the bracket
/// [0, max_i |f_i|] always contains the root on a probability space (at the
/// upper end every term is at most mu_i). The bracket is shrunk past the
/// requested tol toward machine precision; 200 iterations cap the loop.
inline double luxemburg_norm(const FiniteMeasureSpace& space, const RandomVector& f,
                             const ExponentFunction& p, double tol = 1e-10) {
  if (!(tol > 0.0)) throw std::invalid_argument("luxemburg_norm: tol must be positive");
  if (f.outcomes() != space.size() || p.size() != space.size())
    throw std::invalid_argument("luxemburg_norm: shape mismatch");
  double hi = f.max_row_norm();
  if (hi == 0.0) return 0.0;
  const double width_floor = std::min(tol, 1e-14 * hi);
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > width_floor; ++it) {
    const double mid = 0.5 * (lo + hi);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.outcomes(); ++i)
      acc += space.weight(i) * std::pow(f.row_norm(i) / mid, p[i]);
    if (acc <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Slack in the variable-exponent Holder bound |<g, f>| <= 2 |f|_p |g|_p'.
/// The constant 2 is valid for every admissible exponent; the result is
/// nonnegative up to round-off on all inputs.
inline double holder_gap(const FiniteMeasureSpace& space, const RandomVector& f,
                         const DualDensity& g, const ExponentFunction& p, double tol = 1e-10) {
  const double nf = luxemburg_norm(space, f, p, tol);
  const double ng = luxemburg_norm(space, g, p.dual(), tol);
  return 2.0 * nf * ng - std::abs(pairing(space, g, f));
}

}  // namespace vexrisk
