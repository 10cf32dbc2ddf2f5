#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vexrisk/space.hpp"

namespace vexrisk {

inline constexpr double kOrderTol = 1e-12;
inline constexpr double kFeasibilityTol = 1e-10;

/// The value space: d-dimensional reals ordered by the nonnegative orthant,
/// with a strictly positive numeraire (an interior point of the cone).
class OrderedSpace {
public:
  OrderedSpace(std::size_t dim, std::vector<double> numeraire)
      : dim_(dim), numeraire_(std::move(numeraire)) {
    if (dim_ == 0) throw std::invalid_argument("ordered space needs dimension >= 1");
    if (numeraire_.size() != dim_) throw std::invalid_argument("numeraire dimension mismatch");
    for (double zi : numeraire_)
      if (!(zi > 0.0) || !std::isfinite(zi))
        throw std::invalid_argument("numeraire must be strictly positive in every coordinate");
  }

  /// Numeraire = all-ones.
  static OrderedSpace unit(std::size_t dim) {
    return OrderedSpace(dim, std::vector<double>(dim, 1.0));
  }

  std::size_t dim() const { return dim_; }
  const std::vector<double>& numeraire() const { return numeraire_; }

private:
  std::size_t dim_;
  std::vector<double> numeraire_;
};

/// One value-space vector per outcome, stored dense row-major (n x d).
/// Dual densities share this representation: the dual cone of the orthant
/// is the orthant, so a density is again one d-vector per outcome.
class RandomVector {
public:
  RandomVector(std::size_t outcomes, std::size_t dim, double fill = 0.0)
      : n_(outcomes), d_(dim), v_(outcomes * dim, fill) {
    if (n_ == 0 || d_ == 0) throw std::invalid_argument("random vector needs n >= 1, d >= 1");
  }

  RandomVector(std::size_t outcomes, std::size_t dim, std::vector<double> values)
      : n_(outcomes), d_(dim), v_(std::move(values)) {
    if (n_ == 0 || d_ == 0) throw std::invalid_argument("random vector needs n >= 1, d >= 1");
    if (v_.size() != n_ * d_) throw std::invalid_argument("value count mismatch");
    for (double x : v_)
      if (!std::isfinite(x)) throw std::invalid_argument("random vector entries must be finite");
  }

  /// Broadcast one value-space vector to every outcome.
  static RandomVector constant(std::size_t outcomes, const std::vector<double>& e) {
    RandomVector f(outcomes, e.size());
    for (std::size_t i = 0; i < outcomes; ++i)
      for (std::size_t j = 0; j < e.size(); ++j) f(i, j) = e[j];
    return f;
  }

  /// Scalar-per-outcome multiples of a direction: f_i = c_i * e.
  static RandomVector scaled(const std::vector<double>& c, const std::vector<double>& e) {
    RandomVector f(c.size(), e.size());
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < e.size(); ++j) f(i, j) = c[i] * e[j];
    return f;
  }

  std::size_t outcomes() const { return n_; }
  std::size_t dim() const { return d_; }

  double operator()(std::size_t i, std::size_t j) const { return v_[i * d_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * d_ + j]; }

  std::span<const double> row(std::size_t i) const { return {v_.data() + i * d_, d_}; }

  double row_norm(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += v_[i * d_ + j] * v_[i * d_ + j];
    return std::sqrt(s);
  }

  double max_row_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) m = std::max(m, row_norm(i));
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  const std::vector<double>& data() const { return v_; }

  RandomVector& operator+=(const RandomVector& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  RandomVector& operator-=(const RandomVector& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  RandomVector& operator*=(double c) {
    for (auto& x : v_) x *= c;
    return *this;
  }

  friend RandomVector operator+(RandomVector a, const RandomVector& b) { return a += b; }
  friend RandomVector operator-(RandomVector a, const RandomVector& b) { return a -= b; }
  friend RandomVector operator*(double c, RandomVector a) { return a *= c; }

  void require_same_shape(const RandomVector& o) const {
    if (n_ != o.n_ || d_ != o.d_) throw std::invalid_argument("random vector shape mismatch");
  }

private:
  std::size_t n_, d_;
  std::vector<double> v_;
};

using DualDensity = RandomVector;

/// Partial order induced by the orthant cone: f1 <= f2 iff f2 - f1 is
/// coordinatewise nonnegative at every outcome (up to tol).
inline bool cone_leq(const RandomVector& f1, const RandomVector& f2, double tol = kOrderTol) {
  f1.require_same_shape(f2);
  for (std::size_t i = 0; i < f1.outcomes(); ++i)
    for (std::size_t j = 0; j < f1.dim(); ++j)
      if (f2(i, j) - f1(i, j) < -tol) return false;
  return true;
}

/// The bilinear pairing sum_i mu_i <h_i, f_i> between a density and a payoff.
inline double pairing(const FiniteMeasureSpace& space, const DualDensity& g,
                      const RandomVector& f) {
  g.require_same_shape(f);
  if (g.outcomes() != space.size()) throw std::invalid_argument("measure space size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.outcomes(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < g.dim(); ++j) dot += g(i, j) * f(i, j);
    acc += space.weight(i) * dot;
  }
  return acc;
}

/// Per-outcome scalar projections of a density onto the numeraire,
/// q_i = <h_i, z>.
inline std::vector<double> numeraire_mass(const DualDensity& g, const OrderedSpace& E) {
  if (g.dim() != E.dim()) throw std::invalid_argument("density dimension mismatch");
  std::vector<double> q(g.outcomes());
  for (std::size_t i = 0; i < g.outcomes(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < g.dim(); ++j) dot += g(i, j) * E.numeraire()[j];
    q[i] = dot;
  }
  return q;
}

/// Pointwise feasibility: h(w) in the dual cone and <h(w), z> = 1 at every
/// single outcome. This is the strictest normalization; level-dependent
/// variants live with the dual machinery.
inline bool dual_feasible_pointwise(const DualDensity& g, const OrderedSpace& E,
                                    double tol = kFeasibilityTol) {
  if (g.dim() != E.dim()) throw std::invalid_argument("density dimension mismatch");
  for (std::size_t i = 0; i < g.outcomes(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j)
      if (g(i, j) < -tol) return false;
  for (double qi : numeraire_mass(g, E))
    if (std::abs(qi - 1.0) > tol) return false;
  return true;
}

}  // namespace vexrisk
