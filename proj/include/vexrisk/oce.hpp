#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexrisk/ordered.hpp"
#include "vexrisk/space.hpp"

namespace vexrisk {

enum class CoreKind { exponential, cvar, piecewise_linear };

inline const char* core_name(CoreKind k) {
  switch (k) {
    case CoreKind::exponential: return "exponential";
    case CoreKind::cvar: return "cvar";
    case CoreKind::piecewise_linear: return "piecewise-linear";
  }
  return "?";
}

/// A utility on the value space, realized as a concave nondecreasing scalar
/// core v (normalized: v(0) = 0, slopes straddling 1 at the origin) composed
/// with a dual-cone weight w, u(x) = v(<w, x>). The weight must satisfy
/// <w, z> = 1 so that cash translations along the numeraire shift the
/// scalarized payoff one-for-one.
class Utility {
public:
  static Utility exponential(double gamma, std::vector<double> weight) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("exponential core: rate must be positive");
    return Utility(CoreKind::exponential, gamma, 0.0, std::move(weight));
  }

  static Utility cvar(double alpha, std::vector<double> weight) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("cvar core: level must lie in (0, 1)");
    return Utility(CoreKind::cvar, alpha, 0.0, std::move(weight));
  }

  static Utility piecewise_linear(double a, double b, std::vector<double> weight) {
    if (!(a >= 1.0) || !(b >= 0.0) || !(b <= 1.0) || !std::isfinite(a))
      throw std::invalid_argument("piecewise-linear core: need slopes a >= 1 >= b >= 0");
    return Utility(CoreKind::piecewise_linear, a, b, std::move(weight));
  }

  CoreKind kind() const { return kind_; }
  double gamma() const { return pa_; }
  double alpha() const { return pa_; }
  double slope_neg() const {
    switch (kind_) {
      case CoreKind::exponential: return std::numeric_limits<double>::quiet_NaN();
      case CoreKind::cvar: return 1.0 / (1.0 - pa_);
      case CoreKind::piecewise_linear: return pa_;
    }
    return 0.0;
  }
  double slope_pos() const { return kind_ == CoreKind::piecewise_linear ? pb_ : 0.0; }
  const std::vector<double>& weight() const { return weight_; }
  bool smooth() const { return kind_ == CoreKind::exponential; }
  bool positively_homogeneous() const { return kind_ != CoreKind::exponential; }
  bool invertible_core() const { return kind_ == CoreKind::exponential; }

  double core(double t) const {
    switch (kind_) {
      case CoreKind::exponential: return -std::expm1(-pa_ * t) / pa_;
      case CoreKind::cvar: return t < 0.0 ? t / (1.0 - pa_) : 0.0;
      case CoreKind::piecewise_linear: return t < 0.0 ? pa_ * t : pb_ * t;
    }
    return 0.0;
  }

  double inverse_core(double s) const {
    if (!invertible_core())
      throw std::domain_error(std::string("core '") + core_name(kind_) +
                              "' has flat regions and no inverse");
    // v(t) = (1 - exp(-gamma t)) / gamma  =>  t = -log(1 - gamma s) / gamma
    const double arg = -pa_ * s;
    if (arg <= -1.0) throw std::domain_error("value outside the range of the exponential core");
    return -std::log1p(arg) / pa_;
  }

  /// <w, x> for one outcome row.
  double scalarize(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < weight_.size(); ++j) acc += weight_[j] * x[j];
    return acc;
  }

  std::vector<double> scalarize_all(const RandomVector& f) const {
    if (f.dim() != weight_.size()) throw std::invalid_argument("utility weight dimension mismatch");
    std::vector<double> y(f.outcomes());
    for (std::size_t i = 0; i < f.outcomes(); ++i) y[i] = scalarize(f.row(i));
    return y;
  }

  /// Checks the weight against the ordered space: w in the dual cone with
  /// <w, z> = 1 (within slack, mirroring the probability-weight policy).
  void validate(const OrderedSpace& E) const {
    if (weight_.size() != E.dim()) throw std::invalid_argument("utility weight dimension mismatch");
    double wz = 0.0;
    for (std::size_t j = 0; j < weight_.size(); ++j) {
      if (weight_[j] < 0.0)
        throw std::invalid_argument("utility weight must lie in the dual cone (w >= 0)");
      wz += weight_[j] * E.numeraire()[j];
    }
    if (std::abs(wz - 1.0) > kWeightSumSlack)
      throw std::invalid_argument("utility weight pairing <w, z> = " + std::to_string(wz) +
                                  ", expected 1");
  }

private:
  Utility(CoreKind kind, double pa, double pb, std::vector<double> weight)
      : kind_(kind), pa_(pa), pb_(pb), weight_(std::move(weight)) {
    if (weight_.empty()) throw std::invalid_argument("utility weight must be nonempty");
    for (double wj : weight_)
      if (!std::isfinite(wj)) throw std::invalid_argument("utility weight must be finite");
  }

  CoreKind kind_;
  double pa_, pb_;
  std::vector<double> weight_;
};

struct OceResult {
  double value = 0.0;
  double eta_star = 0.0;
  int iterations = 0;
  const char* method = "";
};

namespace detail {

struct LineMax {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
LineMax golden_max(F&& f, double lo, double hi, double xtol, int max_iter = 300) {
  const double invphi = 0.6180339887498949;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (hi - lo > xtol && it < max_iter) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
    ++it;
  }
  LineMax out;
  out.x = fc >= fd ? c : d;
  out.value = std::max(fc, fd);
  out.iterations = it;
  return out;
}

/// One-dimensional certainty-equivalent problem on plain scalars:
/// sup_eta { eta + sum_i w_i v(y_i - eta) } for probability weights w.
/// Since the core slopes straddle 1 the objective is nonincreasing past
/// max y and nondecreasing before min y, so the padded bracket
/// [min y - 1, max y + 1] always contains the supremum. Smooth cores use
/// golden-section search; piecewise-linear cores attain the supremum at a
/// breakpoint y_i, so those are enumerated and the best surrounding
/// bracket refined.
inline OceResult scalar_oce(const std::vector<double>& weights, const std::vector<double>& y,
                            const Utility& u, double tol = 1e-8) {
  if (!(tol > 0.0)) throw std::invalid_argument("oce: tol must be positive");
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double lo = *mn - 1.0, hi = *mx + 1.0;

  const auto objective = [&](double eta) {
    double acc = eta;
    for (std::size_t i = 0; i < y.size(); ++i) acc += weights[i] * u.core(y[i] - eta);
    return acc;
  };

  const double xtol = std::max(1e-11, std::min(tol, 1e-6));
  OceResult out;
  if (u.smooth()) {
    const auto m = golden_max(objective, lo, hi, xtol);
    out.value = m.value;
    out.eta_star = m.x;
    out.iterations = m.iterations;
    out.method = "golden-section";
    return out;
  }

  std::vector<double> candidates = y;
  candidates.push_back(lo);
  candidates.push_back(hi);
  std::sort(candidates.begin(), candidates.end());
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double v = objective(candidates[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  const double left = candidates[best == 0 ? 0 : best - 1];
  const double right = candidates[std::min(best + 1, candidates.size() - 1)];
  const auto m = golden_max(objective, left, right, xtol);
  out.value = std::max(best_val, m.value);
  out.eta_star = m.value > best_val ? m.x : candidates[best];
  out.iterations = m.iterations + static_cast<int>(candidates.size());
  out.method = "breakpoint-enumeration";
  return out;
}

}  // namespace detail

/// The optimized certainty equivalent sup_eta { eta + E v(Y - eta) } with
/// the scalarized payoff Y = <w, f>.
inline OceResult oce(const FiniteMeasureSpace& space, const OrderedSpace& E,
                     const RandomVector& f, const Utility& u, double tol = 1e-8) {
  if (f.outcomes() != space.size()) throw std::invalid_argument("oce: measure space size mismatch");
  u.validate(E);
  return detail::scalar_oce(space.weights(), u.scalarize_all(f), u, tol);
}

/// The induced convex risk measure rho(f) = -S_u(f).
inline double rho(const FiniteMeasureSpace& space, const OrderedSpace& E, const RandomVector& f,
                  const Utility& u, double tol = 1e-8) {
  return -oce(space, E, f, u, tol).value;
}

/// Certainty equivalent v^{-1}(E v(Y)). Defined only for strictly
/// increasing cores (the exponential family); flat cores are rejected.
inline double certainty_equivalent(const FiniteMeasureSpace& space, const OrderedSpace& E,
                                   const RandomVector& f, const Utility& u) {
  if (f.outcomes() != space.size())
    throw std::invalid_argument("certainty_equivalent: measure space size mismatch");
  u.validate(E);
  const std::vector<double> y = u.scalarize_all(f);
  double ev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ev += space.weight(i) * u.core(y[i]);
  return u.inverse_core(ev);
}

struct SsdReport {
  double su_diff = 0.0;
  double cu_diff = 0.0;
  int su_order = 0;  // sign of S_u(f1) - S_u(f2), 0 when within tol
  int cu_order = 0;
};

/// Orders two payoffs by optimized certainty equivalent and by plain
/// certainty equivalent. For an admissible core with attained supremum the
/// two orderings agree whenever both differences exceed tol.
inline SsdReport ssd_compare(const FiniteMeasureSpace& space, const OrderedSpace& E,
                             const RandomVector& f1, const RandomVector& f2, const Utility& u,
                             double tol = 1e-8) {
  SsdReport r;
  r.su_diff = oce(space, E, f1, u, tol).value - oce(space, E, f2, u, tol).value;
  r.cu_diff = certainty_equivalent(space, E, f1, u) - certainty_equivalent(space, E, f2, u);
  const auto sgn = [tol](double x) { return x > tol ? 1 : (x < -tol ? -1 : 0); };
  r.su_order = sgn(r.su_diff);
  r.cu_order = sgn(r.cu_diff);
  return r;
}

/// Sub-homogeneity slack: a S_u(f) - S_u(a f) for a > 1 and
/// S_u(a f) - a S_u(f) for 0 <= a <= 1; nonnegative up to solver error.
inline double subhomogeneity_gap(const FiniteMeasureSpace& space, const OrderedSpace& E,
                                 const RandomVector& f, const Utility& u, double a,
                                 double tol = 1e-8) {
  if (a < 0.0) throw std::invalid_argument("subhomogeneity_gap: scale must be nonnegative");
  const double s1 = oce(space, E, f, u, tol).value;
  const double sa = oce(space, E, a * f, u, tol).value;
  return a > 1.0 ? a * s1 - sa : sa - a * s1;
}

}  // namespace vexrisk
