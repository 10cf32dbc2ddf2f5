#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vexrisk {

inline constexpr double kWeightSumSlack = 1e-9;

/// A finite probability space: outcome labels with strictly positive
/// weights. Weights whose sum drifts from one by serialization round-off
/// (within kWeightSumSlack) are renormalized; anything further off is
/// rejected, as are nonpositive weights.
class FiniteMeasureSpace {
public:
  FiniteMeasureSpace(std::vector<std::string> labels, std::vector<double> weights)
      : labels_(std::move(labels)), weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("measure space needs at least one outcome");
    if (labels_.size() != weights_.size())
      throw std::invalid_argument("label/weight count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
        throw std::invalid_argument("outcome '" + labels_[i] + "': weight must be strictly positive");
      sum += weights_[i];
    }
    if (std::abs(sum - 1.0) > kWeightSumSlack)
      throw std::invalid_argument("weights sum to " + std::to_string(sum) + ", expected 1");
    for (auto& w : weights_) w /= sum;
  }

  static FiniteMeasureSpace uniform(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "w" + std::to_string(i);
    return FiniteMeasureSpace(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static FiniteMeasureSpace with_weights(std::vector<double> weights) {
    std::vector<std::string> labels(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) labels[i] = "w" + std::to_string(i);
    return FiniteMeasureSpace(std::move(labels), std::move(weights));
  }

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }

private:
  std::vector<std::string> labels_;
  std::vector<double> weights_;
};

/// One cell of a partition at a given filtration level.
struct Atom {
  int level = 0;
  std::vector<std::size_t> members;
  double mass = 0.0;
};

/// Information structure stored as refining partitions of the outcome index
/// set: level 0 is the single full atom, each level refines the previous,
/// and the last level is the partition into singletons.
class Filtration {
public:
  using Partition = std::vector<std::vector<std::size_t>>;

  Filtration(std::size_t n, std::vector<Partition> levels)
      : n_(n), levels_(std::move(levels)) {
    if (n_ == 0) throw std::invalid_argument("filtration over empty outcome set");
    if (levels_.empty()) throw std::invalid_argument("filtration needs at least one level");
    atom_of_.resize(levels_.size());
    for (std::size_t t = 0; t < levels_.size(); ++t) {
      auto& part = levels_[t];
      if (part.empty()) throw std::invalid_argument("level " + std::to_string(t) + ": empty partition");
      atom_of_[t].assign(n_, npos());
      for (std::size_t a = 0; a < part.size(); ++a) {
        if (part[a].empty())
          throw std::invalid_argument("level " + std::to_string(t) + ": empty atom");
        std::sort(part[a].begin(), part[a].end());
        for (std::size_t idx : part[a]) {
          if (idx >= n_)
            throw std::invalid_argument("level " + std::to_string(t) + ": outcome index out of range");
          if (atom_of_[t][idx] != npos())
            throw std::invalid_argument("level " + std::to_string(t) + ": outcome " +
                                        std::to_string(idx) + " appears in two atoms");
          atom_of_[t][idx] = a;
        }
      }
      for (std::size_t idx = 0; idx < n_; ++idx)
        if (atom_of_[t][idx] == npos())
          throw std::invalid_argument("level " + std::to_string(t) + ": outcome " +
                                      std::to_string(idx) + " missing from partition");
    }
    if (levels_.front().size() != 1)
      throw std::invalid_argument("level 0 must be the single full atom");
    if (levels_.back().size() != n_)
      throw std::invalid_argument("last level must split into singletons");
    // refinement: every atom at t+1 sits inside one atom at t
    for (std::size_t t = 0; t + 1 < levels_.size(); ++t) {
      for (const auto& atom : levels_[t + 1]) {
        const std::size_t parent = atom_of_[t][atom.front()];
        for (std::size_t idx : atom)
          if (atom_of_[t][idx] != parent)
            throw std::invalid_argument("level " + std::to_string(t + 1) +
                                        ": atom straddles two atoms of the previous level");
      }
    }
  }

  /// The coarsest admissible filtration: {all outcomes} then singletons.
  static Filtration trivial(std::size_t n) {
    std::vector<Partition> levels;
    Partition all(1);
    for (std::size_t i = 0; i < n; ++i) all[0].push_back(i);
    levels.push_back(all);
    if (n > 1) {
      Partition singles(n);
      for (std::size_t i = 0; i < n; ++i) singles[i] = {i};
      levels.push_back(std::move(singles));
    }
    return Filtration(n, std::move(levels));
  }

  int horizon() const { return static_cast<int>(levels_.size()) - 1; }
  std::size_t outcomes() const { return n_; }
  const std::vector<Partition>& levels() const { return levels_; }

  const Partition& partition(int t) const {
    check_level(t);
    return levels_[static_cast<std::size_t>(t)];
  }

  std::size_t atom_index(int t, std::size_t outcome) const {
    check_level(t);
    return atom_of_[static_cast<std::size_t>(t)][outcome];
  }

  std::vector<Atom> atoms_at(const FiniteMeasureSpace& space, int t) const {
    check_level(t);
    if (space.size() != n_) throw std::invalid_argument("measure space size mismatch");
    std::vector<Atom> out;
    out.reserve(partition(t).size());
    for (const auto& members : partition(t)) {
      Atom a;
      a.level = t;
      a.members = members;
      for (std::size_t idx : members) a.mass += space.weight(idx);
      out.push_back(std::move(a));
    }
    return out;
  }

private:
  static std::size_t npos() { return static_cast<std::size_t>(-1); }

  void check_level(int t) const {
    if (t < 0 || t > horizon())
      throw std::out_of_range("filtration level " + std::to_string(t) + " out of range [0, " +
                              std::to_string(horizon()) + "]");
  }

  std::size_t n_;
  std::vector<Partition> levels_;
  std::vector<std::vector<std::size_t>> atom_of_;
};

/// E[x | F_t] as a function on outcomes, constant on every level-t atom.
inline std::vector<double> conditional_expectation(const FiniteMeasureSpace& space,
                                                   const Filtration& filt,
                                                   const std::vector<double>& x, int t) {
  if (x.size() != space.size()) throw std::invalid_argument("function not defined on all outcomes");
  if (space.size() != filt.outcomes()) throw std::invalid_argument("measure space size mismatch");
  std::vector<double> out(x.size());
  for (const auto& members : filt.partition(t)) {
    double mass = 0.0, acc = 0.0;
    for (std::size_t i : members) {
      mass += space.weight(i);
      acc += space.weight(i) * x[i];
    }
    const double avg = acc / mass;
    for (std::size_t i : members) out[i] = avg;
  }
  return out;
}

/// Per-atom averages in partition order (the compact form of the above).
inline std::vector<double> atom_averages(const FiniteMeasureSpace& space, const Filtration& filt,
                                         const std::vector<double>& x, int t) {
  if (x.size() != space.size()) throw std::invalid_argument("function not defined on all outcomes");
  std::vector<double> out;
  out.reserve(filt.partition(t).size());
  for (const auto& members : filt.partition(t)) {
    double mass = 0.0, acc = 0.0;
    for (std::size_t i : members) {
      mass += space.weight(i);
      acc += space.weight(i) * x[i];
    }
    out.push_back(acc / mass);
  }
  return out;
}

/// Tower property check: E[E[x|F_t] | F_s] == E[x|F_s] for s <= t.
inline bool tower_check(const FiniteMeasureSpace& space, const Filtration& filt,
                        const std::vector<double>& x, int s, int t, double tol = 1e-10) {
  if (s > t) throw std::invalid_argument("tower check needs s <= t");
  const auto inner = conditional_expectation(space, filt, x, t);
  const auto lhs = conditional_expectation(space, filt, inner, s);
  const auto rhs = conditional_expectation(space, filt, x, s);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (std::abs(lhs[i] - rhs[i]) > tol) return false;
  return true;
}

}  // namespace vexrisk
