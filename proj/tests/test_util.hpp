#pragma once

#include "vexrisk/random.hpp"
#include "vexrisk/space.hpp"
#include "vexrisk/ordered.hpp"

namespace testutil {

inline vexrisk::RandomVector random_payoff(vexrisk::Rng& rng, std::size_t n, std::size_t d,
                                           double range = 3.0) {
  vexrisk::RandomVector f(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) f(i, j) = rng.uniform(-range, range);
  return f;
}

/// A random refining chain of partitions over n outcomes: each level splits
/// every atom of the previous one at random cut points, ending in
/// singletons.
inline vexrisk::Filtration random_filtration(vexrisk::Rng& rng, std::size_t n) {
  using Partition = vexrisk::Filtration::Partition;
  std::vector<Partition> levels;
  Partition current(1);
  for (std::size_t i = 0; i < n; ++i) current[0].push_back(i);
  levels.push_back(current);
  while (current.size() < n) {
    Partition next;
    for (const auto& atom : current) {
      if (atom.size() == 1 || (atom.size() > 1 && rng.uniform() < 0.25)) {
        next.push_back(atom);
        continue;
      }
      const std::size_t cut = 1 + static_cast<std::size_t>(
                                      rng.uniform_int(0, static_cast<int>(atom.size()) - 2));
      next.emplace_back(atom.begin(), atom.begin() + cut);
      next.emplace_back(atom.begin() + cut, atom.end());
    }
    if (next.size() == current.size()) continue;  // no split happened, redraw
    levels.push_back(next);
    current = next;
  }
  if (levels.size() == 1 && n > 1) {
    Partition singles(n);
    for (std::size_t i = 0; i < n; ++i) singles[i] = {i};
    levels.push_back(singles);
  }
  return vexrisk::Filtration(n, levels);
}

}  // namespace testutil
