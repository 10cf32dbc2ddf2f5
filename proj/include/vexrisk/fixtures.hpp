#pragma once

#include "vexrisk/scenario.hpp"

namespace vexrisk::fixtures {

/// Smallest admissible document: one outcome, scalar values, horizon 0.
inline ScenarioDocument minimal() {
  ScenarioDocument doc;
  doc.name = "minimal";
  doc.dimension = 1;
  doc.numeraire = {1.0};
  doc.labels = {"w0"};
  doc.weights = {1.0};
  doc.exponents = {2.0};
  doc.payoffs["f"] = {{5.0}};
  UtilitySpec u;
  u.family = "exponential";
  u.rate = 1.0;
  u.weight = {1.0};
  doc.utilities["entropic"] = u;
  return doc;
}

/// Two equally likely outcomes, scalar values, the workhorse for the
/// closed-form exponential-core and cvar checks. Payoff f = (0, 1);
/// payoff g = (2, 1) pairs with exponents (2, 4) for the analytic norm.
inline ScenarioDocument twopoint() {
  ScenarioDocument doc;
  doc.name = "twopoint";
  doc.dimension = 1;
  doc.numeraire = {1.0};
  doc.labels = {"up", "down"};
  doc.weights = {0.5, 0.5};
  doc.filtration_levels = {{{0, 1}}, {{0}, {1}}};
  doc.exponents = {2.0, 4.0};
  doc.payoffs["f"] = {{0.0}, {1.0}};
  doc.payoffs["g"] = {{2.0}, {1.0}};
  doc.densities["q"] = {{1.6}, {0.4}};
  UtilitySpec ent;
  ent.family = "exponential";
  ent.rate = 1.0;
  ent.weight = {1.0};
  doc.utilities["entropic"] = ent;
  UtilitySpec cv;
  cv.family = "cvar";
  cv.level = 0.5;
  cv.weight = {1.0};
  doc.utilities["cvar"] = cv;
  doc.defaults.seed = 7;
  return doc;
}

/// Four uniform leaves on a two-level binary tree, the conditional and
/// time-consistency fixture. The staircase payoff lands on the per-atom
/// closed forms; the tilted density is aggregate-feasible but not constant,
/// exercising the conditional penalty.
inline ScenarioDocument binarytree4() {
  ScenarioDocument doc;
  doc.name = "binarytree4";
  doc.dimension = 1;
  doc.numeraire = {1.0};
  doc.labels = {"uu", "ud", "du", "dd"};
  doc.weights = {0.25, 0.25, 0.25, 0.25};
  doc.filtration_levels = {{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1}, {2}, {3}}};
  doc.exponents = {2.0, 2.5, 3.0, 1.5};
  doc.payoffs["f"] = {{0.0}, {1.0}, {2.0}, {3.0}};
  doc.payoffs["stair"] = {{1.0}, {2.0}, {3.0}, {4.0}};
  doc.densities["flat"] = {{1.0}, {1.0}, {1.0}, {1.0}};
  doc.densities["tilted"] = {{1.6}, {0.4}, {1.2}, {0.8}};
  UtilitySpec ent;
  ent.family = "exponential";
  ent.rate = 1.0;
  ent.weight = {1.0};
  doc.utilities["entropic"] = ent;
  UtilitySpec cv;
  cv.family = "cvar";
  cv.level = 0.5;
  cv.weight = {1.0};
  doc.utilities["cvar"] = cv;
  UtilitySpec pl;
  pl.family = "piecewise-linear";
  pl.slope_neg = 2.0;
  pl.slope_pos = 0.5;
  pl.weight = {1.0};
  doc.utilities["plinear"] = pl;
  doc.defaults.seed = 7;
  doc.defaults.trials = 5000;
  return doc;
}

/// Constant payoff f = 2 z on a scalar value space: its Luxemburg norm and
/// every admissible certainty equivalent are exactly 2.
inline ScenarioDocument constant() {
  ScenarioDocument doc;
  doc.name = "constant";
  doc.dimension = 1;
  doc.numeraire = {1.0};
  doc.labels = {"a", "b"};
  doc.weights = {0.4, 0.6};
  doc.filtration_levels = {{{0, 1}}, {{0}, {1}}};
  doc.exponents = {2.0, 3.0};
  doc.payoffs["f"] = {{2.0}, {2.0}};
  UtilitySpec ent;
  ent.family = "exponential";
  ent.rate = 1.0;
  ent.weight = {1.0};
  doc.utilities["entropic"] = ent;
  return doc;
}

/// Two-dimensional value space with an uneven numeraire; exercises the
/// weight-composed utilities and vector payoffs end to end.
inline ScenarioDocument vector2d() {
  ScenarioDocument doc;
  doc.name = "vector2d";
  doc.dimension = 2;
  doc.numeraire = {1.0, 2.0};
  doc.labels = {"a", "b", "c"};
  doc.weights = {0.3, 0.3, 0.4};
  doc.filtration_levels = {{{0, 1, 2}}, {{0, 1}, {2}}, {{0}, {1}, {2}}};
  doc.exponents = {2.0, 3.5, 1.8};
  doc.payoffs["f"] = {{1.0, -0.5}, {0.0, 1.0}, {-2.0, 0.75}};
  doc.payoffs["cash"] = {{2.0, 4.0}, {2.0, 4.0}, {2.0, 4.0}};
  doc.densities["ref"] = {{0.5, 0.25}, {0.5, 0.25}, {0.5, 0.25}};
  UtilitySpec ent;
  ent.family = "exponential";
  ent.rate = 0.8;
  ent.weight = {0.5, 0.25};
  doc.utilities["entropic"] = ent;
  UtilitySpec cv;
  cv.family = "cvar";
  cv.level = 0.25;
  cv.weight = {0.5, 0.25};
  doc.utilities["cvar"] = cv;
  return doc;
}

}  // namespace vexrisk::fixtures
