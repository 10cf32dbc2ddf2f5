#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vexrisk/oce.hpp"
#include "vexrisk/ordered.hpp"
#include "vexrisk/space.hpp"
#include "vexrisk/varexp.hpp"

namespace vexrisk {

inline constexpr const char* kScenarioFormat = "risk-scenario/1";

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UtilitySpec {
  std::string family;  // "exponential" | "cvar" | "piecewise-linear"
  double rate = 1.0;
  double level = 0.5;
  double slope_neg = 1.0;
  double slope_pos = 1.0;
  std::vector<double> weight;

  Utility build() const {
    if (family == "exponential") return Utility::exponential(rate, weight);
    if (family == "cvar") return Utility::cvar(level, weight);
    if (family == "piecewise-linear") return Utility::piecewise_linear(slope_neg, slope_pos, weight);
    throw ScenarioError("unknown utility family '" + family + "'");
  }
};

struct ScenarioDefaults {
  double tol = 1e-8;
  int trials = 1000;
  std::uint64_t seed = 42;
  int grid = 48;
  double box = 8.0;
};

/// A fully validated scenario: measure space, filtration, value space,
/// exponents, named payoffs/densities/utilities and solver defaults.
/// Documents are plain data; the typed objects are built on demand and the
/// construction re-runs every module-level invariant.
struct ScenarioDocument {
  std::string name = "scenario";
  std::size_t dimension = 1;
  std::vector<double> numeraire;
  std::vector<std::string> labels;
  std::vector<double> weights;
  std::vector<Filtration::Partition> filtration_levels;  // empty => trivial
  std::vector<double> exponents;
  std::map<std::string, std::vector<std::vector<double>>> payoffs;
  std::map<std::string, std::vector<std::vector<double>>> densities;
  std::map<std::string, UtilitySpec> utilities;
  ScenarioDefaults defaults;

  std::size_t outcomes() const { return weights.size(); }

  FiniteMeasureSpace space() const { return FiniteMeasureSpace(labels, weights); }

  OrderedSpace ordered() const { return OrderedSpace(dimension, numeraire); }

  Filtration filtration() const {
    if (filtration_levels.empty()) return Filtration::trivial(outcomes());
    return Filtration(outcomes(), filtration_levels);
  }

  ExponentFunction exponent_function() const { return ExponentFunction(exponents); }

  RandomVector payoff(const std::string& id) const { return table_entry(payoffs, id, "payoff"); }

  DualDensity density(const std::string& id) const { return table_entry(densities, id, "density"); }

  Utility utility(const std::string& id) const {
    const auto it = utilities.find(id);
    if (it == utilities.end()) throw ScenarioError("unknown utility '" + id + "'");
    return it->second.build();
  }

  /// The single entry of a one-element table, for commands that omit the
  /// name when the choice is unambiguous.
  std::string sole_payoff() const { return sole_key(payoffs, "payoff"); }
  std::string sole_density() const { return sole_key(densities, "density"); }
  std::string sole_utility() const { return sole_key(utilities, "utility"); }

private:
  RandomVector table_entry(const std::map<std::string, std::vector<std::vector<double>>>& table,
                           const std::string& id, const char* what) const {
    const auto it = table.find(id);
    if (it == table.end()) throw ScenarioError(std::string("unknown ") + what + " '" + id + "'");
    RandomVector f(outcomes(), dimension);
    for (std::size_t i = 0; i < outcomes(); ++i)
      for (std::size_t j = 0; j < dimension; ++j) f(i, j) = it->second[i][j];
    return f;
  }

  template <class Table>
  std::string sole_key(const Table& table, const char* what) const {
    if (table.size() != 1)
      throw ScenarioError(std::string("missing ") + what + " name (" +
                          std::to_string(table.size()) + " candidates)");
    return table.begin()->first;
  }
};

namespace detail {

using Json = nlohmann::ordered_json;

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> known,
                                const std::string& where, bool strict) {
  if (!strict) return;
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ScenarioError(where + ": unknown field '" + key + "' (strict mode)");
  }
}

inline double number_at(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ScenarioError(where + ": missing field '" + key + "'");
  if (!obj.at(key).is_number()) throw ScenarioError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

inline std::vector<double> number_array(const Json& arr, const std::string& where) {
  if (!arr.is_array()) throw ScenarioError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number())
      throw ScenarioError(where + "[" + std::to_string(k) + "]: expected a number");
    out.push_back(arr[k].get<double>());
  }
  return out;
}

inline std::vector<std::vector<double>> matrix(const Json& arr, std::size_t rows, std::size_t cols,
                                               const std::string& where) {
  if (!arr.is_array() || arr.size() != rows)
    throw ScenarioError(where + ": expected " + std::to_string(rows) + " rows (one per outcome)");
  std::vector<std::vector<double>> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto row = number_array(arr[i], where + "[" + std::to_string(i) + "]");
    if (row.size() != cols)
      throw ScenarioError(where + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) +
                          " coordinates");
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// Parses and fully validates a scenario document; the first violated
/// invariant is reported with its location in the document.
inline ScenarioDocument parse_scenario(const std::string& text, bool strict = false) {
  using detail::Json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario: expected an object at top level");
  detail::reject_unknown_keys(doc,
                              {"format", "name", "dimension", "numeraire", "outcomes",
                               "filtration", "exponents", "payoffs", "densities", "utilities",
                               "defaults"},
                              "scenario", strict);

  if (!doc.contains("format") || !doc["format"].is_string() ||
      doc["format"].get<std::string>() != kScenarioFormat)
    throw ScenarioError(std::string("scenario.format: expected \"") + kScenarioFormat + "\"");

  ScenarioDocument out;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ScenarioError("scenario.name: expected a string");
    out.name = doc["name"].get<std::string>();
  }

  const double dim = detail::number_at(doc, "dimension", "scenario");
  if (dim < 1 || dim != static_cast<std::size_t>(dim))
    throw ScenarioError("scenario.dimension: expected a positive integer");
  out.dimension = static_cast<std::size_t>(dim);

  if (!doc.contains("numeraire"))
    throw ScenarioError("scenario: missing field 'numeraire'");
  out.numeraire = detail::number_array(doc["numeraire"], "scenario.numeraire");

  if (!doc.contains("outcomes") || !doc["outcomes"].is_array() || doc["outcomes"].empty())
    throw ScenarioError("scenario.outcomes: expected a nonempty array");
  for (std::size_t i = 0; i < doc["outcomes"].size(); ++i) {
    const auto& o = doc["outcomes"][i];
    const std::string where = "scenario.outcomes[" + std::to_string(i) + "]";
    if (!o.is_object()) throw ScenarioError(where + ": expected an object");
    detail::reject_unknown_keys(o, {"label", "probability"}, where, strict);
    if (!o.contains("label") || !o["label"].is_string())
      throw ScenarioError(where + ".label: expected a string");
    out.labels.push_back(o["label"].get<std::string>());
    out.weights.push_back(detail::number_at(o, "probability", where));
  }
  const std::size_t n = out.weights.size();

  if (doc.contains("filtration")) {
    const auto& levels = doc["filtration"];
    if (!levels.is_array()) throw ScenarioError("scenario.filtration: expected an array of levels");
    for (std::size_t t = 0; t < levels.size(); ++t) {
      const std::string where = "scenario.filtration[" + std::to_string(t) + "]";
      if (!levels[t].is_array()) throw ScenarioError(where + ": expected an array of atoms");
      Filtration::Partition part;
      for (std::size_t a = 0; a < levels[t].size(); ++a) {
        const auto idx =
            detail::number_array(levels[t][a], where + "[" + std::to_string(a) + "]");
        std::vector<std::size_t> atom;
        for (double v : idx) {
          if (v < 0 || v != static_cast<std::size_t>(v))
            throw ScenarioError(where + "[" + std::to_string(a) +
                                "]: outcome indices must be nonnegative integers");
          atom.push_back(static_cast<std::size_t>(v));
        }
        part.push_back(std::move(atom));
      }
      out.filtration_levels.push_back(std::move(part));
    }
  }

  if (!doc.contains("exponents"))
    throw ScenarioError("scenario: missing field 'exponents'");
  out.exponents = detail::number_array(doc["exponents"], "scenario.exponents");
  if (out.exponents.size() != n)
    throw ScenarioError("scenario.exponents: expected one exponent per outcome");

  const auto read_table = [&](const char* key,
                              std::map<std::string, std::vector<std::vector<double>>>& table) {
    if (!doc.contains(key)) return;
    const auto& obj = doc[key];
    if (!obj.is_object()) throw ScenarioError(std::string("scenario.") + key + ": expected an object");
    for (const auto& [id, arr] : obj.items())
      table[id] = detail::matrix(arr, n, out.dimension,
                                 std::string("scenario.") + key + "." + id);
  };
  read_table("payoffs", out.payoffs);
  read_table("densities", out.densities);

  if (doc.contains("utilities")) {
    const auto& obj = doc["utilities"];
    if (!obj.is_object()) throw ScenarioError("scenario.utilities: expected an object");
    for (const auto& [id, spec] : obj.items()) {
      const std::string where = "scenario.utilities." + id;
      if (!spec.is_object()) throw ScenarioError(where + ": expected an object");
      detail::reject_unknown_keys(
          spec, {"family", "rate", "level", "slope_neg", "slope_pos", "weight"}, where, strict);
      UtilitySpec us;
      if (!spec.contains("family") || !spec["family"].is_string())
        throw ScenarioError(where + ".family: expected a string");
      us.family = spec["family"].get<std::string>();
      if (us.family == "exponential") {
        us.rate = detail::number_at(spec, "rate", where);
      } else if (us.family == "cvar") {
        us.level = detail::number_at(spec, "level", where);
      } else if (us.family == "piecewise-linear") {
        us.slope_neg = detail::number_at(spec, "slope_neg", where);
        us.slope_pos = detail::number_at(spec, "slope_pos", where);
      } else {
        throw ScenarioError(where + ".family: unknown family '" + us.family + "'");
      }
      if (!spec.contains("weight"))
        throw ScenarioError(where + ": missing field 'weight'");
      us.weight = detail::number_array(spec["weight"], where + ".weight");
      out.utilities[id] = std::move(us);
    }
  }

  if (doc.contains("defaults")) {
    const auto& d = doc["defaults"];
    const std::string where = "scenario.defaults";
    if (!d.is_object()) throw ScenarioError(where + ": expected an object");
    detail::reject_unknown_keys(d, {"tol", "trials", "seed", "grid", "box"}, where, strict);
    if (d.contains("tol")) out.defaults.tol = detail::number_at(d, "tol", where);
    if (d.contains("trials"))
      out.defaults.trials = static_cast<int>(detail::number_at(d, "trials", where));
    if (d.contains("seed"))
      out.defaults.seed = static_cast<std::uint64_t>(detail::number_at(d, "seed", where));
    if (d.contains("grid")) out.defaults.grid = static_cast<int>(detail::number_at(d, "grid", where));
    if (d.contains("box")) out.defaults.box = detail::number_at(d, "box", where);
  }

  // Re-run every construction invariant now so a bad document fails at load
  // time with a usable message, not at first use.
  try {
    const auto space = out.space();
    const auto E = out.ordered();
    out.filtration();
    out.exponent_function();
    for (const auto& [id, _] : out.payoffs) out.payoff(id);
    for (const auto& [id, _] : out.densities) out.density(id);
    for (const auto& [id, spec] : out.utilities) {
      (void)spec;
      out.utility(id).validate(E);
    }
    (void)space;
  } catch (const std::exception& e) {
    throw ScenarioError("scenario '" + out.name + "': " + e.what());
  }
  return out;
}

inline std::string serialize_scenario(const ScenarioDocument& doc) {
  using detail::Json;
  Json j;
  j["format"] = kScenarioFormat;
  j["name"] = doc.name;
  j["dimension"] = doc.dimension;
  j["numeraire"] = doc.numeraire;
  j["outcomes"] = Json::array();
  for (std::size_t i = 0; i < doc.weights.size(); ++i)
    j["outcomes"].push_back({{"label", doc.labels[i]}, {"probability", doc.weights[i]}});
  if (!doc.filtration_levels.empty()) j["filtration"] = doc.filtration_levels;
  j["exponents"] = doc.exponents;
  if (!doc.payoffs.empty()) j["payoffs"] = doc.payoffs;
  if (!doc.densities.empty()) j["densities"] = doc.densities;
  if (!doc.utilities.empty()) {
    j["utilities"] = Json::object();
    for (const auto& [id, us] : doc.utilities) {
      Json spec;
      spec["family"] = us.family;
      if (us.family == "exponential") spec["rate"] = us.rate;
      if (us.family == "cvar") spec["level"] = us.level;
      if (us.family == "piecewise-linear") {
        spec["slope_neg"] = us.slope_neg;
        spec["slope_pos"] = us.slope_pos;
      }
      spec["weight"] = us.weight;
      j["utilities"][id] = std::move(spec);
    }
  }
  j["defaults"] = {{"tol", doc.defaults.tol},
                   {"trials", doc.defaults.trials},
                   {"seed", doc.defaults.seed},
                   {"grid", doc.defaults.grid},
                   {"box", doc.defaults.box}};
  return j.dump(2) + "\n";
}

inline ScenarioDocument load_scenario(const std::string& path, bool strict = false) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), strict);
}

inline bool operator==(const ScenarioDocument& a, const ScenarioDocument& b) {
  return serialize_scenario(a) == serialize_scenario(b);
}

}  // namespace vexrisk
