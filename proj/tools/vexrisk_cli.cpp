// Command-line front end: loads a scenario document, dispatches one of the
// engine operations and emits a tagged report. Exit status: 0 on success,
// 1 when a numerical contract is violated (duality gap above tolerance,
// failed decomposition, failed selftest), 2 on input errors.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vexrisk/report.hpp"
#include "vexrisk/selftest.hpp"
#include "vexrisk/vexrisk.hpp"

namespace {

using namespace vexrisk;

struct Options {
  std::string scenario;
  std::string payoff;
  std::string utility;
  std::string density;
  int level = 0;
  int step = 1;
  double tol = -1.0;  // negative: use the per-command default
  int trials = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid = -1;
  double box = -1.0;
  std::string format = "text";
  bool strict = false;
  bool composed = false;
};

std::string resolve_scenario_path(const std::string& given) {
  namespace fs = std::filesystem;
  if (fs::exists(given)) return given;
  if (const char* dir = std::getenv("VEXRISK_SCENARIO_DIR")) {
    for (const auto& candidate : {fs::path(dir) / given, fs::path(dir) / (given + ".json")})
      if (fs::exists(candidate)) return candidate.string();
  }
  throw ScenarioError("cannot find scenario '" + given + "' (also searched $VEXRISK_SCENARIO_DIR)");
}

struct LoadedScenario {
  ScenarioDocument doc;
  FiniteMeasureSpace space;
  Filtration filt;
  OrderedSpace E;
};

LoadedScenario load(const Options& opt) {
  if (opt.scenario.empty()) throw ScenarioError("missing --scenario");
  auto doc = load_scenario(resolve_scenario_path(opt.scenario), opt.strict);
  auto space = doc.space();
  auto filt = doc.filtration();
  auto E = doc.ordered();
  return {std::move(doc), std::move(space), std::move(filt), std::move(E)};
}

std::string payoff_name(const Options& opt, const ScenarioDocument& doc) {
  return opt.payoff.empty() ? doc.sole_payoff() : opt.payoff;
}
std::string utility_name(const Options& opt, const ScenarioDocument& doc) {
  return opt.utility.empty() ? doc.sole_utility() : opt.utility;
}
std::string density_name(const Options& opt, const ScenarioDocument& doc) {
  return opt.density.empty() ? doc.sole_density() : opt.density;
}

void echo_config(Report& rep, const Options& opt, const LoadedScenario& sc) {
  rep.config("scenario", sc.doc.name);
  rep.config("outcomes", static_cast<double>(sc.space.size()));
  rep.config("dimension", static_cast<double>(sc.E.dim()));
  if (opt.strict) rep.config("strict", "true");
}

void emit(const Report& rep, const Options& opt,
          std::chrono::steady_clock::time_point started) {
  Report copy = rep;
  copy.wall_ms(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         started)
                   .count());
  std::cout << (opt.format == "structured" ? copy.structured() : copy.text());
}

std::string vector_row(const RandomVector& f, std::size_t i) {
  std::string s;
  for (std::size_t j = 0; j < f.dim(); ++j) {
    if (j) s += " ";
    s += format_number(f(i, j));
  }
  return s;
}

int cmd_norm(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : 1e-10;
  const auto name = payoff_name(opt, sc.doc);
  const double value = luxemburg_norm(sc.space, sc.doc.payoff(name), sc.doc.exponent_function(), tol);
  Report rep("norm");
  echo_config(rep, opt, sc);
  rep.config("payoff", name);
  rep.row("luxemburg_norm", value, "bisection", format_number(tol));
  emit(rep, opt, started);
  return 0;
}

int cmd_oce(const Options& opt, bool as_risk) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : sc.doc.defaults.tol;
  const auto pname = payoff_name(opt, sc.doc);
  const auto uname = utility_name(opt, sc.doc);
  const auto result = oce(sc.space, sc.E, sc.doc.payoff(pname), sc.doc.utility(uname), tol);
  Report rep(as_risk ? "risk" : "oce");
  echo_config(rep, opt, sc);
  rep.config("payoff", pname);
  rep.config("utility", uname);
  if (as_risk) {
    rep.row("rho", -result.value, result.method, format_number(tol));
  } else {
    rep.row("oce", result.value, result.method, format_number(tol));
    rep.row("eta_star", result.eta_star, result.method, format_number(tol));
  }
  rep.row("iterations", result.iterations, result.method, "exact");
  emit(rep, opt, started);
  return 0;
}

int cmd_penalty(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const auto uname = utility_name(opt, sc.doc);
  const auto dname = density_name(opt, sc.doc);
  const auto u = sc.doc.utility(uname);
  const auto g = sc.doc.density(dname);
  Report rep("penalty");
  echo_config(rep, opt, sc);
  rep.config("utility", uname);
  rep.config("density", dname);
  const auto closed = penalty_minimal(sc.space, sc.E, g, u);
  rep.row("penalty_minimal", closed.value, closed.method, "exact");
  if (opt.box > 0) {
    PenaltySearchOptions popts;
    popts.box = opt.box;
    if (opt.seed_set) popts.seed = opt.seed;
    const auto lower = penalty_minimal(sc.space, sc.E, g, u, PenaltyStrategy::box_search, popts);
    rep.row("penalty_lower_bound", lower.value, lower.method,
            "box " + format_number(lower.box));
  }
  emit(rep, opt, started);
  return 0;
}

int cmd_dual_check(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : 1e-3;
  const auto pname = payoff_name(opt, sc.doc);
  const auto uname = utility_name(opt, sc.doc);
  DualSearchOptions dopts;
  if (opt.grid > 0) dopts.grid = opt.grid;
  if (opt.seed_set) dopts.seed = opt.seed;
  const auto rep_data =
      dual_check(sc.space, sc.E, sc.doc.payoff(pname), sc.doc.utility(uname), dopts);
  Report rep("dual-check");
  echo_config(rep, opt, sc);
  rep.config("payoff", pname);
  rep.config("utility", uname);
  rep.config("grid", static_cast<double>(dopts.grid));
  rep.row("primal", rep_data.primal, "golden-section", format_number(1e-8));
  rep.row("dual", rep_data.dual, rep_data.method, format_number(tol));
  rep.row("gap", rep_data.gap, rep_data.method, format_number(tol));
  for (std::size_t i = 0; i < rep_data.argmax.outcomes(); ++i)
    rep.row_text("argmax_density[" + std::to_string(i) + "]", vector_row(rep_data.argmax, i),
                 rep_data.method, format_number(tol));
  emit(rep, opt, started);
  return rep_data.gap > tol ? 1 : 0;
}

int cmd_conditional(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : sc.doc.defaults.tol;
  const auto pname = payoff_name(opt, sc.doc);
  const auto uname = utility_name(opt, sc.doc);
  const auto u = sc.doc.utility(uname);
  const auto result = conditional_oce(sc.space, sc.filt, sc.E, sc.doc.payoff(pname), u,
                                      opt.level, tol);
  Report rep("conditional");
  echo_config(rep, opt, sc);
  rep.config("payoff", pname);
  rep.config("utility", uname);
  rep.config("level", static_cast<double>(opt.level));
  const auto atoms = sc.filt.atoms_at(sc.space, opt.level);
  const char* method = u.smooth() ? "golden-section" : "breakpoint-enumeration";
  for (std::size_t a = 0; a < atoms.size(); ++a)
    rep.row("rho_t.atom" + std::to_string(a), -result.value.atom_values[a], method,
            format_number(tol));
  emit(rep, opt, started);
  return 0;
}

DynamicFamily build_family(const Options& opt, const LoadedScenario& sc, const Utility& u) {
  return opt.composed ? DynamicFamily::composed_uniform(u, sc.filt.horizon())
                      : DynamicFamily::direct_uniform(u, sc.filt.horizon());
}

int cmd_consistency(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : 1e-6;
  const int trials = opt.trials > 0 ? opt.trials : sc.doc.defaults.trials;
  const std::uint64_t seed = opt.seed_set ? opt.seed : sc.doc.defaults.seed;
  const auto uname = utility_name(opt, sc.doc);
  const auto family = build_family(opt, sc, sc.doc.utility(uname));
  const auto audit =
      consistency_audit(sc.space, sc.filt, sc.E, family, opt.level, opt.step, trials, seed, tol);
  Report rep("consistency");
  echo_config(rep, opt, sc);
  rep.config("utility", uname);
  rep.config("family", opt.composed ? "composed" : "direct");
  rep.config("level", static_cast<double>(opt.level));
  rep.config("step", static_cast<double>(opt.step));
  rep.config("trials", static_cast<double>(trials));
  rep.config("seed", static_cast<double>(seed));
  rep.row("max_residual", audit.max_residual, "search", format_number(tol));
  rep.row("implication_checked", audit.implication_checked, "search", "exact");
  rep.row("implication_violations", audit.implication_violations, "search", "exact");
  rep.row_text("verdict", audit.consistent() ? "consistent" : "inconsistent", "search",
               format_number(tol));
  if (audit.has_witness)
    for (std::size_t i = 0; i < audit.witness.outcomes(); ++i)
      rep.witness("payoff[" + std::to_string(i) + "] = " + vector_row(audit.witness, i));
  emit(rep, opt, started);
  return 0;  // report-only: a found witness is a successful audit
}

int cmd_decompose(const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto sc = load(opt);
  const double tol = opt.tol > 0 ? opt.tol : 1e-6;
  const auto pname = payoff_name(opt, sc.doc);
  const auto uname = utility_name(opt, sc.doc);
  const auto family = build_family(opt, sc, sc.doc.utility(uname));
  const std::uint64_t seed = opt.seed_set ? opt.seed : sc.doc.defaults.seed;

  const auto audit =
      consistency_audit(sc.space, sc.filt, sc.E, family, opt.level, opt.step, 200, seed, tol);
  Report rep("decompose");
  echo_config(rep, opt, sc);
  rep.config("payoff", pname);
  rep.config("utility", uname);
  rep.config("family", opt.composed ? "composed" : "direct");
  rep.config("level", static_cast<double>(opt.level));
  rep.config("step", static_cast<double>(opt.step));
  if (!audit.consistent()) {
    rep.row("audit_residual", audit.max_residual, "search", format_number(tol));
    rep.row_text("verdict", "family fails audit, decomposition not guaranteed", "search",
                 format_number(tol));
    emit(rep, opt, started);
    return 1;
  }
  const auto dec = decompose_acceptance(sc.space, sc.filt, sc.E, family, sc.doc.payoff(pname),
                                        opt.level, opt.step, tol);
  for (std::size_t i = 0; i < dec.f1.outcomes(); ++i)
    rep.row_text("f1[" + std::to_string(i) + "]", vector_row(dec.f1, i), "closed-form",
                 format_number(tol));
  for (std::size_t i = 0; i < dec.f2.outcomes(); ++i)
    rep.row_text("f2[" + std::to_string(i) + "]", vector_row(dec.f2, i), "closed-form",
                 format_number(tol));
  rep.row("rho_f2_residual", dec.rho_f2_residual, "golden-section", format_number(tol));
  rep.row("rho_f1_level_t", dec.rho_f1_level_t, "golden-section", format_number(tol));
  rep.row_text("verified", dec.verified(tol) ? "true" : "false", "direct", format_number(tol));
  emit(rep, opt, started);
  return dec.verified(tol) ? 0 : 1;
}

int cmd_selftest(const Options& opt) {
  const auto results = selftest::run_all();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " - " << r.detail
              << " (" << format_number(r.ms) << " ms)\n";
  }
  std::cout << (all ? "selftest: all criteria passed\n" : "selftest: FAILURES\n");
  (void)opt;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-measure engine on finite variable-exponent spaces"};
  app.require_subcommand(1);

  Options opt;
  const auto add_common = [&](CLI::App* cmd, bool needs_scenario = true) {
    if (needs_scenario)
      cmd->add_option("--scenario", opt.scenario,
                      "scenario file (path or name under $VEXRISK_SCENARIO_DIR)");
    cmd->add_option("--payoff", opt.payoff, "payoff name in the scenario");
    cmd->add_option("--utility", opt.utility, "utility name in the scenario");
    cmd->add_option("--density", opt.density, "density name in the scenario");
    cmd->add_option("--level", opt.level, "filtration level t");
    cmd->add_option("--step", opt.step, "step s (level pair t, t+s)");
    cmd->add_option("--tol", opt.tol, "tolerance override");
    cmd->add_option("--trials", opt.trials, "trial budget override");
    cmd->add_option("--seed", opt.seed, "seed override")->each([&](const std::string&) {
      opt.seed_set = true;
    });
    cmd->add_option("--grid", opt.grid, "dual search grid resolution");
    cmd->add_option("--box", opt.box, "penalty search box half-width");
    cmd->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"text", "structured"}));
    cmd->add_flag("--strict", opt.strict, "reject unknown scenario fields");
    cmd->add_flag("--composed", opt.composed, "use the recursively composed family");
    return cmd;
  };

  auto* norm = add_common(app.add_subcommand("norm", "Luxemburg norm of a payoff"));
  auto* oce_cmd = add_common(app.add_subcommand("oce", "optimized certainty equivalent"));
  auto* risk = add_common(app.add_subcommand("risk", "induced convex risk measure"));
  auto* dual = add_common(app.add_subcommand("dual-check", "primal vs dual representation"));
  auto* cond = add_common(app.add_subcommand("conditional", "conditional risk at a level"));
  auto* cons = add_common(app.add_subcommand("consistency", "time-consistency audit"));
  auto* deco = add_common(app.add_subcommand("decompose", "acceptance decomposition"));
  auto* pen = add_common(app.add_subcommand("penalty", "minimal penalty of a density"));
  auto* self = add_common(app.add_subcommand("selftest", "run the acceptance battery"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (norm->parsed()) return cmd_norm(opt);
    if (oce_cmd->parsed()) return cmd_oce(opt, false);
    if (risk->parsed()) return cmd_oce(opt, true);
    if (dual->parsed()) return cmd_dual_check(opt);
    if (cond->parsed()) return cmd_conditional(opt);
    if (cons->parsed()) return cmd_consistency(opt);
    if (deco->parsed()) return cmd_decompose(opt);
    if (pen->parsed()) return cmd_penalty(opt);
    if (self->parsed()) return cmd_selftest(opt);
  } catch (const ScenarioError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
