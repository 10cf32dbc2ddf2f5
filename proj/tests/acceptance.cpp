// Acceptance suite: runs every criterion of the battery and, on top of the
// library-level checks, exercises the shipped fixture files and the real
// CLI binary for the round-trip and determinism criterion. Prints one
// PASS/FAIL line per criterion and exits nonzero if any fails.

#include <array>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include "vexrisk/selftest.hpp"

namespace {

std::string run_command(const std::string& cmd) {
  std::array<char, 4096> buf{};
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return "<popen failed>";
  while (std::fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
  return out;
}

/// File-level round trip plus byte-identical CLI reports across two runs.
vexrisk::selftest::CriterionResult criterion_cli_determinism() {
  using namespace vexrisk;
  return selftest::detail::timed(10, "fixture files + CLI determinism",
                                 [](std::ostringstream& out) {
    int roundtrip_failures = 0;
    const std::string dir = VEXRISK_FIXTURE_DIR;
    for (const char* name : {"minimal", "twopoint", "binarytree4", "constant", "vector2d"}) {
      const auto doc = load_scenario(dir + "/" + std::string(name) + ".json", /*strict=*/true);
      const std::string text = serialize_scenario(doc);
      const auto reloaded = parse_scenario(text, /*strict=*/true);
      if (!(reloaded == doc) || serialize_scenario(reloaded) != text) ++roundtrip_failures;
    }

    const std::string cli = VEXRISK_CLI_PATH;
    int nondeterministic = 0, cli_failures = 0;
    const std::string common = " --format structured --scenario " + dir;
    for (const std::string& invocation :
         {cli + " risk" + common + "/twopoint.json --payoff f --utility entropic",
          cli + " norm" + common + "/twopoint.json --payoff g",
          cli + " dual-check" + common + "/twopoint.json --payoff f --utility entropic",
          cli + " consistency" + common +
              "/binarytree4.json --utility cvar --level 0 --step 1 --trials 500 --seed 7",
          cli + " conditional" + common +
              "/binarytree4.json --payoff f --utility entropic --level 1"}) {
      const std::string first = run_command(invocation);
      const std::string second = run_command(invocation);
      if (first.empty()) ++cli_failures;
      if (first != second) ++nondeterministic;
    }

    // the selftest's library-scope determinism checks
    const auto library_scope = selftest::criterion_determinism();

    out << "file round-trip failures=" << roundtrip_failures
        << " cli invocations differing=" << nondeterministic
        << " cli failures=" << cli_failures << " library-scope: " << library_scope.detail;
    return roundtrip_failures == 0 && nondeterministic == 0 && cli_failures == 0 &&
           library_scope.pass;
  });
}

}  // namespace

int main() {
  using namespace vexrisk::selftest;
  std::vector<CriterionResult> results = {
      criterion_norm_axioms(),    criterion_holder(),
      criterion_oce_axioms(),     criterion_subhomogeneity(),
      criterion_ssd(),            criterion_static_duality(),
      criterion_conditional_duality(), criterion_time_consistency(),
      criterion_acceptance_sets(), criterion_cli_determinism()};

  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("[%s] %02d %s - %s (%.0f ms)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str(), r.ms);
  }
  std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES");
  return all ? 0 : 1;
}
