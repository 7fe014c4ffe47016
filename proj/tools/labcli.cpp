// labcli: command-line front-end for the blow-up laboratory.
//
// Subcommands: expansion | reduced | solve | family | spectrum | n6.
// Configuration comes from a flat key = value file (--config); individual
// flags override file values.  Each run writes command.<hash>.json (and .csv)
// into --out and exits 0 iff the command's attached acceptance check passes.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "lichnlab/commands.hpp"

using namespace lichnlab;

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for blow-up constructions"};
  app.require_subcommand(1);

  std::string configPath, outDir = ".", epsLadder, kRange;
  int n = -1;
  double M = -1, tolQuad = -1, tolNewton = -1;
  for (const char* name :
       {"expansion", "reduced", "solve", "family", "spectrum", "n6"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", configPath, "flat key = value config file");
    sub->add_option("--out", outDir, "output directory");
    sub->add_option("--n", n, "dimension override");
    sub->add_option("--M", M, "bump plateau half-width override");
    sub->add_option("--eps-ladder", epsLadder, "comma-separated eps values");
    sub->add_option("--k-range", kRange, "ladder exponent range jmin:jmax");
    sub->add_option("--tol-quad", tolQuad, "quadrature relative tolerance");
    sub->add_option("--tol-newton", tolNewton, "Newton residual tolerance");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg;
    if (!configPath.empty()) cfg = load_config(configPath);
    if (n >= 0) cfg.kv["n"] = std::to_string(n);
    if (M >= 0) cfg.kv["M"] = format_real((real)M);
    if (!epsLadder.empty()) cfg.kv["epsLadder"] = epsLadder;
    if (!kRange.empty()) {
      const size_t colon = kRange.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("--k-range expects jmin:jmax");
      cfg.kv["jMin"] = trim(kRange.substr(0, colon));
      cfg.kv["jMax"] = trim(kRange.substr(colon + 1));
    }
    if (tolQuad >= 0) cfg.kv["tolQuad"] = format_real((real)tolQuad);
    if (tolNewton >= 0) cfg.kv["tolNewton"] = format_real((real)tolNewton);
    if (!cfg.has("n"))
      throw std::runtime_error("missing dimension: set n in config or --n");

    const ReportEnvelope env = run_command(cfg, name);
    for (const std::string& p : emit_report(env, outDir))
      std::printf("wrote %s\n", p.c_str());
    std::printf("%s: %s\n", name.c_str(), env.pass ? "PASS" : "FAIL");
    return env.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", name.c_str(), e.what());
    return 2;
  }
}
