#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lichnlab/commands.hpp"

using namespace lichnlab;

namespace {

std::string write_temp(const std::string& text) {
  static int counter = 0;
  const std::string path =
      "cli_test_tmp_" + std::to_string(counter++) + ".cfg";
  std::ofstream out(path);
  out << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("parse_config: grammar, comments, line-numbered errors") {
  std::istringstream ok("# comment\n\n n = 7 \nM=20\neps = 3e-6\n");
  const RunConfig cfg = parse_config(ok);
  CHECK(cfg.integer("n", 0) == 7);
  CHECK((double)cfg.num("M", 0) == 20.0);
  CHECK((double)cfg.num("eps", 0) == 3e-6);
  CHECK(cfg.str("absent", "dflt") == "dflt");

  std::istringstream bad("n = 7\nnonsense line\n");
  try {
    parse_config(bad);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream emptyKey("= 3\n");
  CHECK_THROWS(parse_config(emptyKey));
}

TEST_CASE("RunConfig: malformed numerics are rejected") {
  std::istringstream in("n = 7\nM = twenty\n");
  const RunConfig cfg = parse_config(in);
  CHECK_THROWS(cfg.num("M", 0));
}

TEST_CASE("load_config validations") {
  const std::string noN = write_temp("M = 20\n");
  CHECK_THROWS(load_config(noN));
  const std::string badBranch = write_temp("n = 7\nbranch = n6\n");
  CHECK_THROWS(load_config(badBranch));
  const std::string noA0 = write_temp("n = 6\n");
  CHECK_THROWS(load_config(noA0));
  const std::string good = write_temp("n = 6\na0 = 7\n");
  CHECK(load_config(good).integer("a0", 0) == 7);
  CHECK_THROWS(load_config("does_not_exist.cfg"));
  for (const auto& p : {noN, badBranch, noA0, good}) std::remove(p.c_str());
}

TEST_CASE("serialize/parse round-trip and stable hash") {
  RunConfig cfg;
  cfg.kv = {{"n", "7"}, {"M", "20"}, {"eps", "3e-6"}};
  const std::string text = serialize_config(cfg);
  std::istringstream in(text);
  const RunConfig back = parse_config(in);
  CHECK(back.kv == cfg.kv);
  CHECK(config_hash(cfg) == config_hash(back));
  CHECK(config_hash(cfg).size() == 16);
  RunConfig other = cfg;
  other.kv["eps"] = "1e-6";
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("format_real: 17 significant digits, round-trips doubles") {
  CHECK(format_real(0.1L) == "0.10000000000000001");
  CHECK(format_real(1) == "1");
  const double x = 0.30746295;
  CHECK(std::stod(format_real(x)) == x);
}

TEST_CASE("parse_ladder") {
  const std::vector<real> v = parse_ladder("3e-6, 1e-6 ,3e-7");
  REQUIRE(v.size() == 3);
  CHECK((double)v[1] == 1e-6);
  CHECK_THROWS(parse_ladder(""));
  CHECK_THROWS(parse_ladder("1e-3,abc"));
}

TEST_CASE("payload determinism: identical envelopes, timestamp excluded") {
  auto build = [] {
    Payload p;
    p.add("n", 7);
    p.add("x", (real)0.1L);
    p.add("flag", true);
    p.addArray("arr", {1.0L, 0.5L});
    p.add("name", std::string("abc"));
    return p.render();
  };
  const std::string a = build(), b = build();
  CHECK(a == b);
  CHECK(a ==
        "{\"n\":7,\"x\":0.10000000000000001,\"flag\":true,"
        "\"arr\":[1,0.5],\"name\":\"abc\"}");

  ReportEnvelope env;
  env.command = "demo";
  env.configHash = "0123456789abcdef";
  env.payload = a;
  env.pass = true;
  // hash-relevant rendering has no timestamp and is reproducible
  CHECK(env.renderJson(false) == env.renderJson(false));
  CHECK(env.renderJson(false).find("timestamp") == std::string::npos);
  CHECK(env.renderJson(true).find("timestamp") != std::string::npos);
}

TEST_CASE("emit_report: stable naming and byte-identical payloads") {
  ReportEnvelope env;
  env.command = "demo";
  env.configHash = "00ff00ff00ff00ff";
  Payload p;
  p.add("value", (real)2.5L);
  env.payload = p.render();
  env.csv = "a,b\n1,2\n";
  const std::vector<std::string> paths = emit_report(env, ".");
  REQUIRE(paths.size() == 2);
  CHECK(paths[0] == "./demo.00ff00ff00ff00ff.json");
  CHECK(paths[1] == "./demo.00ff00ff00ff00ff.csv");
  const std::string j1 = slurp(paths[0]);
  CHECK(j1.find("\"payload\":{\"value\":2.5}") != std::string::npos);
  // re-emission differs at most in the timestamp field
  emit_report(env, ".");
  std::string j2 = slurp(paths[0]);
  auto strip = [](std::string s) {
    const size_t a = s.find("\"timestamp\"");
    const size_t b = s.find(',', a);
    return s.erase(a, b - a + 1);
  };
  CHECK(strip(j1) == strip(j2));
  CHECK(slurp(paths[1]) == env.csv);
  for (const auto& path : paths) std::remove(path.c_str());
}

TEST_CASE("run_reduced: envelope content and attached check") {
  RunConfig cfg;
  cfg.kv = {{"n", "7"}, {"M", "20"}};
  const ReportEnvelope env = run_reduced(cfg);
  CHECK(env.command == "reduced");
  CHECK(env.configHash == config_hash(cfg));
  CHECK(env.pass);
  CHECK(env.payload.find("\"tM\":0.30746") != std::string::npos);
  CHECK(env.csv.substr(0, env.csv.find('\n')) ==
        "tM,t0,hessTT,hessPP,gradAtRootScaled");
  // byte-identical determinism of the full pipeline
  const ReportEnvelope again = run_reduced(cfg);
  CHECK(again.payload == env.payload);
  CHECK(again.csv == env.csv);
}

TEST_CASE("run_spectrum smoke: anchor reproduced through the pipeline") {
  RunConfig cfg;
  cfg.kv = {{"n", "7"}, {"nodesTarget", "4000"}};
  const ReportEnvelope env = run_spectrum(cfg);
  CHECK(env.pass);
  CHECK(env.payload.find("\"closedForm\":36.39") != std::string::npos);
}

TEST_CASE("run_command dispatch rejects unknown names") {
  RunConfig cfg;
  cfg.kv = {{"n", "7"}};
  CHECK_THROWS(run_command(cfg, "bogus"));
}
