#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cidpred/cli.hpp"
#include "cidpred/config.hpp"
#include "doctest.h"

using namespace cidpred;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cidpred");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cidpred-test-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ConfigError parse_error(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("", "");
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig d = parse_config(Json::object());
  CHECK(d.strategy.family == Family::kConvex);
  CHECK(d.run.N == 10);
  CHECK(d.run.M == 1);
  const Json full = serialize(d);
  CHECK(serialize(parse_config(full)) == full);
  CHECK(config_hash(parse_config(full)) == config_hash(d));

  const Json rich = parse_json_text(R"({
    "strategy": {"family": "convex",
                 "rule": {"kind": "reinforcement", "criterion": "ks_band", "epsilon": 0.1,
                          "a": {"limit": 0.3}, "b": {"limit": 1, "scale": 1, "ratio": 0.25}}},
    "base": {"kind": "piecewise", "breakpoints": [0, 0.5, 1], "densities": [1.5, 0.5]},
    "partition": {"kind": "explicit", "grids": [[0, 1], [0, 0.5, 1], [0, 0.25, 0.5, 0.75, 1]]},
    "run": {"N": 7, "M": 3, "seed": 99, "threads": 2},
    "checks": [{"name": "cid_check_exact", "n": 2, "seed": 4}],
    "output": {"dir": "x", "all_trajectories": true}
  })", "inline");
  const ExperimentConfig c = parse_config(rich);
  CHECK(serialize(parse_config(serialize(c))) == serialize(c));
  CHECK(config_hash(c) != config_hash(d));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("config errors name the offending field") {
  CHECK(std::string(parse_error(Json{{"strategy", {{"family", "stable"}, {"gamma", 3}}}}).what())
            .starts_with("strategy.gamma"));
  CHECK(std::string(parse_error(Json{{"run", {{"N", 0}}}}).what()).starts_with("run.N"));
  CHECK(std::string(parse_error(Json{{"run", {{"speed", 1}}}}).what()).starts_with("run.speed"));
  CHECK(std::string(parse_error(Json{{"strategy", {{"rule", {{"kind", "dirichlet"}, {"c", -1}}}}}}).what())
            .find("strategy.rule") == 0);
  CHECK(std::string(parse_error(Json{{"checks", Json::array({{{"name", "nope"}}})}}).what())
            .starts_with("checks[0].name"));
  CHECK(std::string(parse_error(Json{{"checks", Json::array({{{"name", "cid_check_exact"}, {"bogus", 1}}})}}).what())
            .starts_with("checks[0].bogus"));
  CHECK(std::string(parse_error(Json{{"strategy", {{"family", "stable"},
                                                   {"schedule", {{"kind", "explicit"},
                                                                 {"u_values", {0.0, 0.5, 0.4}}}}}}})
                        .what())
            .find("strategy") == 0);
  CHECK(std::string(parse_error(Json{{"partition", {{"kind", "explicit"}, {"grids", {{0.0, 0.6, 1.0}, {0.0, 0.5, 1.0}}}}}}).what())
            .find("partition") == 0);
  CHECK_THROWS_AS(parse_json_text("{\"a\": ", "broken.json"), ConfigError);
}

TEST_CASE("overrides") {
  Json j = Json::object();
  apply_override(j, "run.N=25");
  apply_override(j, "strategy.rule.kind=smoothing");
  apply_override(j, "strategy.rule.q=0.8");
  apply_override(j, "checks=[{\"name\": \"cid_check_exact\"}]");
  apply_override(j, "checks.0.n=3");
  const ExperimentConfig c = parse_config(j);
  CHECK(c.run.N == 25);
  CHECK(std::get<ExpSmoothing>(c.strategy.rule).q == 0.8);
  CHECK(c.checks.at(0).params.at("n") == 3);
  CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ConfigError);
}

TEST_CASE("list-checks") {
  const Run text = run_cli({"list-checks"});
  CHECK(text.code == cli::kExitOk);
  CHECK(text.out.find("cid_check_exact") != std::string::npos);
  const Run json = run_cli({"list-checks", "--json"});
  REQUIRE(json.code == cli::kExitOk);
  const Json j = Json::parse(json.out);
  CHECK(j.size() >= 8);
  for (const auto& k : j) {
    CHECK(k.contains("name"));
    CHECK(k.contains("parameters"));
  }
}

TEST_CASE("simulate writes trajectories and ensemble summaries") {
  const fs::path dir = scratch("simulate");
  const std::string cfg = write_config(dir, R"({"run": {"N": 6, "M": 4, "seed": 3}})");
  const Run r = run_cli({"simulate", "--config", cfg, "--out", (dir / "out").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "out" / "trajectories.csv"));
  CHECK(fs::exists(dir / "out" / "ensemble.csv"));
  const Json e = Json::parse(slurp(dir / "out" / "ensemble.json"));
  CHECK(e["M"] == 4);
  CHECK(e["steps"].size() == 6);
  // Header plus one row per step of trajectory 0.
  const std::string traj = slurp(dir / "out" / "trajectories.csv");
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 7);

  // --seed and --set take precedence over the file.
  const Run r2 = run_cli({"simulate", cfg, "--seed", "4", "--set", "run.N=2", "--json", "--out",
                          (dir / "out2").string()});
  REQUIRE(r2.code == cli::kExitOk);
  const Json s = Json::parse(r2.out);
  CHECK(s["simulated"]["seed"] == 4);
  CHECK(s["simulated"]["N"] == 2);
  CHECK(slurp(dir / "out2" / "trajectories.csv") != traj);
}

TEST_CASE("verify writes report.json and curve files") {
  const fs::path dir = scratch("verify");
  const std::string cfg = write_config(dir, R"({
    "run": {"N": 20, "M": 10, "seed": 8},
    "checks": [{"name": "cid_check_exact", "n": 3},
               {"name": "tv_convergence_check", "n_grid": [1, 3], "k_grid": [1, 5]}]
  })");
  const Run r = run_cli({"verify", "--config", cfg, "--out", (dir / "o").string()});
  CHECK(r.code == cli::kExitOk);
  const Json rep = Json::parse(slurp(dir / "o" / "report.json"));
  CHECK(rep["tool"] == "cidpred");
  CHECK(rep["command"] == "verify");
  CHECK(rep["checks"].size() == 2);
  CHECK(rep["pass"] == true);
  CHECK(rep["config_hash"].get<std::string>().size() == 16);
  CHECK(rep["environment"].contains("generated_at"));
  bool has_curve = false;
  for (const auto& e : fs::directory_iterator(dir / "o")) {
    has_curve = has_curve || e.path().filename().string().starts_with("check1_tv_convergence_check");
  }
  CHECK(has_curve);

  const Run d = run_cli({"verify", cfg, "--deterministic", "--out", (dir / "d").string()});
  REQUIRE(d.code == cli::kExitOk);
  const Json det = Json::parse(slurp(dir / "d" / "report.json"));
  CHECK_FALSE(det["environment"].contains("generated_at"));
  CHECK_FALSE(det["environment"].contains("threads"));
}

TEST_CASE("run and compare") {
  const fs::path dir = scratch("compare");
  const std::string cfg = write_config(dir, R"({"strategy": {"rule": {"kind": "dirichlet", "c": 2}},
                                                "run": {"N": 30, "M": 2}})");
  const Run c = run_cli({"compare", cfg, "--out", (dir / "c").string()});
  CHECK(c.code == cli::kExitOk);
  const Json rep = Json::parse(slurp(dir / "c" / "report.json"));
  CHECK(rep["command"] == "compare");
  CHECK(rep["checks"][0]["check"] == "dirichlet_comparison");
  CHECK(rep["checks"][1]["check"] == "atom_mass_report");

  const Run bad = run_cli({"compare", cfg, "--set", "strategy.rule.kind=smoothing"});
  CHECK(bad.code == cli::kExitParseError);

  const Run r = run_cli({"run", cfg, "--set", "checks=[{\"name\": \"atom_mass_report\"}]", "--out",
                         (dir / "r").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "r" / "ensemble.json"));
  CHECK(fs::exists(dir / "r" / "report.json"));
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  // Usage errors.
  CHECK(run_cli({}).code == cli::kExitParseError);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitParseError);
  CHECK(run_cli({"simulate", "--seed", "abc"}).code == cli::kExitParseError);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);

  // Invalid config: exit 2 and the field in the message.
  const std::string bad = write_config(dir, R"({"strategy": {"family": "stable", "gamma": 3}})");
  const Run g = run_cli({"simulate", bad, "--out", (dir / "g").string()});
  CHECK(g.code == cli::kExitParseError);
  CHECK(g.err.find("strategy.gamma") != std::string::npos);
  const Run syntax = run_cli({"simulate", "--set", "run.N=0", "--out", (dir / "s").string()});
  CHECK(syntax.code == cli::kExitParseError);
  CHECK(syntax.err.find("run.N") != std::string::npos);

  // Checks incompatible with the strategy are config errors.
  const Run cov = run_cli({"verify", "--set", "checks=[{\"name\": \"covariance_check\"}]"});
  CHECK(cov.code == cli::kExitParseError);
  CHECK(cov.err.find("checks[0]") != std::string::npos);
  const Run grid = run_cli({"verify", "--set",
                            "checks=[{\"name\": \"cid_check_exact\", \"test_sets\": [[[0, 0.3]]]}]"});
  CHECK(grid.code == cli::kExitParseError);
  CHECK(grid.err.find("checks[0].test_sets[0]") != std::string::npos);
  CHECK(run_cli({"verify"}).code == cli::kExitParseError);  // no checks configured

  // I/O errors.
  CHECK(run_cli({"simulate", (dir / "missing.json").string()}).code == cli::kExitIoError);
  std::ofstream(dir / "a-file") << "x";
  CHECK(run_cli({"simulate", "--out", (dir / "a-file").string()}).code == cli::kExitIoError);

  // A three-trajectory ensemble misses its 4-sigma band for this seed.
  const Run fail = run_cli({"verify", "--seed", "2", "--set", "strategy={\"family\": \"stable\"}", "--set",
                            "checks=[{\"name\": \"covariance_check\", \"M\": 3, \"pairs\": [[1, 2]], "
                            "\"mean_steps\": [1]}]",
                            "--out", (dir / "fail").string()});
  CHECK(fail.code == cli::kExitCheckFailed);
  CHECK(fail.out.find("FAIL covariance_check") != std::string::npos);
  CHECK(Json::parse(slurp(dir / "fail" / "report.json"))["pass"] == false);
}

TEST_CASE("output directory precedence") {
  const fs::path dir = scratch("env");
  const fs::path env_dir = dir / "from-env";
  ::setenv("CIDPRED_OUT_DIR", env_dir.string().c_str(), 1);
  CHECK(run_cli({"simulate", "--set", "run.N=2"}).code == cli::kExitOk);
  CHECK(fs::exists(env_dir / "ensemble.json"));

  const fs::path cfg_dir = dir / "from-config";
  CHECK(run_cli({"simulate", "--set", "run.N=2", "--set", "output.dir=" + cfg_dir.string()}).code ==
        cli::kExitOk);
  CHECK(fs::exists(cfg_dir / "ensemble.json"));

  const fs::path flag_dir = dir / "from-flag";
  CHECK(run_cli({"simulate", "--set", "run.N=2", "--set", "output.dir=" + cfg_dir.string(), "--out",
                 flag_dir.string()})
            .code == cli::kExitOk);
  CHECK(fs::exists(flag_dir / "ensemble.json"));
  ::unsetenv("CIDPRED_OUT_DIR");
}
