#include "cidpred/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "cidpred/output.hpp"

namespace cidpred::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxEnsembleCells = 2e7;

// Typed access to one check's parameters.
class Params {
 public:
  Params(const CheckConfig& c, std::size_t index)
      : j_(c.params), path_("checks[" + std::to_string(index) + "]") {}

  std::string at(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  long long integer(const std::string& key, long long fallback, long long lo, long long hi) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      throw ConfigError(at(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(at(key), "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<int> ints(const std::string& key, std::vector<int> fallback, int lo) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer() || v[i].get<long long>() < lo || v[i].get<long long>() > 10000000) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]",
                          "expected an integer >= " + std::to_string(lo));
      }
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  std::vector<std::pair<int, int>> pairs(const std::string& key,
                                         std::vector<std::pair<int, int>> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected a list of [n, m]");
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Json& p = v[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer() ||
          p[0].get<int>() < 1 || p[1].get<int>() < 1) {
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected [n, m] with n, m >= 1");
      }
      out.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    return out;
  }

  // Sets as lists of [lo, hi]; null ends are infinite when `real_line`.
  std::vector<IntervalSet> sets(const std::string& key, std::vector<IntervalSet> fallback,
                                bool real_line) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a non-empty list of sets");
    std::vector<IntervalSet> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = at(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_array() || v[i].empty()) throw ConfigError(p, "expected a list of [lo, hi]");
      IntervalSet set;
      for (std::size_t k = 0; k < v[i].size(); ++k) {
        const Json& iv = v[i][k];
        const std::string pk = p + "[" + std::to_string(k) + "]";
        if (!iv.is_array() || iv.size() != 2) throw ConfigError(pk, "expected [lo, hi]");
        const auto end = [&](const Json& e, double inf) {
          if (e.is_null() && real_line) return inf;
          if (!e.is_number()) throw ConfigError(pk, real_line ? "expected numbers or null" : "expected numbers");
          return e.get<double>();
        };
        const Interval interval{end(iv[0], -kInf), end(iv[1], kInf)};
        if (!(interval.lo < interval.hi)) throw ConfigError(pk, "need lo < hi");
        if (!real_line && (interval.lo < 0.0 || interval.hi > 1.0)) {
          throw ConfigError(pk, "must lie in [0, 1]");
        }
        set.push_back(interval);
      }
      out.push_back(std::move(set));
    }
    return out;
  }

  std::uint64_t seed(std::uint64_t fallback) const {
    if (!has("seed")) return fallback;
    const Json& v = j_.at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(at("seed"), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

 private:
  const Json& j_;
  std::string path_;
};

std::vector<IntervalSet> dyadic_sets(int level) {
  std::vector<IntervalSet> out;
  for (int k = 0; k < (1 << level); ++k) {
    out.push_back({{std::ldexp(k, -level), std::ldexp(k + 1, -level)}});
  }
  return out;
}

// Folds several reports of one check into one, prefixing record and curve names.
DiagnosticsReport merge(std::string check, std::vector<std::pair<std::string, DiagnosticsReport>> parts) {
  DiagnosticsReport out;
  out.check = std::move(check);
  if (parts.size() == 1) return std::move(parts.front().second);
  auto inputs = Json::array();
  for (auto& [label, r] : parts) {
    inputs.push_back(Json{{"label", label}, {"inputs", r.inputs}});
    for (CheckRecord& rec : r.records) {
      rec.name = label + ": " + rec.name;
      out.add(std::move(rec));
    }
    for (Curve& c : r.curves) {
      c.name = label + "_" + c.name;
      out.curves.push_back(std::move(c));
    }
    if (out.note.empty()) out.note = r.note;
  }
  out.inputs = Json{{"parts", inputs}};
  return out;
}

const ConvexStrategy& require_convex(const Strategy& s, const std::string& path, const std::string& check) {
  if (const auto* c = std::get_if<ConvexStrategy>(&s)) return *c;
  throw ConfigError(path, check + " needs strategy.family = convex");
}

const StableStrategy& require_stable(const Strategy& s, const std::string& path, const std::string& check) {
  if (const auto* c = std::get_if<StableStrategy>(&s)) return *c;
  throw ConfigError(path, check + " needs strategy.family = stable");
}

std::vector<double> simulate_prefix(const Strategy& s, int n, std::uint64_t seed, std::uint64_t index) {
  if (n == 0) return {};
  return forward_sample(s, n, seed, index).observations;
}

void check_prefix(const std::vector<double>& xs, const std::string& path) {
  for (double x : xs) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(path, "observations must lie in [0, 1]");
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = Json::object();
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    j = parse_json_text(buf.str(), path);
  }
  for (const std::string& o : overrides) apply_override(j, o);
  return parse_config(j);
}

std::vector<PlannedCheck> plan_checks(const ExperimentConfig& config) {
  const auto strategy = std::make_shared<const Strategy>(build_strategy(config));
  const auto base = std::make_shared<const Measure>(build_base(config));
  const auto scheme = std::make_shared<const PartitionScheme>(build_partition(config));
  const RunConfig run = config.run;
  std::vector<PlannedCheck> plan;

  for (std::size_t i = 0; i < config.checks.size(); ++i) {
    const CheckConfig& chk = config.checks[i];
    const Params p(chk, i);
    const std::string path = "checks[" + std::to_string(i) + "]";
    const std::uint64_t seed = p.seed(run.seed);
    const std::string& name = chk.name;
    std::function<DiagnosticsReport()> fn;

    if (name == "cid_check_exact") {
      const ConvexStrategy& s = require_convex(*strategy, path, name);
      const auto sets = p.sets("test_sets", dyadic_sets(3), false);
      for (std::size_t k = 0; k < sets.size(); ++k) {
        for (const Interval& iv : sets[k]) {
          if (!s.scheme().is_grid_point(iv.lo) || !s.scheme().is_grid_point(iv.hi)) {
            throw ConfigError(p.at("test_sets") + "[" + std::to_string(k) + "]",
                              "set is not a union of partition cells");
          }
        }
      }
      std::vector<std::vector<double>> prefixes;
      if (p.has("prefix")) {
        prefixes.push_back(p.numbers("prefix", {}));
        check_prefix(prefixes.back(), p.at("prefix"));
      } else {
        const int n = static_cast<int>(p.integer("n", 5, 0, 100000));
        const int count = static_cast<int>(p.integer("prefixes", 1, 1, 100000));
        for (int k = 0; k < count; ++k) prefixes.push_back(simulate_prefix(*strategy, n, seed, k));
      }
      fn = [strategy, sets, prefixes, name] {
        std::vector<std::pair<std::string, DiagnosticsReport>> parts;
        const auto& s = std::get<ConvexStrategy>(*strategy);
        for (std::size_t k = 0; k < prefixes.size(); ++k) {
          parts.emplace_back("prefix" + std::to_string(k), cid_check_exact(s, s.replay(prefixes[k]), sets));
        }
        return merge(name, std::move(parts));
      };
    } else if (name == "stable_claim_check") {
      const double default_gamma =
          std::holds_alternative<StableStrategy>(*strategy) ? std::get<StableStrategy>(*strategy).gamma() : 2.0;
      const auto gammas = p.numbers("gamma", {default_gamma});
      if (gammas.size() != 1 || (gammas[0] != 1.0 && gammas[0] != 2.0)) {
        throw ConfigError(p.at("gamma"), "must be 1 or 2 (closed-form laws only)");
      }
      const auto as = p.numbers("a", {0.0});
      const auto bs = p.numbers("b", {1.0});
      const auto cs = p.numbers("c", {1.0});
      for (double b : bs) if (!(b > 0.0)) throw ConfigError(p.at("b"), "must be > 0");
      for (double c : cs) if (!(c > 0.0)) throw ConfigError(p.at("c"), "must be > 0");
      const auto ts = p.numbers("test_points", {-2.0, -1.0, 0.0, 1.0, 2.0});
      const double gamma = gammas[0];
      fn = [=] {
        std::vector<std::pair<std::string, DiagnosticsReport>> parts;
        for (double a : as) {
          for (double b : bs) {
            for (double c : cs) {
              parts.emplace_back("a=" + format_number(a) + ",b=" + format_number(b) + ",c=" + format_number(c),
                                 stable_claim_check(gamma, a, b, c, ts));
            }
          }
        }
        return merge(name, std::move(parts));
      };
    } else if (name == "cid_check_mc") {
      const bool real_line = std::holds_alternative<StableStrategy>(*strategy);
      const std::vector<IntervalSet> fallback =
          real_line ? std::vector<IntervalSet>{{{-kInf, 0.0}}, {{-1.0, 1.0}}, {{0.5, kInf}}}
                    : dyadic_sets(2);
      const auto sets = p.sets("test_sets", fallback, real_line);
      const int M = static_cast<int>(p.integer("M", run.M, 1, 100000000));
      std::vector<double> prefix;
      if (p.has("prefix")) {
        prefix = p.numbers("prefix", {});
        if (!real_line) check_prefix(prefix, p.at("prefix"));
      } else {
        const int n = static_cast<int>(p.integer("n", 2, 0, 100000));
        prefix = simulate_prefix(*strategy, n, seed, 0);
      }
      if (const auto* st = std::get_if<StableStrategy>(strategy.get())) {
        if (!st->can_update(static_cast<int>(prefix.size()))) {
          throw ConfigError(p.at("n"), "prefix length exhausts the explicit schedule");
        }
      }
      fn = [=] { return cid_check_mc(*strategy, prefix, sets, M, seed); };
    } else if (name == "tv_convergence_check") {
      require_convex(*strategy, path, name);
      const auto n_grid = p.ints("n_grid", {2, 5, 10}, 0);
      const auto k_grid = p.ints("k_grid", {1, 10, 100}, 0);
      const int horizon = *std::max_element(n_grid.begin(), n_grid.end()) +
                          *std::max_element(k_grid.begin(), k_grid.end());
      fn = [=] {
        const auto xs = simulate_prefix(*strategy, horizon, seed, 0);
        return tv_convergence_check(std::get<ConvexStrategy>(*strategy), xs, n_grid, k_grid);
      };
    } else if (name == "dirichlet_comparison") {
      const ConvexStrategy& s = require_convex(*strategy, path, name);
      const auto* rule = std::get_if<DirichletLike>(&s.rule());
      if (rule == nullptr) throw ConfigError("strategy.rule", name + " needs the dirichlet rule");
      const double c = rule->c;
      const int n_max = static_cast<int>(p.integer("n_max", run.N, 0, 100000));
      std::vector<int> all(static_cast<std::size_t>(n_max) + 1);
      for (int n = 0; n <= n_max; ++n) all[static_cast<std::size_t>(n)] = n;
      const auto grid = p.ints("n_grid", all, 0);
      const int trajectories = static_cast<int>(p.integer("trajectories", 1, 1, 100000));
      const int horizon = *std::max_element(grid.begin(), grid.end());
      fn = [=] {
        std::vector<std::pair<std::string, DiagnosticsReport>> parts;
        for (int k = 0; k < trajectories; ++k) {
          const auto xs = simulate_prefix(*strategy, horizon, seed, k);
          parts.emplace_back("traj" + std::to_string(k), dirichlet_comparison(c, *base, *scheme, xs, grid));
        }
        return merge(name, std::move(parts));
      };
    } else if (name == "atom_mass_report") {
      double c = 0.0;
      if (const auto* s = std::get_if<ConvexStrategy>(strategy.get())) {
        const auto* rule = std::get_if<DirichletLike>(&s->rule());
        if (rule == nullptr) throw ConfigError("strategy.rule", name + " needs the dirichlet rule");
        c = rule->c;
      } else if (const auto* b = std::get_if<DirichletBaseline>(strategy.get())) {
        c = b->c();
      } else {
        throw ConfigError(path, name + " needs a convex or dirichlet-baseline strategy");
      }
      const int n_max = static_cast<int>(p.integer("n_max", run.N, 0, 100000));
      fn = [=] {
        const auto xs = simulate_prefix(*strategy, n_max, seed, 0);
        return atom_mass_report(c, *base, *scheme, xs, n_max);
      };
    } else if (name == "covariance_check") {
      const StableStrategy& s = require_stable(*strategy, path, name);
      if (s.gamma() != 2.0) throw ConfigError("strategy.gamma", name + " needs gamma = 2");
      const auto pairs = p.pairs("pairs", {{1, 2}, {2, 3}});
      const auto means = p.ints("mean_steps", {1, 2, 5}, 1);
      const int M = static_cast<int>(p.integer("M", run.M, 2, 100000000));
      const int threads = run.threads;
      fn = [=] { return covariance_check(std::get<StableStrategy>(*strategy), M, seed, pairs, means, threads); };
    } else if (name == "fn_limit_check") {
      const StableStrategy& s = require_stable(*strategy, path, name);
      if (s.gamma() != 1.0 && s.gamma() != 2.0) {
        throw ConfigError("strategy.gamma", name + " needs gamma 1 or 2");
      }
      const auto ns = p.ints("n", {1, 5, 20}, 0);
      const int M = static_cast<int>(p.integer("M", run.M, 1, 100000000));
      const int threads = run.threads;
      fn = [=] { return fn_limit_check(std::get<StableStrategy>(*strategy), M, seed, ns, threads); };
    } else if (name == "empirical_convergence") {
      require_convex(*strategy, path, name);
      const auto grid = p.ints("n_grid", {10, 100, 1000}, 1);
      const int sd = static_cast<int>(p.integer("sd_trajectories", 0, 0, 1000000));
      const int horizon = *std::max_element(grid.begin(), grid.end());
      fn = [=] {
        const auto xs = simulate_prefix(*strategy, horizon, seed, 0);
        return empirical_convergence(std::get<ConvexStrategy>(*strategy), xs, grid, sd, seed);
      };
    } else {
      throw ConfigError(path + ".name", "unknown check \"" + name + "\"");
    }
    plan.push_back({name, std::move(fn)});
  }
  return plan;
}

namespace {

struct Common {
  std::string config;
  std::string positional;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  bool deterministic = false;
  bool json = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config_path", c.positional, "Experiment config (JSON)");
  sub->add_option("--config", c.config, "Experiment config (JSON)");
  sub->add_option("--set", c.sets, "Override a config field, KEY=VALUE with a dotted KEY");
  sub->add_option("--seed", c.seed, "Master seed (overrides run.seed)");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_flag("--deterministic", c.deterministic,
                "Omit run-dependent metadata so identical inputs give identical bytes");
  sub->add_flag("--json", c.json, "Print the summary as JSON");
}

ExperimentConfig resolve(Common& c) {
  if (!c.config.empty() && !c.positional.empty() && c.config != c.positional) {
    throw ConfigError("--config", "given twice with different paths");
  }
  const std::string path = c.config.empty() ? c.positional : c.config;
  std::vector<std::string> overrides = c.sets;
  if (c.seed_given) overrides.push_back("run.seed=" + std::to_string(c.seed));
  return load_config(path, overrides);
}

fs::path output_dir(const Common& c, const ExperimentConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  if (const char* env = std::getenv("CIDPRED_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "cidpred-out";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write(const fs::path& dir, const std::string& name, const std::string& text) {
  try {
    write_file(dir, name, text);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

Json environment(const Common& c, const ExperimentConfig& cfg) {
  Json env;
  env["deterministic"] = c.deterministic;
  env["note"] = "ensemble reductions run in trajectory-index order; results do not depend on threads";
  if (!c.deterministic) {
    env["threads"] = cfg.run.threads;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    env["generated_at"] = buf;
  }
  return env;
}

std::string summary_line(const DiagnosticsReport& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS " : "FAIL ") << r.check << ": " << (r.asserted_count() - r.failed_count())
     << "/" << r.asserted_count() << " asserted records passed";
  const std::size_t trends = r.records.size() - r.asserted_count();
  if (trends > 0) os << ", " << trends << " reported only";
  return os.str();
}

// Runs the planned checks, writes report.json and curve CSVs.
int do_verify(const Common& c, const ExperimentConfig& cfg, const std::string& command,
              const std::vector<PlannedCheck>& plan, std::ostream& out, bool write_outputs = true) {
  const fs::path dir = output_dir(c, cfg);
  std::vector<DiagnosticsReport> reports;
  for (const PlannedCheck& chk : plan) reports.push_back(chk.run());

  bool pass = true;
  Json checks = Json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    checks.push_back(to_json(r));
  }
  Json report;
  report["tool"] = "cidpred";
  report["command"] = command;
  report["config_hash"] = config_hash(cfg);
  report["config"] = serialize(cfg);
  report["environment"] = environment(c, cfg);
  report["checks"] = checks;
  report["pass"] = pass;

  if (write_outputs) {
    ensure_dir(dir);
    write(dir, "report.json", report.dump(2) + "\n");
    for (std::size_t i = 0; i < reports.size(); ++i) {
      for (const Curve& curve : reports[i].curves) {
        write(dir, "check" + std::to_string(i) + "_" + reports[i].check + "_" + curve.name + ".csv", curve_csv(curve));
      }
    }
  }
  if (c.json) {
    Json s = Json::array();
    for (const auto& r : reports) {
      s.push_back({{"check", r.check}, {"pass", r.pass}, {"asserted", r.asserted_count()},
                   {"failed", r.failed_count()}});
    }
    out << Json{{"pass", pass}, {"checks", s}, {"out", dir.string()}}.dump() << "\n";
  } else {
    for (const auto& r : reports) out << summary_line(r) << "\n";
  }
  return pass ? kExitOk : kExitCheckFailed;
}

int do_simulate(const Common& c, const ExperimentConfig& cfg, std::ostream& out) {
  if (static_cast<double>(cfg.run.M) * cfg.run.N > kMaxEnsembleCells) {
    throw ConfigError("run", "M * N exceeds 2e7 stored values");
  }
  const fs::path dir = output_dir(c, cfg);
  const Strategy strategy = build_strategy(cfg);
  EnsembleOptions o;
  o.M = cfg.run.M;
  o.N = cfg.run.N;
  o.seed = cfg.run.seed;
  o.threads = cfg.run.threads;
  o.keep = cfg.output.all_trajectories ? cfg.run.M : 1;
  if (o.N >= 2) o.pairs = {{1, 2}};
  const EnsembleStats stats = ensemble(strategy, o);

  ensure_dir(dir);
  if (cfg.output.trajectories) write(dir, "trajectories.csv", trajectories_csv(stats.kept));
  if (cfg.output.ensemble) {
    write(dir, "ensemble.csv", ensemble_csv(stats));
    Json j = ensemble_json(stats);
    j["config_hash"] = config_hash(cfg);
    write(dir, "ensemble.json", j.dump(2) + "\n");
  }
  if (c.json) {
    out << Json{{"simulated", {{"M", stats.M}, {"N", stats.N}, {"seed", stats.seed}}}, {"out", dir.string()}}.dump()
        << "\n";
  } else {
    out << "simulated " << stats.M << " trajectories of " << stats.N << " steps (seed "
        << stats.seed << ") -> " << dir.string() << "\n";
  }
  return kExitOk;
}

std::vector<PlannedCheck> compare_plan(const ExperimentConfig& cfg) {
  if (cfg.strategy.family != Family::kConvex ||
      !std::holds_alternative<DirichletLike>(cfg.strategy.rule)) {
    throw ConfigError("strategy", "compare needs a convex strategy with the dirichlet rule");
  }
  ExperimentConfig with = cfg;
  with.checks = {{"dirichlet_comparison", Json{{"trajectories", std::min(cfg.run.M, 100)}}},
                 {"atom_mass_report", Json::object()}};
  return plan_checks(with);
}

void list_checks(bool json, std::ostream& out) {
  const auto& cat = check_catalog();
  if (json) {
    Json arr = Json::array();
    for (const CheckInfo& k : cat) {
      Json params = Json::array();
      for (const auto& [name, doc] : k.parameters) params.push_back({{"name", name}, {"doc", doc}});
      params.push_back({{"name", "seed"}, {"doc", "master seed for this check (default run.seed)"}});
      arr.push_back({{"name", k.name}, {"summary", k.summary}, {"parameters", params}});
    }
    out << arr.dump(2) << "\n";
    return;
  }
  for (const CheckInfo& k : cat) {
    out << k.name << "\n    " << k.summary << "\n";
    for (const auto& [name, doc] : k.parameters) out << "      " << name << ": " << doc << "\n";
  }
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior-free predictive strategies: simulation and verification"};
  app.require_subcommand(1);
  Common common;
  auto* simulate = app.add_subcommand("simulate", "Simulate trajectories under the configured strategy");
  auto* verify = app.add_subcommand("verify", "Run the configured checks and write report.json");
  auto* compare = app.add_subcommand("compare", "Compare the Dirichlet-like strategy with the Dirichlet baseline");
  auto* run = app.add_subcommand("run", "simulate, then verify");
  auto* list = app.add_subcommand("list-checks", "List the available checks");
  for (auto* sub : {simulate, verify, compare, run}) add_common(sub, common);
  bool list_json = false;
  list->add_flag("--json", list_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParseError;
  }
  for (auto* sub : {simulate, verify, compare, run}) {
    if (sub->parsed() && sub->count("--seed") > 0) common.seed_given = true;
  }

  try {
    if (list->parsed()) {
      list_checks(list_json, out);
      return kExitOk;
    }
    ExperimentConfig cfg = resolve(common);
    if (simulate->parsed()) return do_simulate(common, cfg, out);
    if (compare->parsed()) return do_verify(common, cfg, "compare", compare_plan(cfg), out);
    const auto plan = plan_checks(cfg);
    if (verify->parsed()) {
      if (plan.empty()) throw ConfigError("checks", "no checks configured");
      return do_verify(common, cfg, "verify", plan, out);
    }
    const int sim = do_simulate(common, cfg, out);
    if (sim != kExitOk) return sim;
    if (plan.empty()) return kExitOk;
    return do_verify(common, cfg, "run", plan, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace cidpred::cli
