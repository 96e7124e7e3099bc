// Acceptance runner: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "cidpred/cli.hpp"
#include "cidpred/diagnostics.hpp"
#include "cidpred/simulate.hpp"
#include "cidpred/strategy.hpp"

namespace fs = std::filesystem;
using namespace cidpred;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Worst asserted record of a report, as "computed vs expected (tol)".
struct Worst {
  double excess = -INFINITY;
  std::string text;
  bool pass = true;
  std::size_t asserted = 0;

  void take(const DiagnosticsReport& r) {
    for (const CheckRecord& rec : r.records) {
      if (!rec.asserted) continue;
      ++asserted;
      pass = pass && rec.pass;
      const double gap = rec.relation == Relation::kEqual ? std::abs(rec.computed - rec.expected)
                                                          : rec.computed - rec.expected;
      const double e = gap - rec.tolerance;
      if (e > excess) {
        excess = e;
        std::ostringstream os;
        os << rec.name << ": " << rec.computed << " vs " << rec.expected << " tol " << rec.tolerance;
        text = os.str();
      }
    }
  }
  std::string summary() const {
    return std::to_string(asserted) + " records, worst " + (text.empty() ? "n/a" : text);
  }
};

std::vector<IntervalSet> random_dyadic_sets(Rng& rng, int count) {
  std::vector<IntervalSet> out;
  for (int s = 0; s < count; ++s) {
    const int level = 1 + static_cast<int>(rng.index(6));
    const std::uint64_t cells = std::uint64_t{1} << level;
    IntervalSet set;
    for (std::uint64_t k = 0; k < cells; ++k) {
      if (rng.uniform() < 0.4) {
        set.push_back({std::ldexp(static_cast<double>(k), -level),
                       std::ldexp(static_cast<double>(k + 1), -level)});
      }
    }
    if (set.empty()) {
      const auto k = static_cast<double>(rng.index(cells));
      set.push_back({std::ldexp(k, -level), std::ldexp(k + 1.0, -level)});
    }
    out.push_back(std::move(set));
  }
  return out;
}

Outcome exact_cid() {
  const std::vector<WeightRule> rules = {DirichletLike{0.5}, DirichletLike{1.0}, DirichletLike{5.0},
                                         ExpSmoothing{0.5},  ExpSmoothing{0.9},  Reinforcement{}};
  Rng rng(101);
  Worst w;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const Strategy s = ConvexStrategy(Measure::uniform(), PartitionScheme::dyadic(), rules[r]);
    const auto& cs = std::get<ConvexStrategy>(s);
    for (int p = 0; p < 20; ++p) {
      const int n = static_cast<int>(rng.index(11));
      const auto sets = random_dyadic_sets(rng, 16);
      std::vector<double> xs;
      if (n > 0) xs = forward_sample(s, n, 1000 + r, static_cast<std::uint64_t>(p)).observations;
      w.take(cid_check_exact(cs, cs.replay(xs), sets));
    }
  }
  return {w.pass && w.asserted == 6 * 20 * 16, w.summary()};
}

Outcome stable_claim() {
  const std::vector<double> as = {-1.0, 0.0, 2.5};
  const std::vector<double> bs = {0.3, 1.0, 4.0};
  const std::vector<double> cs = {0.2, 1.0, 3.0};
  const std::vector<double> ts = {-5.0, -2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.5, 6.0};
  Worst w;
  for (double gamma : {1.0, 2.0}) {
    for (double a : as) {
      for (double b : bs) {
        for (double c : cs) w.take(stable_claim_check(gamma, a, b, c, ts));
      }
    }
  }
  return {w.pass && w.asserted == 2 * 27 * 9, w.summary()};
}

Outcome mc_cid_stable15() {
  const Strategy s = StableStrategy(1.5, 1.0, GeometricSchedule{0.5});
  const double inf = INFINITY;
  const std::vector<IntervalSet> sets = {
      {{-inf, 0.0}}, {{-1.0, 1.0}}, {{0.5, inf}}, {{-inf, -2.0}, {2.0, inf}}, {{-0.25, 0.75}}};
  Worst w;
  for (int n : {0, 2, 5}) {
    std::vector<double> prefix;
    if (n > 0) prefix = forward_sample(s, n, 303, 0).observations;
    w.take(cid_check_mc(s, prefix, sets, 100000, 304 + static_cast<std::uint64_t>(n)));
  }
  return {w.pass && w.asserted == 15, w.summary()};
}

Outcome gaussian_covariance() {
  const StableStrategy s(2.0, 1.0, GeometricSchedule{0.5});
  const auto r = covariance_check(s, 100000, 404, {{1, 2}, {2, 3}}, {});
  std::ostringstream os;
  bool found12 = false, found23 = false;
  for (const CheckRecord& rec : r.records) {
    if (rec.name.find("E(X_1 X_2)") != std::string::npos) found12 = std::abs(rec.expected - 0.70711) < 1e-5;
    if (rec.name.find("E(X_2 X_3)") != std::string::npos) found23 = std::abs(rec.expected - 0.85355) < 1e-5;
  }
  Worst w;
  w.take(r);
  return {w.pass && found12 && found23, w.summary()};
}

Outcome fn_law() {
  Worst w;
  for (double gamma : {1.0, 2.0}) {
    const StableStrategy s(gamma, 1.0, GeometricSchedule{0.5});
    w.take(fn_limit_check(s, 100000, 505 + static_cast<std::uint64_t>(gamma), {1, 5, 20}));
  }
  return {w.pass && w.asserted == 6, w.summary()};
}

Outcome dirichlet_bound() {
  const PartitionScheme scheme = PartitionScheme::dyadic();
  const Strategy s = ConvexStrategy(Measure::uniform(), scheme, DirichletLike{1.0});
  std::vector<int> grid(201);
  for (int n = 0; n <= 200; ++n) grid[static_cast<std::size_t>(n)] = n;
  Worst w;
  for (int t = 0; t < 10; ++t) {
    const auto xs = forward_sample(s, 200, 606, static_cast<std::uint64_t>(t)).observations;
    w.take(dirichlet_comparison(1.0, Measure::uniform(), scheme, xs, grid));
  }
  const double bound200 = dirichlet_distance_bound(scheme, 1.0, 200);
  std::ostringstream os;
  os << w.summary() << "; bound(200) = " << bound200;
  return {w.pass && w.asserted >= 10 * 201 && bound200 < 0.01, os.str()};
}

Outcome tv_bound() {
  // epsilon = 2 makes the criterion always hold, so q_n = b_n = 1 - 2^-(n+1).
  Reinforcement rule;
  rule.epsilon = 2.0;
  const Strategy s = ConvexStrategy(Measure::uniform(), PartitionScheme::dyadic(), rule);
  const auto& cs = std::get<ConvexStrategy>(s);
  const auto tr = forward_sample(s, 110, 707, 0);
  bool weights_ok = true;
  for (std::size_t j = 1; j < tr.weights.size(); ++j) {
    weights_ok = weights_ok && tr.weights[j] == 1.0 - std::ldexp(1.0, -static_cast<int>(j) - 1);
  }
  const auto r = tv_convergence_check(cs, tr.observations, {2, 5, 10}, {1, 10, 100});
  Worst w;
  w.take(r);
  bool decreasing = true;
  for (int k : {1, 10, 100}) {
    double prev = INFINITY;
    for (int n : {2, 5, 10}) {
      const double b = tv_step_bound(tr.weights, n, k);
      decreasing = decreasing && b < prev;
      prev = b;
    }
  }
  double prev = INFINITY;
  for (int n : {2, 5, 10}) {
    const double b = tv_sup_bound(tr.weights, n, *tail_majorant(rule, static_cast<int>(tr.weights.size())));
    decreasing = decreasing && b < prev;
    prev = b;
  }
  return {w.pass && w.asserted >= 9 && weights_ok && decreasing,
          w.summary() + (decreasing ? "; bounds decreasing in n" : "; bounds NOT decreasing")};
}

Outcome singularity() {
  const PartitionScheme scheme = PartitionScheme::dyadic();
  Worst w;
  for (double c : {0.5, 1.0, 5.0}) {
    const Strategy s = ConvexStrategy(Measure::uniform(), scheme, DirichletLike{c});
    const auto xs = forward_sample(s, 100, 808, 0).observations;
    w.take(atom_mass_report(c, Measure::uniform(), scheme, xs, 100));
  }
  return {w.pass && w.asserted == 3 * 2 * 101, w.summary()};
}

Outcome oracle_equivalence() {
  Rng rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    WeightRule rule;
    switch (rng.index(3)) {
      case 0: rule = DirichletLike{0.1 + 10.0 * rng.uniform()}; break;
      case 1: rule = ExpSmoothing{0.05 + 0.9 * rng.uniform()}; break;
      default: {
        Reinforcement r;
        r.criterion = static_cast<Criterion>(rng.index(3));
        r.epsilon = 0.01 + 0.3 * rng.uniform();
        r.q0 = 0.1 + 0.8 * rng.uniform();
        rule = r;
      }
    }
    const Measure base = mixture(std::vector<double>{0.5, 0.5},
                                 std::vector<Measure>{Measure::uniform(),
                                                      testing::random_measure(rng, 5, false)});
    const auto scheme = PartitionScheme::dyadic(1 + static_cast<int>(rng.index(3)));
    const ConvexStrategy s(base, scheme, rule);
    std::vector<double> xs(1 + rng.index(40));
    for (double& x : xs) {
      x = rng.uniform() < 0.3 ? std::ldexp(static_cast<double>(rng.index(33)), -5) : rng.uniform();
    }
    auto st = s.initial_state();
    for (double x : xs) st = convex_update(s, st, x);
    worst = std::max(worst, tv_distance(convex_predictive(s, st), closed_form_oracle(xs, rule, base, scheme)));
  }
  std::ostringstream os;
  os << "max tv over 100 configurations = " << worst;
  return {worst <= 1e-9, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "cidpred-acceptance-determinism";
  fs::remove_all(root);
  const std::string config = (root / "config.json").string();
  fs::create_directories(root);
  std::ofstream(config) << R"({
  "strategy": {"family": "convex", "rule": {"kind": "reinforcement", "criterion": "ks_band"}},
  "run": {"N": 60, "M": 200, "seed": 42},
  "output": {"all_trajectories": true},
  "checks": [
    {"name": "cid_check_exact", "n": 6, "prefixes": 2},
    {"name": "cid_check_mc", "n": 3, "M": 5000},
    {"name": "tv_convergence_check", "n_grid": [2, 5], "k_grid": [1, 10]},
    {"name": "empirical_convergence", "n_grid": [10, 60], "sd_trajectories": 20}
  ]
})";
  std::vector<fs::path> dirs;
  for (const char* tag : {"a", "b"}) {
    const fs::path out = root / (std::string("run-") + tag);
    std::vector<std::string> args = {"cidpred", "run", "--config", config, "--out", out.string(),
                                     "--deterministic"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream sink, err;
    const int rc = cli::main(static_cast<int>(argv.size()), argv.data(), sink, err);
    if (rc != 0) return {false, "cli exit " + std::to_string(rc) + ": " + err.str()};
    dirs.push_back(out);
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t other = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
  if (names.size() != other) return {false, "different file sets"};
  bool has_report = false, has_csv = false;
  for (const auto& n : names) {
    if (slurp(dirs[0] / n) != slurp(dirs[1] / n)) return {false, n + " differs"};
    has_report = has_report || n == "report.json";
    has_csv = has_csv || n.ends_with(".csv");
  }
  fs::remove_all(root);
  return {has_report && has_csv,
          std::to_string(names.size()) + " files byte-identical across two runs"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"exact c.i.d. identity, convex strategies", 10, exact_cid},
      {"stable convolution claim by quadrature", 10, stable_claim},
      {"Monte Carlo c.i.d., gamma = 1.5", 60, mc_cid_stable15},
      {"Gaussian covariance E(X_n X_m)", 60, gaussian_covariance},
      {"law of f_n, gamma in {1, 2}", 120, fn_law},
      {"Dirichlet-like vs Dirichlet distance bound", 60, dirichlet_bound},
      {"total variation bound, q_n = 1 - 2^-(n+1)", 30, tv_bound},
      {"atom masses of beta_n and sigma_n", 5, singularity},
      {"incremental update vs closed-form oracle", 10, oracle_equivalence},
      {"byte-identical outputs for identical config and seed", 120, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s [%2zu] %s (%.2f s of %.0f s): %s%s\n", pass ? "PASS" : "FAIL", i + 1, c.name, secs,
                c.budget_s, o.detail.c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
