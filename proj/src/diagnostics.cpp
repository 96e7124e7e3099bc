#include "cidpred/diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cidpred/stats.hpp"

namespace cidpred {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kExactTol = 1e-9;
constexpr double kQuadratureTol = 1e-6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << x;
  return os.str();
}

std::string describe(const IntervalSet& a) {
  std::string s;
  for (const Interval& iv : a) {
    if (!s.empty()) s += " u ";
    s += "[" + fmt(iv.lo) + ", " + fmt(iv.hi) + ")";
  }
  return s.empty() ? "{}" : s;
}

std::string describe_real(const IntervalSet& a) {
  std::string s;
  for (const Interval& iv : a) {
    if (!s.empty()) s += " u ";
    s += "(" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]";
  }
  return s;
}

nlohmann::ordered_json sets_json(const std::vector<IntervalSet>& sets) {
  auto out = nlohmann::ordered_json::array();
  for (const IntervalSet& a : sets) {
    auto set = nlohmann::ordered_json::array();
    for (const Interval& iv : a) set.push_back({iv.lo, iv.hi});
    out.push_back(set);
  }
  return out;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void require_nonnegative(const std::vector<int>& grid, const char* what) {
  for (int n : grid) {
    if (n < 0) throw std::invalid_argument(std::string(what) + ": negative step in grid");
  }
}

// Predictives of the strategy at the requested steps along xs.
std::map<int, Measure> predictives_at(const ConvexStrategy& s, std::span<const double> xs,
                                      const std::set<int>& steps, ConvexState* final_state) {
  std::map<int, Measure> out;
  ConvexState st = s.initial_state();
  const int last = steps.empty() ? 0 : *steps.rbegin();
  for (int n = 0;; ++n) {
    if (steps.count(n) != 0) out.emplace(n, s.predictive(st));
    if (n == last) break;
    st = s.update(std::move(st), xs[static_cast<std::size_t>(n)]);
  }
  if (final_state != nullptr) *final_state = std::move(st);
  return out;
}

// Monotone trend records over consecutive points of a curve.
void add_trend(DiagnosticsReport& report, const Curve& curve, const std::string& label) {
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& prev = curve.points[i - 1];
    const auto& cur = curve.points[i];
    report.add(trend_record(label + " n=" + fmt(cur.n) + " vs n=" + fmt(prev.n), prev.value,
                            cur.value, cur.value <= prev.value, "non-increasing trend"));
  }
}

// Density of S(a, b) for gamma in {1, 2}.
double closed_form_density(double gamma, double a, double b, double y) {
  if (gamma == 2.0) {
    return std::exp(-(y - a) * (y - a) / (2.0 * b)) / std::sqrt(2.0 * std::numbers::pi * b);
  }
  return (2.0 * b / std::numbers::pi) / (b * b + 4.0 * (y - a) * (y - a));
}

double interval_prob(const std::function<double(double)>& cdf, const IntervalSet& a) {
  double p = 0.0;
  for (const Interval& iv : a) {
    const double hi = std::isinf(iv.hi) && iv.hi > 0 ? 1.0 : cdf(iv.hi);
    const double lo = std::isinf(iv.lo) && iv.lo < 0 ? 0.0 : cdf(iv.lo);
    p += hi - lo;
  }
  return p;
}

bool in_real_set(const IntervalSet& a, double y) {
  for (const Interval& iv : a) {
    if (y > iv.lo && y <= iv.hi) return true;
  }
  return false;
}

}  // namespace

std::string tier_name(Tier t) {
  switch (t) {
    case Tier::kExact:
      return "exact";
    case Tier::kQuadrature:
      return "quadrature";
    case Tier::kKsCritical:
      return "KS-critical";
    case Tier::kClt4Sigma:
      return "CLT-4sigma";
    case Tier::kTrend:
      return "trend";
  }
  return "unknown";
}

std::string relation_name(Relation r) { return r == Relation::kEqual ? "eq" : "le"; }

CheckRecord make_record(std::string name, double expected, double computed, double tolerance,
                        Tier tier, Relation relation, std::int64_t samples) {
  CheckRecord r;
  r.name = std::move(name);
  r.expected = expected;
  r.computed = computed;
  r.tolerance = tolerance;
  r.tier = tier;
  r.relation = relation;
  r.samples = samples;
  r.asserted = tier != Tier::kTrend;
  if (relation == Relation::kEqual) {
    r.pass = std::abs(computed - expected) <= tolerance;
  } else {
    r.pass = computed <= expected + tolerance;
  }
  return r;
}

CheckRecord trend_record(std::string name, double expected, double computed, bool holds,
                         std::string note) {
  CheckRecord r;
  r.name = std::move(name);
  r.expected = expected;
  r.computed = computed;
  r.tolerance = 0.0;
  r.tier = Tier::kTrend;
  r.relation = Relation::kAtMost;
  r.asserted = false;
  r.pass = holds;
  r.note = std::move(note);
  return r;
}

void DiagnosticsReport::add(CheckRecord r) {
  if (r.asserted && !r.pass) pass = false;
  records.push_back(std::move(r));
}

std::size_t DiagnosticsReport::asserted_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.asserted; }));
}

std::size_t DiagnosticsReport::failed_count() const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [](const CheckRecord& r) { return r.asserted && !r.pass; }));
}

nlohmann::ordered_json to_json(const CheckRecord& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["expected"] = r.expected;
  j["computed"] = r.computed;
  j["tolerance"] = r.tolerance;
  j["tier"] = tier_name(r.tier);
  j["relation"] = relation_name(r.relation);
  j["asserted"] = r.asserted;
  j["pass"] = r.pass;
  j["samples"] = r.samples;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

nlohmann::ordered_json to_json(const DiagnosticsReport& r) {
  nlohmann::ordered_json j;
  j["check"] = r.check;
  j["inputs"] = r.inputs;
  auto records = nlohmann::ordered_json::array();
  for (const CheckRecord& rec : r.records) records.push_back(to_json(rec));
  j["records"] = std::move(records);
  if (!r.note.empty()) j["note"] = r.note;
  j["pass"] = r.pass;
  return j;
}

// ---------------------------------------------------------------------------

double tv_step_bound(std::span<const double> q, int n, int k) {
  if (n < 0 || k < 0 || static_cast<std::size_t>(n + k) > q.size()) {
    throw std::out_of_range("tv bound: steps beyond the observed weights");
  }
  double prod = 1.0;
  double sum = 0.0;
  for (int j = n; j < n + k; ++j) {
    prod *= q[static_cast<std::size_t>(j)];
    sum += 1.0 - q[static_cast<std::size_t>(j)];
  }
  return 1.0 - prod + sum;
}

double tv_sup_bound(std::span<const double> q, int n, double tail) {
  const int horizon = static_cast<int>(q.size());
  if (n < 0 || n > horizon) throw std::out_of_range("tv bound: step beyond the horizon");
  double prod = 1.0;
  double sum = 0.0;
  for (int j = n; j < horizon; ++j) {
    prod *= q[static_cast<std::size_t>(j)];
    sum += 1.0 - q[static_cast<std::size_t>(j)];
  }
  const double tail_prod = std::max(0.0, 1.0 - tail);
  return 1.0 - prod * tail_prod + sum + tail;
}

double dirichlet_distance_bound(const PartitionScheme& scheme, double c, int n) {
  double sum = 0.0;
  for (int i = 1; i <= n; ++i) sum += scheme.mesh(i - 1);
  return sum / (n + c);
}

double stable_cdf_numeric(double gamma, double a, double b, double t) {
  if (!(gamma > 0.0 && gamma <= 2.0)) throw std::invalid_argument("stable: gamma out of range");
  if (b == 0.0) return t >= a ? 1.0 : 0.0;
  // With v = u (b/2)^(1/gamma):
  //   F(t) = 1/2 + (1/pi) int_0^inf sin(v z) exp(-v^gamma) / v dv,  z = (t - a) / s.
  const double s = std::pow(0.5 * b, 1.0 / gamma);
  const double z = (t - a) / s;
  if (z == 0.0) return 0.5;
  const double upper = std::pow(40.0, 1.0 / gamma);  // exp(-40) < 5e-18
  const auto f = [z, gamma](double v) {
    if (v == 0.0) return z;
    return std::sin(v * z) * std::exp(-std::pow(v, gamma)) / v;
  };
  // Fixed Gauss-Legendre on pieces no longer than half a period; the first
  // piece is graded towards 0, where v^gamma is not smooth for gamma < 2.
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const int pieces = std::clamp(
      static_cast<int>(std::ceil(upper * std::abs(z) / std::numbers::pi)), 64, 1 << 20);
  const double h = upper / pieces;
  double total = 0.0;
  double lo = std::ldexp(h, -40);
  total += f(0.0) * lo;
  for (int k = 39; k >= 0; --k) {
    const double hi = std::ldexp(h, -k);
    total += Rule::integrate(f, lo, hi);
    lo = hi;
  }
  for (int i = 1; i < pieces; ++i) total += Rule::integrate(f, h * i, h * (i + 1));
  return std::clamp(0.5 + total / std::numbers::pi, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

DiagnosticsReport cid_check_exact(const ConvexStrategy& strategy, const ConvexState& state,
                                  const std::vector<IntervalSet>& test_sets) {
  DiagnosticsReport report;
  report.check = "cid_check_exact";
  report.inputs["n"] = state.n();
  report.inputs["rule"] = rule_name(strategy.rule());
  report.inputs["observations"] = std::vector<double>(state.observations().begin(),
                                                      state.observations().end());
  report.inputs["test_sets"] = sets_json(test_sets);

  const PartitionScheme& scheme = strategy.scheme();
  for (const IntervalSet& a : test_sets) {
    for (const Interval& iv : a) {
      if (!(iv.lo < iv.hi) || !scheme.is_grid_point(iv.lo) || !scheme.is_grid_point(iv.hi)) {
        throw std::invalid_argument("cid_check_exact: test set " + describe(a) +
                                    " is not a union of partition cells");
      }
    }
  }

  const int n = state.n();
  const double q = strategy.weight(state);
  const Measure sigma = strategy.predictive(state);
  const int g = scheme.grid_for_step(n);

  for (const IntervalSet& a : test_sets) {
    // Cells of H_n meeting A. Every other cell contributes q sigma_n(A).
    std::vector<Cell> meeting;
    std::set<std::uint64_t> seen;
    for (const Interval& iv : a) {
      const Cell first = scheme.locate(n, iv.lo);
      if (scheme.kind() == PartitionScheme::Kind::kDyadic) {
        const double last = std::ceil(std::ldexp(iv.hi, g)) - 1.0;
        if (last - static_cast<double>(first.index) > std::ldexp(1.0, 20)) {
          throw std::length_error("cid_check_exact: test set meets too many cells");
        }
        for (double k = static_cast<double>(first.index); k <= last; k += 1.0) {
          const Cell c = scheme.locate(n, std::ldexp(k + 0.5, -g));
          if (seen.insert(c.index).second) meeting.push_back(c);
        }
      } else {
        for (const Cell& c : scheme.cells(n)) {
          if (c.bounds.lo < iv.hi && iv.lo < c.bounds.hi && seen.insert(c.index).second) {
            meeting.push_back(c);
          }
        }
      }
    }
    const double lhs = sigma.probability(a);
    double rhs = 0.0;
    double covered = 0.0;
    for (const Cell& cell : meeting) {
      const double w = sigma.probability(cell.bounds);
      covered += w;
      if (w == 0.0) continue;
      const double y = 0.5 * (cell.bounds.lo + cell.bounds.hi);
      rhs += w * strategy.probability(strategy.update(state, y), a);
    }
    rhs += (1.0 - covered) * q * lhs;
    report.add(make_record("A=" + describe(a), lhs, rhs, kExactTol, Tier::kExact));
  }
  report.note = "expected: sigma_n(A); computed: sum over cells H of sigma_n(H) sigma_{n+1}(x, y_H)(A)";
  return report;
}

DiagnosticsReport stable_claim_check(double gamma, double a, double b, double c,
                                     std::span<const double> test_points) {
  if (gamma != 1.0 && gamma != 2.0) {
    throw std::invalid_argument("stable_claim_check: gamma must be 1 or 2");
  }
  if (!(b > 0.0 && c > 0.0)) throw std::invalid_argument("stable_claim_check: b, c must be > 0");
  DiagnosticsReport report;
  report.check = "stable_claim_check";
  report.inputs["gamma"] = gamma;
  report.inputs["a"] = a;
  report.inputs["b"] = b;
  report.inputs["c"] = c;
  report.inputs["test_points"] = std::vector<double>(test_points.begin(), test_points.end());

  const StableLaw target(gamma, a, b + c);
  const double spread = gamma == 2.0 ? std::sqrt(b) : 0.5 * b;
  boost::math::quadrature::sinh_sinh<double> integrator;
  for (double t : test_points) {
    // y = a + spread z.
    const auto integrand = [&](double z) {
      const double y = a + spread * z;
      if (!std::isfinite(y)) return 0.0;
      return spread * closed_form_density(gamma, a, b, y) * StableLaw(gamma, y, c).cdf(t);
    };
    double error = 0.0;
    const double value = integrator.integrate(integrand, 1e-12, &error);
    CheckRecord r = make_record("t=" + fmt(t), target.cdf(t), value, kQuadratureTol,
                                Tier::kQuadrature);
    r.note = "quadrature error estimate " + fmt(error);
    report.add(std::move(r));
  }
  return report;
}

DiagnosticsReport cid_check_mc(const Strategy& strategy, std::span<const double> prefix,
                               const std::vector<IntervalSet>& test_sets, int M,
                               std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("cid_check_mc: M must be >= 1");
  DiagnosticsReport report;
  report.check = "cid_check_mc";
  report.inputs["n"] = prefix.size();
  report.inputs["prefix"] = std::vector<double>(prefix.begin(), prefix.end());
  report.inputs["test_sets"] = sets_json(test_sets);
  report.inputs["M"] = M;
  report.inputs["seed"] = seed;

  const std::size_t sets = test_sets.size();
  std::vector<double> reference(sets);
  std::vector<double> sums(sets, 0.0);
  std::string how;
  Rng rng(derive_seed(seed, 0));

  std::visit(
      Overloaded{
          [&](const ConvexStrategy& s) {
            report.inputs["strategy"] = "convex " + rule_name(s.rule());
            const ConvexState st = s.replay(prefix);
            for (std::size_t j = 0; j < sets; ++j) reference[j] = s.probability(st, test_sets[j]);
            for (int i = 0; i < M; ++i) {
              const ConvexState next = s.update(st, s.sample_next(st, rng));
              for (std::size_t j = 0; j < sets; ++j) sums[j] += s.probability(next, test_sets[j]);
            }
            how = "exact sigma_{n+1}(x, Y)(A) averaged over Y";
          },
          [&](const StableStrategy& s) {
            report.inputs["strategy"] = "stable gamma=" + fmt(s.gamma());
            StableState st = s.initial_state();
            for (double x : prefix) st = s.update(st, x);
            if (!s.can_update(st.n)) {
              throw std::out_of_range("cid_check_mc: schedule exhausted at the prefix length");
            }
            const StableLaw now = s.predictive(st);
            if (now.has_closed_form()) {
              for (std::size_t j = 0; j < sets; ++j) {
                reference[j] = interval_prob([&](double t) { return now.cdf(t); }, test_sets[j]);
              }
              for (int i = 0; i < M; ++i) {
                const StableLaw next = s.predictive(s.update(st, s.sample_next(st, rng)));
                for (std::size_t j = 0; j < sets; ++j) {
                  sums[j] += interval_prob([&](double t) { return next.cdf(t); }, test_sets[j]);
                }
              }
              how = "closed-form sigma_{n+1}(x, Y)(A) averaged over Y";
            } else {
              for (std::size_t j = 0; j < sets; ++j) {
                reference[j] = interval_prob(
                    [&](double t) {
                      return t == now.location() ? 0.5
                                                 : stable_cdf_numeric(now.gamma(), now.location(),
                                                                      now.scale(), t);
                    },
                    test_sets[j]);
              }
              for (int i = 0; i < M; ++i) {
                const StableState next = s.update(st, s.sample_next(st, rng));
                const double y = s.sample_next(next, rng);
                for (std::size_t j = 0; j < sets; ++j) sums[j] += in_real_set(test_sets[j], y);
              }
              how =
                  "indicator of A at Y' ~ sigma_{n+1}(x, Y), Y ~ sigma_n; sigma_n(A) by "
                  "characteristic-function inversion (exactly 1/2 at the location)";
            }
          },
          [&](const DirichletBaseline& s) {
            report.inputs["strategy"] = "dirichlet-baseline c=" + fmt(s.c());
            std::vector<double> obs(prefix.begin(), prefix.end());
            const Measure now = s.predictive(obs);
            for (std::size_t j = 0; j < sets; ++j) reference[j] = now.probability(test_sets[j]);
            obs.push_back(0.0);
            for (int i = 0; i < M; ++i) {
              obs.back() = s.sample_next(std::span<const double>(obs).first(prefix.size()), rng);
              const Measure next = s.predictive(obs);
              for (std::size_t j = 0; j < sets; ++j) sums[j] += next.probability(test_sets[j]);
            }
            how = "exact beta_{n+1}(x, Y)(A) averaged over Y";
          },
      },
      strategy);

  const double tol = 4.0 * std::sqrt(0.25 / M);
  const bool real_line = std::holds_alternative<StableStrategy>(strategy);
  for (std::size_t j = 0; j < sets; ++j) {
    report.add(make_record(
        "A=" + (real_line ? describe_real(test_sets[j]) : describe(test_sets[j])), reference[j],
        sums[j] / M, tol, Tier::kClt4Sigma, Relation::kEqual, M));
  }
  report.note = how;
  return report;
}

DiagnosticsReport tv_convergence_check(const ConvexStrategy& strategy,
                                       std::span<const double> observations,
                                       std::vector<int> n_grid, std::vector<int> k_grid) {
  n_grid = sorted_unique(std::move(n_grid));
  k_grid = sorted_unique(std::move(k_grid));
  require_nonnegative(n_grid, "tv_convergence_check");
  require_nonnegative(k_grid, "tv_convergence_check");
  if (n_grid.empty() || k_grid.empty()) {
    throw std::invalid_argument("tv_convergence_check: empty grid");
  }
  const int horizon = n_grid.back() + k_grid.back();
  if (observations.size() < static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("tv_convergence_check: need " + std::to_string(horizon) +
                                " observations");
  }
  DiagnosticsReport report;
  report.check = "tv_convergence_check";
  report.inputs["rule"] = rule_name(strategy.rule());
  report.inputs["n_grid"] = n_grid;
  report.inputs["k_grid"] = k_grid;
  report.inputs["horizon"] = horizon;

  std::set<int> steps;
  for (int n : n_grid) {
    for (int k : k_grid) {
      steps.insert(n);
      steps.insert(n + k);
    }
  }
  ConvexState final_state;
  const auto sigma = predictives_at(strategy, observations, steps, &final_state);
  const std::vector<double> q(final_state.weights_used().begin(),
                              final_state.weights_used().end());
  const std::optional<double> tail = tail_majorant(strategy.rule(), horizon);
  report.inputs["tail_majorant"] = tail ? nlohmann::ordered_json(*tail) : nlohmann::ordered_json();

  if (!tail) {
    report.note =
        "hypothesis not met: sum of (1 - q_n) diverges for this rule; values reported without "
        "assertion";
  } else if (std::holds_alternative<Reinforcement>(strategy.rule())) {
    report.note =
        "sup bound: observed q_j up to the horizon, beyond it sum (1 - q_j) bounded by the "
        "b-sequence tail (favourable branch assumed past the horizon)";
  }

  Curve sup_curve{"tv_sup_bound", {}};
  Curve step_curve{"tv_step_bound_kmax", {}};
  for (int n : n_grid) {
    const double sup = tail ? tv_sup_bound(q, n, *tail) : kNaN;
    for (int k : k_grid) {
      const double tv = tv_distance(sigma.at(n), sigma.at(n + k));
      const double bound = tv_step_bound(q, n, k);
      const std::string name = "tv(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
      if (tail) {
        report.add(make_record(name + " <= step bound", bound, tv, kExactTol, Tier::kExact,
                               Relation::kAtMost));
        report.add(make_record(name + " step bound <= sup bound", sup, bound, kExactTol,
                               Tier::kExact, Relation::kAtMost));
      } else {
        report.add(trend_record(name + " <= step bound", bound, tv, tv <= bound + kExactTol,
                                "hypothesis not met"));
      }
    }
    const int k_max = *std::max_element(k_grid.begin(), k_grid.end());
    const double tv_far = tv_distance(sigma.at(n), sigma.at(n + k_max));
    step_curve.points.push_back({double(n), tv_far, tv_step_bound(q, n, k_max)});
    if (tail) sup_curve.points.push_back({double(n), tv_far, sup});
  }
  report.curves.push_back(std::move(step_curve));
  if (tail) {
    for (std::size_t i = 1; i < sup_curve.points.size(); ++i) {
      const auto& prev = sup_curve.points[i - 1];
      const auto& cur = sup_curve.points[i];
      report.add(make_record("sup bound n=" + fmt(cur.n) + " <= sup bound n=" + fmt(prev.n),
                             prev.bound, cur.bound, 0.0, Tier::kExact, Relation::kAtMost));
    }
    report.curves.push_back(std::move(sup_curve));
  }
  return report;
}

DiagnosticsReport dirichlet_comparison(double c, const Measure& base,
                                       const PartitionScheme& scheme,
                                       std::span<const double> observations,
                                       std::vector<int> n_grid) {
  n_grid = sorted_unique(std::move(n_grid));
  require_nonnegative(n_grid, "dirichlet_comparison");
  if (!n_grid.empty() && observations.size() < static_cast<std::size_t>(n_grid.back())) {
    throw std::invalid_argument("dirichlet_comparison: too few observations for the grid");
  }
  const ConvexStrategy s(base, scheme, DirichletLike{c});
  DiagnosticsReport report;
  report.check = "dirichlet_comparison";
  report.inputs["c"] = c;
  report.inputs["n_grid"] = n_grid;
  report.note = "distance is bl_upper = min(w1, 2 tv), an upper bound on the bounded-Lipschitz metric";

  const auto sigma = predictives_at(s, observations, {n_grid.begin(), n_grid.end()}, nullptr);
  Curve curve{"bl_upper", {}};
  for (int n : n_grid) {
    const Measure beta = dirichlet_baseline(n, c, base, observations);
    const double d = bl_upper(sigma.at(n), beta);
    const double bound = dirichlet_distance_bound(scheme, c, n);
    report.add(make_record("bl_upper(sigma_n, beta_n) n=" + std::to_string(n), bound, d,
                           kExactTol, Tier::kExact, Relation::kAtMost));
    curve.points.push_back({double(n), d, bound});
  }
  report.curves.push_back(std::move(curve));
  return report;
}

DiagnosticsReport atom_mass_report(double c, const Measure& base, const PartitionScheme& scheme,
                                   std::span<const double> observations, int n_max) {
  if (n_max < 0 || observations.size() < static_cast<std::size_t>(n_max)) {
    throw std::invalid_argument("atom_mass_report: n_max outside the observations");
  }
  const ConvexStrategy s(base, scheme, DirichletLike{c});
  DiagnosticsReport report;
  report.check = "atom_mass_report";
  report.inputs["c"] = c;
  report.inputs["n_max"] = n_max;
  const bool diffuse = base.atom_mass() == 0.0;
  if (!diffuse) report.note = "base has atoms: sigma_n side reported without assertion";

  Curve curve{"beta_atom_mass", {}};
  ConvexState st = s.initial_state();
  std::set<double> seen;
  for (int n = 0; n <= n_max; ++n) {
    const Measure beta = dirichlet_baseline(n, c, base, observations);
    const Measure sigma = s.predictive(st);
    double beta_mass = 0.0;
    double sigma_mass = 0.0;
    for (double x : seen) {
      beta_mass += beta.atom_mass_at(x);
      sigma_mass += sigma.atom_mass_at(x);
    }
    const double expected = n / (n + c);
    report.add(make_record("beta_n atoms n=" + std::to_string(n), expected, beta_mass, kExactTol,
                           Tier::kExact));
    CheckRecord rs = make_record("sigma_n atoms n=" + std::to_string(n), 0.0, sigma_mass, 0.0,
                                 Tier::kExact);
    rs.asserted = diffuse;
    report.add(std::move(rs));
    curve.points.push_back({double(n), beta_mass, expected});
    if (n < n_max) {
      const double x = observations[static_cast<std::size_t>(n)];
      seen.insert(x);
      st = s.update(std::move(st), x);
    }
  }
  report.curves.push_back(std::move(curve));
  return report;
}

DiagnosticsReport covariance_check(const StableStrategy& strategy, int M, std::uint64_t seed,
                                   const std::vector<std::pair<int, int>>& pairs,
                                   const std::vector<int>& mean_steps, int threads) {
  if (strategy.gamma() != 2.0) {
    throw std::invalid_argument("covariance_check: the covariance formula needs gamma = 2");
  }
  if (M < 2) throw std::invalid_argument("covariance_check: M must be >= 2");
  EnsembleOptions o;
  o.M = M;
  o.seed = seed;
  o.threads = threads;
  int horizon = 1;
  for (auto [n, m] : pairs) {
    if (n < 1 || m < 1) throw std::invalid_argument("covariance_check: steps are 1-based");
    if (n > m) std::swap(n, m);
    o.pairs.emplace_back(n, m);
    horizon = std::max(horizon, m);
  }
  for (int n : mean_steps) {
    if (n < 1) throw std::invalid_argument("covariance_check: steps are 1-based");
    horizon = std::max(horizon, n);
  }
  o.N = horizon;
  DiagnosticsReport report;
  report.check = "covariance_check";
  report.inputs["u"] = strategy.u();
  report.inputs["M"] = M;
  report.inputs["seed"] = seed;
  report.inputs["pairs"] = o.pairs;
  report.inputs["mean_steps"] = mean_steps;

  const EnsembleStats e = ensemble(Strategy(strategy), o);
  const double sqrt_m = std::sqrt(static_cast<double>(M));
  for (int n : mean_steps) {
    const MeanEstimate& m1 = e.mean[static_cast<std::size_t>(n - 1)];
    const MeanEstimate& m2 = e.second_moment[static_cast<std::size_t>(n - 1)];
    report.add(make_record("E(X_" + std::to_string(n) + ")", 0.0, m1.mean, 4.0 * m1.sd / sqrt_m,
                           Tier::kClt4Sigma, Relation::kEqual, M));
    report.add(make_record("E(X_" + std::to_string(n) + "^2)", strategy.u(), m2.mean,
                           4.0 * m2.sd / sqrt_m, Tier::kClt4Sigma, Relation::kEqual, M));
  }
  for (const PairEstimate& p : e.pairs) {
    double expected = strategy.u();
    if (p.n < p.m) {
      const double lo = strategy.u_at(p.n - 1);
      const double hi = strategy.u_at(p.n);
      expected = lo + std::sqrt((hi - lo) * (strategy.u() - lo));
    }
    report.add(make_record("E(X_" + std::to_string(p.n) + " X_" + std::to_string(p.m) + ")",
                           expected, p.product.mean, 4.0 * p.product.sd / sqrt_m,
                           Tier::kClt4Sigma, Relation::kEqual, M));
  }
  return report;
}

DiagnosticsReport fn_limit_check(const StableStrategy& strategy, int M, std::uint64_t seed,
                                 std::vector<int> n_list, int threads) {
  if (strategy.gamma() != 1.0 && strategy.gamma() != 2.0) {
    throw std::invalid_argument("fn_limit_check: gamma must be 1 or 2");
  }
  n_list = sorted_unique(std::move(n_list));
  require_nonnegative(n_list, "fn_limit_check");
  if (n_list.empty()) throw std::invalid_argument("fn_limit_check: empty n list");
  DiagnosticsReport report;
  report.check = "fn_limit_check";
  report.inputs["gamma"] = strategy.gamma();
  report.inputs["u"] = strategy.u();
  report.inputs["M"] = M;
  report.inputs["seed"] = seed;
  report.inputs["n"] = n_list;

  EnsembleOptions o;
  o.M = M;
  o.N = std::max(1, n_list.back());
  o.seed = seed;
  o.threads = threads;
  const EnsembleStats e = ensemble(Strategy(strategy), o);
  for (int n : n_list) {
    auto f = e.f_column(n);
    if (n == 0) {
      double largest = 0.0;
      for (double v : f) largest = std::max(largest, std::abs(v));
      report.add(trend_record("f_0 degenerate", 0.0, largest, largest == 0.0, "KS skipped"));
      continue;
    }
    const StableLaw law(strategy.gamma(), 0.0, strategy.u_at(n));
    const double ks = ks_statistic(f, [&](double t) { return law.cdf(t); });
    report.add(make_record("KS f_" + std::to_string(n) + " vs S(0, u_n)", ks_critical(M), ks, 0.0,
                           Tier::kKsCritical, Relation::kAtMost, M));
  }

  const double u_star = strategy.u_star();
  if (u_star < strategy.u()) {
    // sigma_n = S(f_n, u - u_n) against S(f_n, u - u*): same location, so the
    // sup cdf distance does not depend on f_n.
    Curve curve{"predictive_to_limit_cdf_distance", {}};
    const double gap = strategy.u() - u_star;
    const StableLaw limit(strategy.gamma(), 0.0, gap);
    for (int n : n_list) {
      const StableLaw now(strategy.gamma(), 0.0, strategy.u() - strategy.u_at(n));
      double d = 0.0;
      for (int i = -400; i <= 400; ++i) {
        const double t = i * 0.01 * std::sqrt(strategy.u());
        d = std::max(d, std::abs(now.cdf(t) - limit.cdf(t)));
      }
      curve.points.push_back({double(n), d, kNaN});
    }
    add_trend(report, curve, "sup cdf distance to S(f, u - u*)");
    report.curves.push_back(std::move(curve));
    report.note = "u* < u: sigma_n approaches S(f_n, u - u*); distances on a grid of points";
  }
  return report;
}

DiagnosticsReport empirical_convergence(const ConvexStrategy& strategy,
                                        std::span<const double> observations,
                                        std::vector<int> n_grid, int sd_trajectories,
                                        std::uint64_t seed) {
  n_grid = sorted_unique(std::move(n_grid));
  require_nonnegative(n_grid, "empirical_convergence");
  if (n_grid.empty()) throw std::invalid_argument("empirical_convergence: empty grid");
  if (n_grid.front() < 1) throw std::invalid_argument("empirical_convergence: grid starts at 1");
  const int horizon = static_cast<int>(observations.size());
  if (horizon < n_grid.back()) {
    throw std::invalid_argument("empirical_convergence: too few observations for the grid");
  }
  DiagnosticsReport report;
  report.check = "empirical_convergence";
  report.inputs["rule"] = rule_name(strategy.rule());
  report.inputs["n_grid"] = n_grid;
  report.inputs["horizon"] = horizon;

  std::set<int> steps(n_grid.begin(), n_grid.end());
  steps.insert(horizon);
  ConvexState final_state;
  const auto sigma = predictives_at(strategy, observations, steps, &final_state);

  Curve w1_curve{"w1_sigma_empirical", {}};
  for (int n : n_grid) {
    const Measure mu = Measure::empirical(observations.first(static_cast<std::size_t>(n)));
    w1_curve.points.push_back({double(n), w1_distance(sigma.at(n), mu), kNaN});
  }
  add_trend(report, w1_curve, "w1(sigma_n, mu_n)");
  report.curves.push_back(std::move(w1_curve));

  const std::vector<double> q(final_state.weights_used().begin(),
                              final_state.weights_used().end());
  const std::optional<double> tail = tail_majorant(strategy.rule(), horizon);
  if (tail) {
    Curve tv_curve{"tv_sigma_horizon", {}};
    for (int n : n_grid) {
      const double tv = tv_distance(sigma.at(n), sigma.at(horizon));
      const double bound = tv_sup_bound(q, n, *tail);
      report.add(make_record("tv(sigma_" + std::to_string(n) + ", sigma_" +
                                 std::to_string(horizon) + ")",
                             bound, tv, kExactTol, Tier::kExact, Relation::kAtMost));
      tv_curve.points.push_back({double(n), tv, bound});
    }
    report.curves.push_back(std::move(tv_curve));
  } else {
    report.note = "sum of (1 - q_n) diverges for this rule: trends only";
  }

  if (sd_trajectories > 0) {
    Curve sd_curve{"mean_predictive_sd", {}};
    std::vector<double> sums(n_grid.size(), 0.0);
    const std::set<int> grid_steps(n_grid.begin(), n_grid.end());
    for (int i = 0; i < sd_trajectories; ++i) {
      const Trajectory t = forward_sample(strategy, n_grid.back(), seed,
                                          static_cast<std::uint64_t>(i));
      const auto pred = predictives_at(strategy, t.observations, grid_steps, nullptr);
      for (std::size_t j = 0; j < n_grid.size(); ++j) {
        sums[j] += std::sqrt(std::max(0.0, pred.at(n_grid[j]).variance()));
      }
    }
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      sd_curve.points.push_back({double(n_grid[j]), sums[j] / sd_trajectories, kNaN});
    }
    add_trend(report, sd_curve, "mean predictive sd");
    report.curves.push_back(std::move(sd_curve));
    report.inputs["sd_trajectories"] = sd_trajectories;
    report.inputs["seed"] = seed;
  }
  return report;
}

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> catalog{
      {"cid_check_exact",
       "exact c.i.d. identity for a convex strategy via the finite cell decomposition",
       {{"prefix", "explicit observations x_1..x_n in [0, 1]"},
        {"n", "length of simulated prefixes (default 5)"},
        {"prefixes", "number of simulated prefixes (default 1)"},
        {"test_sets", "list of sets, each a list of [lo, hi] on the partition grid "
                      "(default: the 8 level-3 dyadic cells)"}}},
      {"stable_claim_check",
       "E{S(Y, c)(-inf, t]} = S(a, b + c)(-inf, t] for Y ~ S(a, b), by quadrature",
       {{"gamma", "1 or 2 (default: strategy gamma, else 2)"},
        {"a", "location, number or list (default 0)"},
        {"b", "scale of Y > 0, number or list (default 1)"},
        {"c", "added scale > 0, number or list (default 1)"},
        {"test_points", "list of t (default [-2, -1, 0, 1, 2])"}}},
      {"cid_check_mc",
       "Monte Carlo c.i.d. identity with tolerance 4 sqrt(0.25 / M)",
       {{"prefix", "explicit prefix"},
        {"n", "length of the simulated prefix (default 2)"},
        {"test_sets", "list of sets of [lo, hi]; (lo, hi] on R for stable strategies, "
                      "null for an infinite end"},
        {"M", "Monte Carlo draws (default run.M)"}}},
      {"tv_convergence_check",
       "exact tv(sigma_n, sigma_{n+k}) against the finite-k and sup total-variation bounds",
       {{"n_grid", "list of n (default [2, 5, 10])"}, {"k_grid", "list of k (default [1, 10, 100])"}}},
      {"dirichlet_comparison",
       "bl_upper(sigma_n, beta_n) against (1/(n+c)) sum_{i<=n} mesh(i-1) along trajectories",
       {{"n_grid", "list of n (default 0..n_max)"},
        {"n_max", "largest n when n_grid is absent (default run.N)"},
        {"trajectories", "number of simulated trajectories (default 1)"}}},
      {"atom_mass_report",
       "mass of beta_n and sigma_n on the observed points against n/(n+c) and 0",
       {{"n_max", "largest n (default run.N)"}}},
      {"covariance_check",
       "Gaussian stable strategy: E(X_n), E(X_n^2) and E(X_n X_m) against closed forms",
       {{"pairs", "list of [n, m] (default [[1, 2], [2, 3]])"},
        {"mean_steps", "list of n (default [1, 2, 5])"},
        {"M", "trajectories (default run.M)"}}},
      {"fn_limit_check",
       "KS distance of f_n against S(0, u_n) over an ensemble",
       {{"n", "list of n (default [1, 5, 20])"}, {"M", "trajectories (default run.M)"}}},
      {"empirical_convergence",
       "w1(sigma_n, mu_n) trend, tv to the horizon under summable weights, predictive sd trend",
       {{"n_grid", "list of n >= 1 (default [10, 100, 1000])"},
        {"sd_trajectories", "trajectories for the predictive sd trend (default 0: off)"}}},
  };
  return catalog;
}

}  // namespace cidpred
