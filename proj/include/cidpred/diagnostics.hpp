#ifndef CIDPRED_DIAGNOSTICS_HPP_
#define CIDPRED_DIAGNOSTICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cidpred/simulate.hpp"
#include "cidpred/strategy.hpp"
#include "json.hpp"

namespace cidpred {

/// How a record's tolerance was derived.
enum class Tier {
  kExact,       // exact arithmetic, 1e-9
  kQuadrature,  // numerical integration, 1e-6
  kKsCritical,  // 1.949 / sqrt(n)
  kClt4Sigma,   // 4 sd / sqrt(M)
  kTrend,       // reported, never asserted
};

/// kEqual: |computed - expected| <= tolerance.
/// kAtMost: computed <= expected + tolerance (expected is an upper bound).
enum class Relation { kEqual, kAtMost };

std::string tier_name(Tier t);
std::string relation_name(Relation r);

struct CheckRecord {
  std::string name;
  double expected = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  Tier tier = Tier::kExact;
  Relation relation = Relation::kEqual;
  bool asserted = true;
  bool pass = true;
  std::int64_t samples = 0;
  std::string note;
};

/// Builds a record and evaluates pass from the relation.
CheckRecord make_record(std::string name, double expected, double computed, double tolerance,
                        Tier tier, Relation relation = Relation::kEqual, std::int64_t samples = 0);

/// Unasserted record; pass carries the observed trend.
CheckRecord trend_record(std::string name, double expected, double computed, bool holds,
                         std::string note);

struct CurvePoint {
  double n = 0.0;
  double value = 0.0;
  double bound = 0.0;
};

struct Curve {
  std::string name;
  std::vector<CurvePoint> points;
};

struct DiagnosticsReport {
  std::string check;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  std::vector<CheckRecord> records;
  std::vector<Curve> curves;
  std::string note;
  bool pass = true;

  void add(CheckRecord r);
  /// Asserted records, total and failed.
  std::size_t asserted_count() const;
  std::size_t failed_count() const;
};

nlohmann::ordered_json to_json(const CheckRecord& r);
nlohmann::ordered_json to_json(const DiagnosticsReport& r);

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// sigma_n(A) against int sigma_{n+1}(x, y)(A) sigma_n(dy), the integral
/// evaluated as a finite sum over the cells H of H_n, on each of which
/// sigma_{n+1}(x, y) does not depend on y. Each test set must have endpoints
/// on the partition grid (std::invalid_argument otherwise). Exact tier.
DiagnosticsReport cid_check_exact(const ConvexStrategy& strategy, const ConvexState& state,
                                  const std::vector<IntervalSet>& test_sets);

/// E{S(Y, c)((-inf, t])} for Y ~ S(a, b) by quadrature against the density
/// of S(a, b), compared with S(a, b + c)((-inf, t]). gamma must be 1 or 2.
DiagnosticsReport stable_claim_check(double gamma, double a, double b, double c,
                                     std::span<const double> test_points);

/// Monte Carlo form of the c.i.d. identity at the state reached after
/// `prefix`: averages sigma_{n+1}(x, Y)(A) over Y ~ sigma_n (or the indicator
/// of a draw from sigma_{n+1} when that law has no closed form). For stable
/// strategies each interval is read as (lo, hi] on the real line.
DiagnosticsReport cid_check_mc(const Strategy& strategy, std::span<const double> prefix,
                               const std::vector<IntervalSet>& test_sets, int M,
                               std::uint64_t seed);

/// tv(sigma_n, sigma_{n+k}) along `observations` against
///   1 - prod_{j=n}^{n+k-1} q_j + sum_{j=n}^{n+k-1} (1 - q_j)
/// and against the sup over k, whose tail beyond the observed horizon is
/// bounded with the rule's majorant. Rules without a summable majorant are
/// reported without assertion.
DiagnosticsReport tv_convergence_check(const ConvexStrategy& strategy,
                                       std::span<const double> observations,
                                       std::vector<int> n_grid, std::vector<int> k_grid);

/// bl_upper(sigma_n, beta_n) <= (1 / (n + c)) sum_{i=1}^n mesh(i - 1) for
/// the Dirichlet-like strategy, for every n in `n_grid`.
DiagnosticsReport dirichlet_comparison(double c, const Measure& base,
                                       const PartitionScheme& scheme,
                                       std::span<const double> observations,
                                       std::vector<int> n_grid);

/// Mass that beta_n and sigma_n put on {x_1, ..., x_n}, for n = 0..n_max.
DiagnosticsReport atom_mass_report(double c, const Measure& base, const PartitionScheme& scheme,
                                   std::span<const double> observations, int n_max);

/// Ensemble estimates of E(X_n), E(X_n^2) and E(X_n X_m) for the Gaussian
/// stable strategy against their closed forms.
DiagnosticsReport covariance_check(const StableStrategy& strategy, int M, std::uint64_t seed,
                                   const std::vector<std::pair<int, int>>& pairs,
                                   const std::vector<int>& mean_steps, int threads = 0);

/// KS of f_n over M trajectories against S(0, u_n). With an explicit
/// schedule ending below u, also reports the sup cdf distance between
/// sigma_n and S(f_n, u - u*).
DiagnosticsReport fn_limit_check(const StableStrategy& strategy, int M, std::uint64_t seed,
                                 std::vector<int> n_list, int threads = 0);

/// w1(sigma_n, mu_n) along `observations` (trend), tv(sigma_n, sigma_N)
/// against the sup bound when the rule's 1 - q_n is summable, and, when
/// sd_trajectories > 0, the ensemble average predictive sd (trend).
DiagnosticsReport empirical_convergence(const ConvexStrategy& strategy,
                                        std::span<const double> observations,
                                        std::vector<int> n_grid, int sd_trajectories = 0,
                                        std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Helpers shared with tests.
// ---------------------------------------------------------------------------

/// Finite-horizon bound 1 - prod_{j=n}^{n+k-1} q_j + sum_{j=n}^{n+k-1} (1 - q_j).
double tv_step_bound(std::span<const double> q, int n, int k);

/// 1 - prod_{j>=n} q_j + sum_{j>=n} (1 - q_j) with q_j observed for j < q.size()
/// and sum_{j>=q.size()} (1 - q_j) <= tail; since prod (1 - e_j) >= 1 - sum e_j
/// the result is a valid upper bound.
double tv_sup_bound(std::span<const double> q, int n, double tail);

/// (1 / (n + c)) sum_{i=1}^n mesh(i - 1).
double dirichlet_distance_bound(const PartitionScheme& scheme, double c, int n);

/// S(a, b)((-inf, t]) by Gil-Pelaez inversion of the characteristic
/// function; used as a reference where no closed form exists.
double stable_cdf_numeric(double gamma, double a, double b, double t);

struct CheckInfo {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> parameters;  // name, doc
};

/// Every diagnostic in a fixed order.
const std::vector<CheckInfo>& check_catalog();

}  // namespace cidpred

#endif  // CIDPRED_DIAGNOSTICS_HPP_
