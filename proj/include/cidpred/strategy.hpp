#ifndef CIDPRED_STRATEGY_HPP_
#define CIDPRED_STRATEGY_HPP_

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cidpred/measure.hpp"
#include "cidpred/partition.hpp"
#include "cidpred/rng.hpp"
#include "cidpred/stable.hpp"

namespace cidpred {

// ---------------------------------------------------------------------------
// Weight rules q_n for the convex family
//   sigma_{n+1}(x, y) = q_n(x) sigma_n(x) + (1 - q_n(x)) alpha_n(y),
// with alpha_n(y) = nu[. | H_n(y)].
// ---------------------------------------------------------------------------

/// q_n = (n + c) / (n + 1 + c).
struct DirichletLike {
  double c = 1.0;
};

/// q_n = q.
struct ExpSmoothing {
  double q = 0.5;
};

/// v_n = limit - scale * ratio^(n + 1).
struct RateSequence {
  double limit = 0.0;
  double scale = 0.0;
  double ratio = 0.5;

  double at(int n) const;
};

enum class Criterion {
  kMeanError,     // |xbar_n - m_n(x)| < eps
  kAvgPredError,  // |(1/n) sum_i (x_i - m_{i-1})| < eps
  kKsBand,        // sup_t |mu_n[0, t] - sigma_n[0, t]| < eps
};

/// q_n(x) = b_n 1{x in C_n} + a_n (1 - 1{x in C_n}) for n >= 1, q_0 constant.
struct Reinforcement {
  RateSequence a{0.25, 0.0, 0.5};
  RateSequence b{1.0, 1.0, 0.5};  // b_n = 1 - 2^-(n+1)
  Criterion criterion = Criterion::kMeanError;
  double epsilon = 0.05;
  double q0 = 0.5;
};

using WeightRule = std::variant<DirichletLike, ExpSmoothing, Reinforcement>;

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const WeightRule& rule);

std::string rule_name(const WeightRule& rule);
std::string criterion_name(Criterion c);

/// Upper bound on sum_{j >= from} (1 - q_j) when one exists for every
/// trajectory on which the rule's favourable branch is eventually taken;
/// nullopt when the series diverges (Dirichlet-like, smoothing with q < 1).
std::optional<double> tail_majorant(const WeightRule& rule, int from);

/// Reinforcement weight given whether the prefix lies in C_n.
double reinforcement_weight(const Reinforcement& rule, int n, bool in_set);

// ---------------------------------------------------------------------------
// Convex state: the closed-form mixture
//   sigma_n = nu prod_{j<n} q_j + sum_i nu[.|H_{i-1}(x_i)] (1 - q_{i-1}) prod_{j=i}^{n-1} q_j
// ---------------------------------------------------------------------------

struct ConvexComponent {
  int step = 0;            // partition step i - 1
  Cell cell;               // H_{i-1}(x_i)
  double base_mass = 0.0;  // nu(cell)
  double cell_mean = 0.0;  // mean of nu[. | cell]
  double raw_weight = 0.0;
};

/*
 * Component weights are stored relative to a shared multiplier so that an
 * update rescales every existing weight in O(1): weight_i = raw_i * scale.
 * The multiplier is folded back into the raw weights when it gets small.
 */
class ConvexState {
 public:
  int n() const { return static_cast<int>(observations_.size()); }
  double base_weight() const { return base_raw_ * scale_; }
  double weight(std::size_t i) const { return components_[i].raw_weight * scale_; }
  /// base_weight + sum of component weights (should be 1).
  double total_weight() const;

  std::span<const ConvexComponent> components() const { return components_; }
  std::span<const double> observations() const { return observations_; }
  /// Weights q_0, ..., q_{n-1} used so far.
  std::span<const double> weights_used() const { return weights_used_; }

  double sample_mean() const;
  /// m_n, the mean of sigma_n, maintained by the recursion.
  double predictive_mean() const { return predictive_mean_; }
  /// sum_{i<=n} (x_i - m_{i-1}).
  double prediction_error_sum() const { return prediction_error_sum_; }

  /// Same predictive with components on identical cells merged.
  ConvexState compacted() const;

 private:
  friend class ConvexStrategy;

  double scale_ = 1.0;
  double base_raw_ = 1.0;
  std::vector<ConvexComponent> components_;
  std::vector<double> observations_;
  std::vector<double> weights_used_;
  double sum_x_ = 0.0;
  double predictive_mean_ = 0.0;
  double prediction_error_sum_ = 0.0;
};

class ConvexStrategy {
 public:
  /// Throws if the rule is invalid or some partition cell has zero base mass.
  ConvexStrategy(Measure base, PartitionScheme scheme, WeightRule rule);

  const Measure& base() const { return base_; }
  const PartitionScheme& scheme() const { return scheme_; }
  const WeightRule& rule() const { return rule_; }

  ConvexState initial_state() const;

  /// q_n(x) for the prefix held by `state`.
  double weight(const ConvexState& state) const;

  ConvexState update(const ConvexState& state, double y) const;
  ConvexState update(ConvexState&& state, double y) const;

  /// State after observing xs from the initial state.
  ConvexState replay(std::span<const double> xs) const;

  /// sigma_n(x) as an explicit measure.
  Measure predictive(const ConvexState& state) const;

  /// sigma_n(x)(A), evaluated from the mixture without materialising.
  double probability(const ConvexState& state, const IntervalSet& a) const;

  double mean_predictor(const ConvexState& state) const;

  /// X_{n+1} ~ sigma_n(x).
  double sample_next(const ConvexState& state, Rng& rng) const;

 private:
  Measure base_;
  PartitionScheme scheme_;
  WeightRule rule_;
  double base_mean_ = 0.5;
};

Measure convex_predictive(const ConvexStrategy& strategy, const ConvexState& state);
ConvexState convex_update(const ConvexStrategy& strategy, const ConvexState& state,
                          double y);
double mean_predictor(const ConvexStrategy& strategy, const ConvexState& state);

/// sigma_n evaluated from scratch: every q_j recomputed from its prefix with
/// freshly built measures, then the closed-form mixture assembled. Used as an
/// oracle for the incremental path.
Measure closed_form_oracle(std::span<const double> observations,
                           const WeightRule& rule, const Measure& base,
                           const PartitionScheme& scheme);

// ---------------------------------------------------------------------------
// Dirichlet baseline beta_n = c/(n+c) nu + n/(n+c) mu_n.
// ---------------------------------------------------------------------------

/// Uses the first n observations.
Measure dirichlet_baseline(int n, double c, const Measure& base,
                           std::span<const double> observations);

class DirichletBaseline {
 public:
  DirichletBaseline(double c, Measure base);

  double c() const { return c_; }
  const Measure& base() const { return base_; }

  Measure predictive(std::span<const double> observations) const;
  double sample_next(std::span<const double> observations, Rng& rng) const;

 private:
  double c_;
  Measure base_;
};

// ---------------------------------------------------------------------------
// Stable-law strategy sigma_n(x) = S(f_n(x), u - u_n).
// ---------------------------------------------------------------------------

/// u_n = u (1 - q^n).
struct GeometricSchedule {
  double q = 0.5;
};

/// 0 = u_0 < u_1 < ... < u_K < u.
struct ExplicitSchedule {
  std::vector<double> u_values;
};

using Schedule = std::variant<GeometricSchedule, ExplicitSchedule>;

struct StableState {
  int n = 0;
  double f = 0.0;
};

class StableStrategy {
 public:
  StableStrategy(double gamma, double u, Schedule schedule);

  double gamma() const { return gamma_; }
  double u() const { return u_; }
  const Schedule& schedule() const { return schedule_; }

  /// sup_n u_n.
  double u_star() const;

  /// u_n. Throws std::out_of_range past the end of an explicit schedule.
  double u_at(int n) const;

  /// True when u_{n+1} is defined, i.e. update() may be called at step n.
  bool can_update(int n) const;

  /// ((u_{n+1} - u_n) / (u - u_n))^(1/gamma); (1 - q)^(1/gamma) for the
  /// geometric schedule.
  double step_weight(int n) const;

  StableState initial_state() const { return {}; }

  /// f_{n+1} = f_n (1 - w_n) + y w_n. Throws std::out_of_range when the
  /// explicit schedule is exhausted.
  StableState update(const StableState& state, double y) const;

  /// S(f_n, u - u_n).
  StableLaw predictive(const StableState& state) const;

  double sample_next(const StableState& state, Rng& rng) const;

 private:
  double gamma_;
  double u_;
  Schedule schedule_;
};

StableState stable_update(const StableStrategy& strategy, const StableState& state,
                          double y);
StableLaw stable_predictive(const StableStrategy& strategy, const StableState& state);

}  // namespace cidpred

#endif  // CIDPRED_STRATEGY_HPP_
