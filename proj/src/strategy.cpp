#include "cidpred/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

namespace cidpred {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Below this the shared multiplier is folded into the raw weights.
constexpr double kRescaleThreshold = 1e-200;

void check_open_range(const RateSequence& s, double lo, double hi,
                      const char* name) {
  if (!(s.ratio >= 0.0 && s.ratio < 1.0)) {
    throw std::invalid_argument(std::string("reinforcement: ") + name +
                                ".ratio must be in [0, 1)");
  }
  const double first = s.at(1);
  const bool first_ok = first > lo && first < hi;
  const bool limit_ok = s.scale == 0.0 ? (s.limit > lo && s.limit < hi)
                                       : (s.limit >= lo && s.limit <= hi);
  if (!first_ok || !limit_ok) {
    throw std::invalid_argument(std::string("reinforcement: ") + name +
                                "_n must lie in (" + std::to_string(lo) + ", " +
                                std::to_string(hi) + ") for all n >= 1");
  }
}

bool intervals_meet(Interval a, Interval b) { return a.lo < b.hi && b.lo < a.hi; }

double mass_in_cell(const Measure& base, const IntervalSet& a, Interval cell) {
  double p = 0.0;
  for (const Interval& iv : a) {
    if (!intervals_meet(iv, cell)) continue;
    p += base.probability({std::max(iv.lo, cell.lo), std::min(iv.hi, cell.hi)});
  }
  return p;
}

// Closed-form mixture assembled directly from conditional measures.
Measure assemble_closed_form(std::span<const double> qs, std::span<const double> xs,
                             const Measure& base, const PartitionScheme& scheme) {
  const std::size_t n = xs.size();
  std::vector<double> weights;
  std::vector<Measure> parts;
  weights.reserve(n + 1);
  parts.reserve(n + 1);
  double prod = 1.0;
  for (std::size_t j = 0; j < n; ++j) prod *= qs[j];
  weights.push_back(prod);
  parts.push_back(base);
  for (std::size_t i = 1; i <= n; ++i) {
    double w = 1.0 - qs[i - 1];
    for (std::size_t j = i; j < n; ++j) w *= qs[j];
    if (w == 0.0) continue;
    const int step = static_cast<int>(i) - 1;
    weights.push_back(w);
    parts.push_back(cell_conditional(base, scheme, step, scheme.locate(step, xs[i - 1])));
  }
  return mixture(weights, parts);
}

}  // namespace

double RateSequence::at(int n) const {
  return limit - scale * std::pow(ratio, n + 1);
}

void validate(const WeightRule& rule) {
  std::visit(
      Overloaded{
          [](const DirichletLike& r) {
            if (!(r.c > 0.0) || !std::isfinite(r.c)) {
              throw std::invalid_argument("dirichlet: c must be > 0");
            }
          },
          [](const ExpSmoothing& r) {
            if (!(r.q >= 0.0 && r.q <= 1.0)) {
              throw std::invalid_argument("smoothing: q must be in [0, 1]");
            }
          },
          [](const Reinforcement& r) {
            check_open_range(r.a, 0.0, 0.5, "a");
            check_open_range(r.b, 0.5, 1.0, "b");
            if (!(r.epsilon > 0.0)) {
              throw std::invalid_argument("reinforcement: epsilon must be > 0");
            }
            if (!(r.q0 >= 0.0 && r.q0 <= 1.0)) {
              throw std::invalid_argument("reinforcement: q0 must be in [0, 1]");
            }
          },
      },
      rule);
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kMeanError:
      return "mean_error";
    case Criterion::kAvgPredError:
      return "avg_pred_error";
    case Criterion::kKsBand:
      return "ks_band";
  }
  return "unknown";
}

std::string rule_name(const WeightRule& rule) {
  return std::visit(
      Overloaded{
          [](const DirichletLike& r) { return "dirichlet(c=" + std::to_string(r.c) + ")"; },
          [](const ExpSmoothing& r) { return "smoothing(q=" + std::to_string(r.q) + ")"; },
          [](const Reinforcement& r) {
            return "reinforcement(" + criterion_name(r.criterion) +
                   ", eps=" + std::to_string(r.epsilon) + ")";
          },
      },
      rule);
}

std::optional<double> tail_majorant(const WeightRule& rule, int from) {
  return std::visit(
      Overloaded{
          [](const DirichletLike&) -> std::optional<double> { return std::nullopt; },
          [](const ExpSmoothing& r) -> std::optional<double> {
            if (r.q == 1.0) return 0.0;
            return std::nullopt;
          },
          [from](const Reinforcement& r) -> std::optional<double> {
            if (r.b.limit != 1.0) return std::nullopt;
            if (r.b.scale == 0.0) return 0.0;
            return r.b.scale * std::pow(r.b.ratio, from + 1) / (1.0 - r.b.ratio);
          },
      },
      rule);
}

double reinforcement_weight(const Reinforcement& rule, int n, bool in_set) {
  if (n == 0) return rule.q0;
  return in_set ? rule.b.at(n) : rule.a.at(n);
}

double ConvexState::total_weight() const {
  double raw = base_raw_;
  for (const ConvexComponent& c : components_) raw += c.raw_weight;
  return raw * scale_;
}

double ConvexState::sample_mean() const {
  return observations_.empty() ? 0.0
                               : sum_x_ / static_cast<double>(observations_.size());
}

ConvexState ConvexState::compacted() const {
  ConvexState out = *this;
  out.components_.clear();
  std::map<std::tuple<int, std::uint64_t>, std::size_t> slot;
  for (const ConvexComponent& c : components_) {
    auto key = std::make_tuple(c.cell.grid, c.cell.index);
    auto [it, fresh] = slot.try_emplace(key, out.components_.size());
    if (fresh) {
      out.components_.push_back(c);
    } else {
      out.components_[it->second].raw_weight += c.raw_weight;
    }
  }
  return out;
}

ConvexStrategy::ConvexStrategy(Measure base, PartitionScheme scheme, WeightRule rule)
    : base_(std::move(base)), scheme_(std::move(scheme)), rule_(std::move(rule)) {
  validate(rule_);
  scheme_.check_positive(base_);
  base_mean_ = base_.mean();
}

ConvexState ConvexStrategy::initial_state() const {
  ConvexState s;
  s.predictive_mean_ = base_mean_;
  return s;
}

double ConvexStrategy::weight(const ConvexState& state) const {
  const int n = state.n();
  return std::visit(
      Overloaded{
          [n](const DirichletLike& r) { return (n + r.c) / (n + 1.0 + r.c); },
          [](const ExpSmoothing& r) { return r.q; },
          [&](const Reinforcement& r) {
            if (n == 0) return r.q0;
            bool in_set = false;
            switch (r.criterion) {
              case Criterion::kMeanError:
                in_set = std::abs(state.sample_mean() - state.predictive_mean()) < r.epsilon;
                break;
              case Criterion::kAvgPredError:
                in_set = std::abs(state.prediction_error_sum() / n) < r.epsilon;
                break;
              case Criterion::kKsBand:
                in_set = ks_distance(Measure::empirical(state.observations()),
                                     predictive(state)) < r.epsilon;
                break;
            }
            return reinforcement_weight(r, n, in_set);
          },
      },
      rule_);
}

ConvexState ConvexStrategy::update(const ConvexState& state, double y) const {
  ConvexState copy = state;
  return update(std::move(copy), y);
}

ConvexState ConvexStrategy::update(ConvexState&& state, double y) const {
  const double q = weight(state);
  const int step = state.n();
  const Cell cell = scheme_.locate(step, y);
  const double mass = base_.probability(cell.bounds);
  const double cell_mean = base_.moment(cell.bounds) / mass;

  if (q == 0.0) {
    for (ConvexComponent& c : state.components_) c.raw_weight = 0.0;
    state.base_raw_ = 0.0;
    state.scale_ = 1.0;
  } else {
    state.scale_ *= q;
  }
  state.components_.push_back({step, cell, mass, cell_mean, (1.0 - q) / state.scale_});
  if (state.scale_ < kRescaleThreshold) {
    for (ConvexComponent& c : state.components_) c.raw_weight *= state.scale_;
    state.base_raw_ *= state.scale_;
    state.scale_ = 1.0;
  }

  state.prediction_error_sum_ += y - state.predictive_mean_;
  state.predictive_mean_ = q * state.predictive_mean_ + (1.0 - q) * cell_mean;
  state.sum_x_ += y;
  state.observations_.push_back(y);
  state.weights_used_.push_back(q);
  return std::move(state);
}

ConvexState ConvexStrategy::replay(std::span<const double> xs) const {
  ConvexState s = initial_state();
  for (double x : xs) s = update(std::move(s), x);
  return s;
}

Measure ConvexStrategy::predictive(const ConvexState& state) const {
  // sigma_n = g . nu where g = base_weight + sum_i w_i / nu(H_i) 1_{H_i}.
  // The cells form a laminar family, so g is accumulated down a stack of
  // nested cells without any subtraction.
  struct Entry {
    double lo;
    double hi;
    double value;
  };
  std::vector<Entry> cells;
  cells.reserve(state.components_.size());
  for (std::size_t i = 0; i < state.components_.size(); ++i) {
    const ConvexComponent& c = state.components_[i];
    const double w = state.weight(i);
    if (w > 0.0) cells.push_back({c.cell.bounds.lo, c.cell.bounds.hi, w / c.base_mass});
  }
  std::sort(cells.begin(), cells.end(), [](const Entry& a, const Entry& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.hi > b.hi;
  });
  std::vector<Entry> merged;
  for (const Entry& e : cells) {
    if (!merged.empty() && merged.back().lo == e.lo && merged.back().hi == e.hi) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }

  std::vector<double> pts(base_.breakpoints().begin(), base_.breakpoints().end());
  for (const Entry& e : merged) {
    pts.push_back(e.lo);
    pts.push_back(e.hi);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const double base_w = state.base_weight();
  const auto bps = base_.breakpoints();
  const auto dens = base_.densities();
  std::vector<double> out(pts.size() - 1);
  std::vector<std::pair<double, double>> stack;  // (hi, cumulative value)
  std::size_t next = 0;
  std::size_t piece = 0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const double p = pts[j];
    while (!stack.empty() && stack.back().first <= p) stack.pop_back();
    while (next < merged.size() && merged[next].lo == p) {
      const double below = stack.empty() ? 0.0 : stack.back().second;
      stack.emplace_back(merged[next].hi, below + merged[next].value);
      ++next;
    }
    while (bps[piece + 1] <= p) ++piece;
    const double g = base_w + (stack.empty() ? 0.0 : stack.back().second);
    out[j] = dens[piece] * g;
  }

  std::vector<Atom> atoms;
  for (const Atom& a : base_.atoms()) {
    double g = base_w;
    for (const Entry& e : merged) {
      if (a.location >= e.lo && (a.location < e.hi || (e.hi >= 1.0 && a.location <= e.hi))) {
        g += e.value;
      }
    }
    if (g * a.mass > 0.0) atoms.push_back({a.location, g * a.mass});
  }
  return MeasureBuilder::build(std::move(pts), std::move(out), std::move(atoms));
}

double ConvexStrategy::probability(const ConvexState& state, const IntervalSet& a) const {
  double p = state.base_weight() * base_.probability(a);
  for (std::size_t i = 0; i < state.components_.size(); ++i) {
    const double w = state.weight(i);
    if (w == 0.0) continue;
    const ConvexComponent& c = state.components_[i];
    p += w * mass_in_cell(base_, a, c.cell.bounds) / c.base_mass;
  }
  return p;
}

double ConvexStrategy::mean_predictor(const ConvexState& state) const {
  return state.predictive_mean();
}

double ConvexStrategy::sample_next(const ConvexState& state, Rng& rng) const {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = state.components_.size(); i-- > 0;) {
    cumulative += state.weight(i);
    if (u < cumulative) return base_.sample_within(state.components_[i].cell.bounds, rng);
  }
  return base_.sample(rng);
}

Measure convex_predictive(const ConvexStrategy& strategy, const ConvexState& state) {
  return strategy.predictive(state);
}

ConvexState convex_update(const ConvexStrategy& strategy, const ConvexState& state,
                          double y) {
  return strategy.update(state, y);
}

double mean_predictor(const ConvexStrategy& strategy, const ConvexState& state) {
  return strategy.mean_predictor(state);
}

Measure closed_form_oracle(std::span<const double> observations, const WeightRule& rule,
                           const Measure& base, const PartitionScheme& scheme) {
  validate(rule);
  const std::size_t n = observations.size();
  std::vector<double> qs;
  qs.reserve(n);
  std::vector<double> means;  // m_0, ..., m_{n-1}, from scratch
  for (std::size_t j = 0; j < n; ++j) {
    const auto prefix = observations.first(j);
    const bool needs_measure = std::holds_alternative<Reinforcement>(rule);
    if (needs_measure) {
      const Measure sigma = assemble_closed_form(qs, prefix, base, scheme);
      means.push_back(sigma.mean());
    }
    const auto nj = static_cast<int>(j);
    const double q = std::visit(
        Overloaded{
            [nj](const DirichletLike& r) { return (nj + r.c) / (nj + 1.0 + r.c); },
            [](const ExpSmoothing& r) { return r.q; },
            [&](const Reinforcement& r) {
              if (nj == 0) return r.q0;
              double xbar = 0.0;
              for (double x : prefix) xbar += x;
              xbar /= static_cast<double>(j);
              bool in_set = false;
              switch (r.criterion) {
                case Criterion::kMeanError:
                  in_set = std::abs(xbar - means.back()) < r.epsilon;
                  break;
                case Criterion::kAvgPredError: {
                  double err = 0.0;
                  for (std::size_t i = 0; i < j; ++i) err += prefix[i] - means[i];
                  in_set = std::abs(err / static_cast<double>(j)) < r.epsilon;
                  break;
                }
                case Criterion::kKsBand:
                  in_set = ks_distance(Measure::empirical(prefix),
                                       assemble_closed_form(qs, prefix, base, scheme)) <
                           r.epsilon;
                  break;
              }
              return reinforcement_weight(r, nj, in_set);
            },
        },
        rule);
    qs.push_back(q);
  }
  return assemble_closed_form(qs, observations, base, scheme);
}

Measure dirichlet_baseline(int n, double c, const Measure& base,
                           std::span<const double> observations) {
  if (!(c > 0.0)) throw std::invalid_argument("dirichlet baseline: c must be > 0");
  if (n < 0 || static_cast<std::size_t>(n) > observations.size()) {
    throw std::invalid_argument("dirichlet baseline: n exceeds the observations");
  }
  const double denom = n + c;
  std::vector<double> dens(base.densities().begin(), base.densities().end());
  for (double& d : dens) d *= c / denom;
  std::map<double, double> atoms;
  for (const Atom& a : base.atoms()) atoms[a.location] += a.mass * c / denom;
  for (int i = 0; i < n; ++i) atoms[observations[static_cast<std::size_t>(i)]] += 1.0 / denom;
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const auto& [x, m] : atoms) out.push_back({x, m});
  return MeasureBuilder::build({base.breakpoints().begin(), base.breakpoints().end()},
                               std::move(dens), std::move(out));
}

DirichletBaseline::DirichletBaseline(double c, Measure base) : c_(c), base_(std::move(base)) {
  if (!(c > 0.0)) throw std::invalid_argument("dirichlet baseline: c must be > 0");
}

Measure DirichletBaseline::predictive(std::span<const double> observations) const {
  return dirichlet_baseline(static_cast<int>(observations.size()), c_, base_, observations);
}

double DirichletBaseline::sample_next(std::span<const double> observations, Rng& rng) const {
  const auto n = static_cast<double>(observations.size());
  if (rng.uniform() * (n + c_) < c_) return base_.sample(rng);
  return observations[rng.index(observations.size())];
}

// ---------------------------------------------------------------------------

StableStrategy::StableStrategy(double gamma, double u, Schedule schedule)
    : gamma_(gamma), u_(u), schedule_(std::move(schedule)) {
  if (!(gamma > 0.0 && gamma <= 2.0)) {
    throw std::invalid_argument("stable: gamma must be in (0, 2], got " +
                                std::to_string(gamma));
  }
  if (!(u > 0.0) || !std::isfinite(u)) throw std::invalid_argument("stable: u must be > 0");
  std::visit(Overloaded{
                 [](const GeometricSchedule& g) {
                   if (!(g.q > 0.0 && g.q < 1.0)) {
                     throw std::invalid_argument("stable: schedule q must be in (0, 1)");
                   }
                 },
                 [u](const ExplicitSchedule& e) {
                   const auto& v = e.u_values;
                   if (v.empty() || v.front() != 0.0) {
                     throw std::invalid_argument("stable: explicit schedule must start at 0");
                   }
                   for (std::size_t i = 1; i < v.size(); ++i) {
                     if (!(v[i] > v[i - 1])) {
                       throw std::invalid_argument(
                           "stable: explicit schedule must be strictly increasing");
                     }
                   }
                   if (!(v.back() < u)) {
                     throw std::invalid_argument("stable: explicit schedule must stay below u");
                   }
                 },
             },
             schedule_);
}

double StableStrategy::u_star() const {
  return std::visit(Overloaded{
                        [this](const GeometricSchedule&) { return u_; },
                        [](const ExplicitSchedule& e) { return e.u_values.back(); },
                    },
                    schedule_);
}

double StableStrategy::u_at(int n) const {
  if (n < 0) throw std::out_of_range("stable: negative step");
  return std::visit(
      Overloaded{
          [&](const GeometricSchedule& g) { return u_ * (1.0 - std::pow(g.q, n)); },
          [&](const ExplicitSchedule& e) {
            if (static_cast<std::size_t>(n) >= e.u_values.size()) {
              throw std::out_of_range("stable: explicit schedule exhausted at step " +
                                      std::to_string(n));
            }
            return e.u_values[static_cast<std::size_t>(n)];
          },
      },
      schedule_);
}

bool StableStrategy::can_update(int n) const {
  if (const auto* e = std::get_if<ExplicitSchedule>(&schedule_)) {
    return static_cast<std::size_t>(n) + 1 < e->u_values.size();
  }
  return true;
}

double StableStrategy::step_weight(int n) const {
  if (const auto* g = std::get_if<GeometricSchedule>(&schedule_)) {
    return std::pow(1.0 - g->q, 1.0 / gamma_);
  }
  const double un = u_at(n);
  const double ratio = (u_at(n + 1) - un) / (u_ - un);
  return std::pow(ratio, 1.0 / gamma_);
}

StableState StableStrategy::update(const StableState& state, double y) const {
  if (!can_update(state.n)) {
    throw std::out_of_range("stable: explicit schedule exhausted at step " +
                            std::to_string(state.n));
  }
  const double w = step_weight(state.n);
  return {state.n + 1, state.f * (1.0 - w) + y * w};
}

StableLaw StableStrategy::predictive(const StableState& state) const {
  return {gamma_, state.f, u_ - u_at(state.n)};
}

double StableStrategy::sample_next(const StableState& state, Rng& rng) const {
  return predictive(state).sample(rng);
}

StableState stable_update(const StableStrategy& strategy, const StableState& state,
                          double y) {
  return strategy.update(state, y);
}

StableLaw stable_predictive(const StableStrategy& strategy, const StableState& state) {
  return strategy.predictive(state);
}

}  // namespace cidpred
