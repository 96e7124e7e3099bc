#include "cidpred/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cidpred {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool wants(std::span<const int> steps, int n) {
  return std::find(steps.begin(), steps.end(), n) != steps.end();
}

void check_options(const EnsembleOptions& o) {
  if (o.M < 1) throw std::invalid_argument("ensemble: M must be >= 1");
  if (o.N < 1) throw std::invalid_argument("ensemble: N must be >= 1");
  if (o.keep < 0 || o.keep > o.M) throw std::invalid_argument("ensemble: keep must be in [0, M]");
  for (const auto& [n, m] : o.pairs) {
    if (n < 1 || m < 1 || n > o.N || m > o.N) {
      throw std::invalid_argument("ensemble: pair (" + std::to_string(n) + ", " +
                                  std::to_string(m) + ") outside 1..N");
    }
  }
}

MeanEstimate estimate(double sum, double sum_sq, int count) {
  MeanEstimate e;
  const auto m = static_cast<double>(count);
  e.mean = sum / m;
  if (count > 1) e.sd = std::sqrt(std::max(0.0, (sum_sq - m * e.mean * e.mean) / (m - 1.0)));
  return e;
}

// Runs trajectory i and writes its row of x (and f).
void fill_row(const Strategy& strategy, const EnsembleOptions& o, int i, EnsembleStats& out,
              bool stable, std::vector<Trajectory>& kept) {
  const bool keep = i < o.keep;
  Trajectory t = forward_sample(strategy, o.N, o.seed, static_cast<std::uint64_t>(i),
                                keep ? std::span<const int>(o.snapshot_steps)
                                     : std::span<const int>());
  const auto row = static_cast<std::size_t>(i);
  std::copy(t.observations.begin(), t.observations.end(),
            out.x.begin() + static_cast<std::ptrdiff_t>(row * o.N));
  if (stable) {
    std::copy(t.f_values.begin(), t.f_values.end(),
              out.f.begin() + static_cast<std::ptrdiff_t>(row * (o.N + 1)));
  }
  if (keep) kept[row] = std::move(t);
}

// Index-order reduction shared by both drivers.
void fold(const EnsembleOptions& o, EnsembleStats& out) {
  const int N = o.N;
  out.mean.resize(N);
  out.second_moment.resize(N);
  for (int n = 0; n < N; ++n) {
    double s1 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (int i = 0; i < o.M; ++i) {
      const double v = out.x[static_cast<std::size_t>(i) * N + n];
      s1 += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
    out.mean[n] = estimate(s1, s2, o.M);
    out.second_moment[n] = estimate(s2, s4, o.M);
  }
  for (const auto& [n, m] : o.pairs) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < o.M; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * N;
      const double p = out.x[base + n - 1] * out.x[base + m - 1];
      s1 += p;
      s2 += p * p;
    }
    out.pairs.push_back({n, m, estimate(s1, s2, o.M)});
  }
}

EnsembleStats prepare(const Strategy& strategy, const EnsembleOptions& o) {
  check_options(o);
  EnsembleStats out;
  out.M = o.M;
  out.N = o.N;
  out.seed = o.seed;
  out.x.assign(static_cast<std::size_t>(o.M) * o.N, 0.0);
  if (std::holds_alternative<StableStrategy>(strategy)) {
    out.f.assign(static_cast<std::size_t>(o.M) * (o.N + 1), 0.0);
  }
  out.kept.resize(static_cast<std::size_t>(o.keep));
  return out;
}

}  // namespace

Trajectory forward_sample(const Strategy& strategy, int N, std::uint64_t master_seed,
                          std::uint64_t index, std::span<const int> snapshot_steps) {
  if (N < 1) throw std::invalid_argument("forward_sample: N must be >= 1");
  Trajectory t;
  t.master_seed = master_seed;
  t.index = index;
  t.observations.reserve(static_cast<std::size_t>(N));
  Rng rng(derive_seed(master_seed, index));

  std::visit(
      Overloaded{
          [&](const ConvexStrategy& s) {
            ConvexState st = s.initial_state();
            for (int n = 0; n <= N; ++n) {
              if (wants(snapshot_steps, n)) t.snapshots.emplace_back(n, s.predictive(st));
              if (n == N) break;
              const double y = s.sample_next(st, rng);
              t.weights.push_back(s.weight(st));
              st = s.update(std::move(st), y);
              t.observations.push_back(y);
            }
          },
          [&](const StableStrategy& s) {
            StableState st = s.initial_state();
            t.f_values.push_back(st.f);
            for (int n = 0; n <= N; ++n) {
              if (wants(snapshot_steps, n)) t.snapshots.emplace_back(n, s.predictive(st));
              if (n == N) break;
              const double y = s.sample_next(st, rng);
              st = s.update(st, y);
              t.observations.push_back(y);
              t.f_values.push_back(st.f);
            }
          },
          [&](const DirichletBaseline& s) {
            for (int n = 0; n <= N; ++n) {
              if (wants(snapshot_steps, n)) t.snapshots.emplace_back(n, s.predictive(t.observations));
              if (n == N) break;
              t.observations.push_back(s.sample_next(t.observations, rng));
            }
          },
      },
      strategy);
  return t;
}

std::span<const double> EnsembleStats::row(int i) const {
  return std::span<const double>(x).subspan(static_cast<std::size_t>(i) * N,
                                            static_cast<std::size_t>(N));
}

std::vector<double> EnsembleStats::column(int n) const {
  if (n < 1 || n > N) throw std::out_of_range("ensemble: step outside 1..N");
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) out[i] = x[static_cast<std::size_t>(i) * N + n - 1];
  return out;
}

std::vector<double> EnsembleStats::f_column(int n) const {
  if (f.empty()) throw std::logic_error("ensemble: no f values for this strategy");
  if (n < 0 || n > N) throw std::out_of_range("ensemble: step outside 0..N");
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) out[i] = f[static_cast<std::size_t>(i) * (N + 1) + n];
  return out;
}

EnsembleStats ensemble_serial(const Strategy& strategy, const EnsembleOptions& options) {
  EnsembleStats out = prepare(strategy, options);
  const bool stable = !out.f.empty();
  for (int i = 0; i < options.M; ++i) fill_row(strategy, options, i, out, stable, out.kept);
  fold(options, out);
  return out;
}

EnsembleStats ensemble(const Strategy& strategy, const EnsembleOptions& options) {
  EnsembleStats out = prepare(strategy, options);
  const bool stable = !out.f.empty();
#ifdef _OPENMP
  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#else
  const int threads = 1;
#endif
  // Exceptions cannot cross the parallel region; the first one is rethrown.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (int i = 0; i < options.M; ++i) {
    try {
      fill_row(strategy, options, i, out, stable, out.kept);
    } catch (...) {
#pragma omp critical(cidpred_ensemble_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  fold(options, out);
  return out;
}

}  // namespace cidpred
