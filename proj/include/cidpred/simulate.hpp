#ifndef CIDPRED_SIMULATE_HPP_
#define CIDPRED_SIMULATE_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "cidpred/strategy.hpp"

namespace cidpred {

using Strategy = std::variant<ConvexStrategy, StableStrategy, DirichletBaseline>;

/// Predictive law at a step: a measure on [0, 1] or a stable law on R.
using Snapshot = std::variant<Measure, StableLaw>;

struct Trajectory {
  std::uint64_t master_seed = 0;
  std::uint64_t index = 0;
  std::vector<double> observations;  // X_1, ..., X_N
  std::vector<double> f_values;      // stable only: f_0, ..., f_N
  std::vector<double> weights;       // convex only: q_0, ..., q_{N-1}
  std::vector<std::pair<int, Snapshot>> snapshots;  // (n, sigma_n)
};

/// Draws X_1 ~ sigma_0 and X_{n+1} ~ sigma_n(X_1..X_n) for n < N from the
/// stream derive_seed(master_seed, index). Snapshots are taken at the listed
/// steps n in [0, N]. Throws std::invalid_argument for N < 1 and lets
/// std::out_of_range through when an explicit stable schedule runs out.
Trajectory forward_sample(const Strategy& strategy, int N, std::uint64_t master_seed,
                          std::uint64_t index = 0, std::span<const int> snapshot_steps = {});

struct EnsembleOptions {
  int M = 1;
  int N = 1;
  std::uint64_t seed = 0;
  /// (n, m) pairs, 1-based, for which E(X_n X_m) is estimated.
  std::vector<std::pair<int, int>> pairs;
  /// Keep the first `keep` trajectories in full, with snapshots at these steps.
  int keep = 0;
  std::vector<int> snapshot_steps;
  /// 0 means the OpenMP default.
  int threads = 0;
};

struct MeanEstimate {
  double mean = 0.0;
  double sd = 0.0;  // sample sd of the summands
};

struct PairEstimate {
  int n = 0;
  int m = 0;
  MeanEstimate product;
};

struct EnsembleStats {
  int M = 0;
  int N = 0;
  std::uint64_t seed = 0;
  std::vector<MeanEstimate> mean;           // per step n = 1..N: X_n
  std::vector<MeanEstimate> second_moment;  // X_n^2
  std::vector<PairEstimate> pairs;
  /// Row-major M x N, X_n of trajectory i at [i * N + n - 1].
  std::vector<double> x;
  /// Row-major M x (N + 1), f_n of trajectory i (stable only).
  std::vector<double> f;
  std::vector<Trajectory> kept;

  std::span<const double> row(int i) const;
  /// X_n across trajectories, n in 1..N.
  std::vector<double> column(int n) const;
  /// f_n across trajectories, n in 0..N.
  std::vector<double> f_column(int n) const;
};

/// Trajectories run in parallel, each on its own derived stream, and are
/// folded in index order; the result does not depend on the thread count.
EnsembleStats ensemble(const Strategy& strategy, const EnsembleOptions& options);

/// Single-threaded reference for ensemble(); bit-identical output.
EnsembleStats ensemble_serial(const Strategy& strategy, const EnsembleOptions& options);

}  // namespace cidpred

#endif  // CIDPRED_SIMULATE_HPP_
