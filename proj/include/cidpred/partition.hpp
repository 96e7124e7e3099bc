#ifndef CIDPRED_PARTITION_HPP_
#define CIDPRED_PARTITION_HPP_

#include <cstdint>
#include <vector>

#include "cidpred/measure.hpp"

namespace cidpred {

/// One cell of a partition level. `grid` is the effective dyadic level (for
/// dyadic schemes) or the index of the breakpoint grid (explicit schemes).
struct Cell {
  int grid = 0;
  std::uint64_t index = 0;
  Interval bounds;

  friend bool operator==(const Cell& a, const Cell& b) {
    return a.grid == b.grid && a.index == b.index;
  }
};

/*
 * Nested refining partitions H_0, H_1, ... of [0, 1].
 *
 * Dyadic (default): step n uses the dyadic level min(floor(n / rate),
 * max_level), i.e. 2^level equal cells [k 2^-level, (k+1) 2^-level). The
 * level is capped at 52 so that every cell endpoint is an exact double;
 * deeper steps reuse the level-52 cells, which keeps the sequence refining.
 *
 * Explicit: a list of breakpoint grids, each a superset of the previous one;
 * steps past the end reuse the last grid.
 *
 * Cells are half-open with the last cell closed at 1.
 */
class PartitionScheme {
 public:
  static constexpr int kMaxDyadicLevel = 52;

  enum class Kind { kDyadic, kExplicit };

  /// H_0 = {[0, 1]} and halving every `rate` steps.
  static PartitionScheme dyadic(int rate = 1, int max_level = kMaxDyadicLevel);

  static PartitionScheme explicit_grids(std::vector<std::vector<double>> grids);

  Kind kind() const { return kind_; }
  int rate() const { return rate_; }
  int max_level() const { return max_level_; }
  const std::vector<std::vector<double>>& grids() const { return grids_; }

  /// Effective grid for partition step n.
  int grid_for_step(int step) const;

  /// Cell of H_step containing y. Throws on negative step or y outside [0, 1].
  Cell locate(int step, double y) const;

  /// Largest cell diameter of H_step.
  double mesh(int step) const;

  /// Cell count of H_step (may be astronomically large for deep dyadic steps).
  double cell_count(int step) const;

  /// Every cell of H_step. Throws when there are more than 2^24.
  std::vector<Cell> cells(int step) const;

  /// Cells of the finest grid at step `fine` inside `coarse`.
  std::vector<Cell> children(const Cell& coarse, int fine) const;

  /// True when x lies on a cell boundary of some partition step.
  bool is_grid_point(double x) const;

  /// Throws std::domain_error unless every cell of every step has positive
  /// base probability.
  void check_positive(const Measure& base) const;

 private:
  PartitionScheme() = default;

  Kind kind_ = Kind::kDyadic;
  int rate_ = 1;
  int max_level_ = kMaxDyadicLevel;
  std::vector<std::vector<double>> grids_;
};

/// locate() as a free function.
Cell locate(const PartitionScheme& scheme, int step, double y);

/// base[. | cell], exact in the piecewise representation. Throws
/// std::domain_error on a zero-probability cell.
Measure cell_conditional(const Measure& base, const PartitionScheme& scheme,
                         int step, const Cell& cell);

double mesh(const PartitionScheme& scheme, int step);

}  // namespace cidpred

#endif  // CIDPRED_PARTITION_HPP_
