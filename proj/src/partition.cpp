#include "cidpred/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cidpred {

PartitionScheme PartitionScheme::dyadic(int rate, int max_level) {
  if (rate < 1) throw std::invalid_argument("partition: rate must be >= 1");
  if (max_level < 0 || max_level > kMaxDyadicLevel) {
    throw std::invalid_argument("partition: max_level must be in [0, 52]");
  }
  PartitionScheme s;
  s.kind_ = Kind::kDyadic;
  s.rate_ = rate;
  s.max_level_ = max_level;
  return s;
}

PartitionScheme PartitionScheme::explicit_grids(
    std::vector<std::vector<double>> grids) {
  if (grids.empty()) throw std::invalid_argument("partition: no grids given");
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const auto& grid = grids[g];
    if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0) {
      throw std::invalid_argument("partition: grid " + std::to_string(g) +
                                  " must start at 0 and end at 1");
    }
    if (!std::is_sorted(grid.begin(), grid.end()) ||
        std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
      throw std::invalid_argument("partition: grid " + std::to_string(g) +
                                  " must be strictly increasing");
    }
    if (g > 0 && !std::includes(grid.begin(), grid.end(), grids[g - 1].begin(),
                                grids[g - 1].end())) {
      throw std::invalid_argument("partition: grid " + std::to_string(g) +
                                  " does not refine grid " + std::to_string(g - 1));
    }
  }
  PartitionScheme s;
  s.kind_ = Kind::kExplicit;
  s.grids_ = std::move(grids);
  return s;
}

int PartitionScheme::grid_for_step(int step) const {
  if (step < 0) throw std::invalid_argument("partition: negative level");
  if (kind_ == Kind::kDyadic) return std::min(step / rate_, max_level_);
  return std::min(step, static_cast<int>(grids_.size()) - 1);
}

Cell PartitionScheme::locate(int step, double y) const {
  const int g = grid_for_step(step);
  if (!(y >= 0.0 && y <= 1.0)) {
    throw std::invalid_argument("partition: point outside [0, 1]");
  }
  if (kind_ == Kind::kDyadic) {
    const double cells = std::ldexp(1.0, g);
    const double k = std::min(std::floor(std::ldexp(y, g)), cells - 1.0);
    return {g, static_cast<std::uint64_t>(k),
            {std::ldexp(k, -g), std::ldexp(k + 1.0, -g)}};
  }
  const auto& grid = grids_[static_cast<std::size_t>(g)];
  auto it = std::upper_bound(grid.begin(), grid.end(), y);
  auto k = static_cast<std::size_t>(it - grid.begin());
  k = std::min(k, grid.size() - 1) - 1;
  return {g, k, {grid[k], grid[k + 1]}};
}

double PartitionScheme::mesh(int step) const {
  const int g = grid_for_step(step);
  if (kind_ == Kind::kDyadic) return std::ldexp(1.0, -g);
  const auto& grid = grids_[static_cast<std::size_t>(g)];
  double widest = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    widest = std::max(widest, grid[i + 1] - grid[i]);
  }
  return widest;
}

double PartitionScheme::cell_count(int step) const {
  const int g = grid_for_step(step);
  if (kind_ == Kind::kDyadic) return std::ldexp(1.0, g);
  return static_cast<double>(grids_[static_cast<std::size_t>(g)].size() - 1);
}

std::vector<Cell> PartitionScheme::cells(int step) const {
  if (cell_count(step) > std::ldexp(1.0, 24)) {
    throw std::length_error("partition: too many cells to enumerate");
  }
  const int g = grid_for_step(step);
  std::vector<Cell> out;
  if (kind_ == Kind::kDyadic) {
    const std::uint64_t n = std::uint64_t{1} << g;
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto kd = static_cast<double>(k);
      out.push_back({g, k, {std::ldexp(kd, -g), std::ldexp(kd + 1.0, -g)}});
    }
    return out;
  }
  const auto& grid = grids_[static_cast<std::size_t>(g)];
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    out.push_back({g, k, {grid[k], grid[k + 1]}});
  }
  return out;
}

std::vector<Cell> PartitionScheme::children(const Cell& coarse, int fine) const {
  const int g = grid_for_step(fine);
  if (g < coarse.grid) {
    throw std::invalid_argument("partition: children of a finer cell");
  }
  std::vector<Cell> out;
  if (kind_ == Kind::kDyadic) {
    const int shift = g - coarse.grid;
    if (shift > 24) throw std::length_error("partition: too many children");
    const std::uint64_t first = coarse.index << shift;
    const std::uint64_t count = std::uint64_t{1} << shift;
    for (std::uint64_t k = first; k < first + count; ++k) {
      const auto kd = static_cast<double>(k);
      out.push_back({g, k, {std::ldexp(kd, -g), std::ldexp(kd + 1.0, -g)}});
    }
    return out;
  }
  const auto& grid = grids_[static_cast<std::size_t>(g)];
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (grid[k] >= coarse.bounds.lo && grid[k + 1] <= coarse.bounds.hi) {
      out.push_back({g, k, {grid[k], grid[k + 1]}});
    }
  }
  return out;
}

bool PartitionScheme::is_grid_point(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) return false;
  if (kind_ == Kind::kDyadic) {
    const double scaled = std::ldexp(x, max_level_);
    return scaled == std::floor(scaled);
  }
  const auto& grid = grids_.back();
  return std::binary_search(grid.begin(), grid.end(), x);
}

void PartitionScheme::check_positive(const Measure& base) const {
  if (kind_ == Kind::kExplicit) {
    for (std::size_t g = 0; g < grids_.size(); ++g) {
      for (const Cell& c : cells(static_cast<int>(g))) {
        if (!(base.probability(c.bounds) > 0.0)) {
          throw std::domain_error("partition: cell [" + std::to_string(c.bounds.lo) +
                                  ", " + std::to_string(c.bounds.hi) +
                                  ") has zero base probability");
        }
      }
    }
    return;
  }
  // A finest-level dyadic cell has zero mass iff it sits inside a run of zero
  // density that contains no atom. Coarser cells are unions of finest cells.
  const auto bps = base.breakpoints();
  const auto dens = base.densities();
  const double scale = std::ldexp(1.0, max_level_);
  std::vector<double> atom_locs;
  for (const Atom& a : base.atoms()) atom_locs.push_back(a.location);
  std::size_t i = 0;
  while (i < dens.size()) {
    if (dens[i] > 0.0) {
      ++i;
      continue;
    }
    const double start = bps[i];
    while (i < dens.size() && dens[i] == 0.0) ++i;
    const double end = bps[i];
    // Split the run at atoms and look for a whole cell inside a gap.
    double left = start;
    bool left_is_atom = false;
    auto it = std::lower_bound(atom_locs.begin(), atom_locs.end(), start);
    for (;; ++it) {
      const bool at_atom = it != atom_locs.end() && *it < end;
      const double right = at_atom ? *it : end;
      double k_min = std::ceil(left * scale);
      if (left_is_atom && k_min == left * scale) k_min += 1.0;
      double k_max = std::floor(right * scale) - 1.0;
      if (!at_atom && right == 1.0 && !atom_locs.empty() && atom_locs.back() == 1.0) {
        k_max -= 1.0;
      }
      if (k_min <= k_max) {
        throw std::domain_error("partition: base measure has a zero-density gap [" +
                                std::to_string(left) + ", " + std::to_string(right) +
                                ") containing whole cells");
      }
      if (!at_atom) break;
      left = *it;
      left_is_atom = true;
    }
  }
}

Cell locate(const PartitionScheme& scheme, int step, double y) {
  return scheme.locate(step, y);
}

Measure cell_conditional(const Measure& base, const PartitionScheme& scheme,
                         int step, const Cell& cell) {
  if (cell.grid != scheme.grid_for_step(step)) {
    throw std::invalid_argument("partition: cell does not belong to this level");
  }
  return base.conditional(cell.bounds);
}

double mesh(const PartitionScheme& scheme, int step) { return scheme.mesh(step); }

}  // namespace cidpred
