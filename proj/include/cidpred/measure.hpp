#ifndef CIDPRED_MEASURE_HPP_
#define CIDPRED_MEASURE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "cidpred/rng.hpp"

namespace cidpred {

/// Half-open interval [lo, hi). On [0, 1] an interval with hi >= 1 is closed
/// on the right so that the point 1 belongs to the last cell.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Finite union of disjoint intervals.
using IntervalSet = std::vector<Interval>;

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/*
 * Probability measure on [0, 1]: a piecewise-constant density plus a finite
 * list of atoms.
 *
 * The density lives on breakpoints 0 = b_0 < b_1 < ... < b_k = 1 with density
 * d_i on [b_i, b_{i+1}). A grid measure of resolution L is the special case
 * b_i = i 2^-L; `resolution_level()` reports the smallest L for which every
 * breakpoint lies on the level-L dyadic grid. The representation is sparse,
 * so measures built from deep partition cells stay small.
 *
 * Values are immutable after construction and safe to share across threads.
 * All queries (cdf, probability, tv, w1, sampling) are invariant under
 * refinement.
 */
class Measure {
 public:
  /// Normalisation tolerance for user-built measures.
  static constexpr double kNormTolerance = 1e-12;

  /// U[0, 1].
  Measure();

  static Measure uniform() { return Measure(); }

  /// Dyadic grid of 2^level cells with the given densities.
  static Measure dyadic_grid(int level, std::vector<double> densities);

  /// Piecewise density on arbitrary increasing breakpoints covering [0, 1].
  static Measure piecewise(std::vector<double> breakpoints,
                           std::vector<double> densities);

  /// Unit mass at x.
  static Measure point_mass(double x);

  /// General form. Atoms with equal locations are rejected.
  static Measure from_parts(std::vector<double> breakpoints,
                            std::vector<double> densities,
                            std::vector<Atom> atoms);

  /// Uniform atoms at the given points, equal locations merged.
  static Measure empirical(std::span<const double> points);

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> densities() const { return densities_; }
  std::span<const Atom> atoms() const { return atoms_; }

  int resolution_level() const;

  /// Total mass of the diffuse part.
  double continuous_mass() const { return cumulative_.back(); }
  double atom_mass() const;
  double atom_mass_at(double x) const;

  /// Density at x (right-continuous; the last piece is used at x = 1).
  double density_at(double x) const;

  /// F(t) = m([0, t]).
  double cdf(double t) const;
  /// m((-inf, t)), the left limit of the cdf.
  double cdf_left(double t) const;

  double probability(Interval a) const;
  double probability(const IntervalSet& a) const;

  double mean() const;
  double variance() const;
  /// int_a t m(dt).
  double moment(Interval a) const;

  /// inf { t : F(t) >= p } for p in (0, 1].
  double quantile(double p) const;

  /// Same measure with every breakpoint of the level-`level` grid inserted.
  Measure refined(int level) const;

  /// m restricted to `cell` and renormalised. Throws std::domain_error when
  /// m(cell) == 0.
  Measure conditional(Interval cell) const;

  /// Draws the atom part vs the diffuse part by their masses, then inverts
  /// the grid cdf inside the diffuse part.
  double sample(Rng& rng) const;

  /// Draw from m conditioned on `cell` (which must carry positive mass).
  double sample_within(Interval cell, Rng& rng) const;

 private:
  friend class MeasureBuilder;
  struct Trusted {};
  Measure(Trusted, std::vector<double> breakpoints,
          std::vector<double> densities, std::vector<Atom> atoms,
          double tolerance);

  std::size_t piece_of(double x) const;

  std::vector<double> breakpoints_;
  std::vector<double> densities_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;       // diffuse mass left of b_i
  std::vector<double> atom_cumulative_;  // atom mass up to and incl. atom i
  std::vector<double> knots_;            // breakpoints and atom locations
};

/// Builds measures from computed pieces; validates at a looser tolerance
/// than the public factories since the inputs carry arithmetic error.
class MeasureBuilder {
 public:
  static constexpr double kComputedTolerance = 1e-9;
  static Measure build(std::vector<double> breakpoints,
                       std::vector<double> densities, std::vector<Atom> atoms);
};

/// Convex combination sum_i w_i m_i. Weights must be >= 0 and sum to 1.
Measure mixture(std::span<const double> weights,
                std::span<const Measure> measures);

/// sup_A |m1(A) - m2(A)|, computed exactly on the common refinement.
double tv_distance(const Measure& m1, const Measure& m2);

/// int_0^1 |F1 - F2| dt, exact for piecewise-linear cdfs with jumps.
double w1_distance(const Measure& m1, const Measure& m2);

/// Certified upper bound min(w1, 2 tv) on the bounded-Lipschitz distance.
double bl_upper(const Measure& m1, const Measure& m2);

/// sup_t |F1(t) - F2(t)| including left limits.
double ks_distance(const Measure& m1, const Measure& m2);

}  // namespace cidpred

#endif  // CIDPRED_MEASURE_HPP_
