#include <cmath>
#include <stdexcept>
#include <vector>

#include "cidpred/partition.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cidpred;

TEST_CASE("locate") {
  const auto s = PartitionScheme::dyadic();
  const Cell c = s.locate(2, 0.3);
  CHECK(c.index == 1);
  CHECK(c.bounds.lo == 0.25);
  CHECK(c.bounds.hi == 0.5);
  CHECK(s.locate(0, 0.77).index == 0);
  CHECK(s.locate(0, 0.77).bounds.hi == 1.0);
  CHECK(s.locate(3, 1.0).index == 7);
  CHECK(s.locate(3, 0.5).index == 4);
  CHECK_THROWS_AS(s.locate(-1, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(s.locate(1, 1.2), std::invalid_argument);
}

TEST_CASE("slower refinement and the level cap") {
  const auto s = PartitionScheme::dyadic(3);
  CHECK(s.grid_for_step(0) == 0);
  CHECK(s.grid_for_step(5) == 1);
  CHECK(s.mesh(6) == 0.25);
  const auto d = PartitionScheme::dyadic();
  CHECK(d.grid_for_step(500) == PartitionScheme::kMaxDyadicLevel);
  CHECK(d.mesh(500) == std::ldexp(1.0, -52));
  CHECK_THROWS(PartitionScheme::dyadic(0));
  CHECK_THROWS(PartitionScheme::dyadic(1, 60));
}

TEST_CASE("mesh") {
  const auto s = PartitionScheme::dyadic();
  CHECK(s.mesh(3) == 0.125);
  CHECK(s.mesh(0) == 1.0);
  const auto e = PartitionScheme::explicit_grids({{0.0, 0.2, 1.0}});
  CHECK(e.mesh(0) == doctest::Approx(0.8));
  for (int n = 0; n < 60; ++n) CHECK(s.mesh(n + 1) <= s.mesh(n));
}

TEST_CASE("explicit grids") {
  const auto e = PartitionScheme::explicit_grids({{0.0, 1.0}, {0.0, 0.2, 1.0}, {0.0, 0.2, 0.6, 1.0}});
  CHECK(e.locate(1, 0.5).index == 1);
  CHECK(e.locate(2, 0.5).bounds.hi == 0.6);
  CHECK(e.locate(9, 1.0).index == 2);
  CHECK(e.cell_count(2) == 3.0);
  CHECK(e.children(e.locate(1, 0.5), 2).size() == 2);
  CHECK_THROWS(PartitionScheme::explicit_grids({{0.0, 0.5, 1.0}, {0.0, 0.2, 1.0}}));
  CHECK_THROWS(PartitionScheme::explicit_grids({{0.0, 0.5}}));
  CHECK_THROWS(PartitionScheme::explicit_grids({{0.0, 0.5, 0.5, 1.0}}));
  CHECK_THROWS(PartitionScheme::explicit_grids({}));
}

TEST_CASE("cells refine") {
  const auto s = PartitionScheme::dyadic();
  for (int n = 0; n < 8; ++n) {
    for (const Cell& fine : s.cells(n + 1)) {
      const Cell parent = s.locate(n, fine.bounds.lo);
      CHECK(fine.bounds.lo >= parent.bounds.lo);
      CHECK(fine.bounds.hi <= parent.bounds.hi);
    }
  }
  CHECK_THROWS_AS(s.cells(30), std::length_error);
}

TEST_CASE("cell_conditional") {
  const auto s = PartitionScheme::dyadic();
  const Measure u = Measure::uniform();
  const Measure c = cell_conditional(u, s, 1, s.locate(1, 0.1));
  CHECK(c.density_at(0.1) == doctest::Approx(2.0));
  CHECK(c.density_at(0.6) == 0.0);
  CHECK(tv_distance(cell_conditional(u, s, 0, s.locate(0, 0.3)), u) == 0.0);
  const Measure skew = Measure::dyadic_grid(1, {1.5, 0.5});
  CHECK(cell_conditional(skew, s, 1, s.locate(1, 0.9)).density_at(0.9) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cell_conditional(u, s, 2, s.locate(1, 0.1)), std::invalid_argument);
}

TEST_CASE("zero-mass cells are rejected") {
  const Measure gap = Measure::piecewise({0.0, 0.5, 1.0}, {2.0, 0.0});
  CHECK_THROWS_AS(PartitionScheme::dyadic().check_positive(gap), std::domain_error);
  CHECK_THROWS_AS(PartitionScheme::explicit_grids({{0.0, 0.5, 1.0}}).check_positive(gap),
                  std::domain_error);
  // A gap narrower than any max-level cell is harmless.
  CHECK_NOTHROW(PartitionScheme::dyadic(1, 3).check_positive(
      Measure::piecewise({0.0, 0.3, 0.31, 1.0}, {1.0 / 0.99, 0.0, 1.0 / 0.99})));
  // With max level 1 the gap is itself a cell; with max level 0 it is not.
  CHECK_THROWS(PartitionScheme::dyadic(1, 1).check_positive(gap));
  CHECK_NOTHROW(PartitionScheme::dyadic(1, 0).check_positive(gap));
  // Atoms fill otherwise empty cells only at their own location.
  const Measure atom_gap = Measure::from_parts({0.0, 0.5, 1.0}, {1.0, 0.0}, {{0.75, 0.5}});
  CHECK_NOTHROW(PartitionScheme::dyadic(1, 1).check_positive(atom_gap));
  CHECK_THROWS(PartitionScheme::dyadic(1, 2).check_positive(atom_gap));
  CHECK_NOTHROW(PartitionScheme::dyadic().check_positive(Measure::uniform()));
}

TEST_CASE("tower property of partition kernels") {
  // sum_{H' in H_n, H' in H} nu(H'|H) nu(A|H') = nu(A|H) for A in H_n.
  Rng rng(5);
  const auto s = PartitionScheme::dyadic();
  for (int trial = 0; trial < 20; ++trial) {
    const Measure nu = cidpred::testing::random_measure(rng, 4, false);
    const Measure strictly_positive = mixture(std::vector<double>{0.5, 0.5},
                                              std::vector<Measure>{nu, Measure::uniform()});
    for (int m = 0; m < 3; ++m) {
      for (int n = m + 1; n < 6; ++n) {
        for (const Cell& coarse : s.cells(m)) {
          const Measure nu_h = cell_conditional(strictly_positive, s, m, coarse);
          for (const Cell& a : s.cells(n)) {
            double lhs = 0.0;
            for (const Cell& fine : s.children(coarse, n)) {
              lhs += nu_h.probability(fine.bounds) *
                     cell_conditional(strictly_positive, s, n, fine).probability(a.bounds);
            }
            CHECK(std::abs(lhs - nu_h.probability(a.bounds)) <= 1e-12);
          }
        }
      }
    }
    // alpha_0 = nu integrated against nu is nu.
    CHECK(tv_distance(cell_conditional(strictly_positive, s, 0, s.locate(0, 0.5)),
                      strictly_positive) <= 1e-15);
  }
}
