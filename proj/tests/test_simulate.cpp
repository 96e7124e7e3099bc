#include <cmath>
#include <stdexcept>
#include <vector>

#include "cidpred/simulate.hpp"
#include "cidpred/stats.hpp"
#include "doctest.h"

using namespace cidpred;

namespace {

Strategy gaussian() { return StableStrategy(2.0, 1.0, GeometricSchedule{0.5}); }
Strategy dirichlet_like() {
  return ConvexStrategy(Measure::uniform(), PartitionScheme::dyadic(), DirichletLike{1.0});
}

}  // namespace

TEST_CASE("forward_sample is deterministic") {
  const Strategy s = gaussian();
  const Trajectory a = forward_sample(s, 3, 42);
  const Trajectory b = forward_sample(s, 3, 42);
  CHECK(a.observations == b.observations);
  CHECK(a.f_values == b.f_values);
  CHECK(a.observations.size() == 3);
  CHECK(a.f_values.size() == 4);
  CHECK(forward_sample(s, 3, 43).observations != a.observations);
  CHECK(forward_sample(s, 3, 42, 1).observations != a.observations);
  CHECK_THROWS_AS(forward_sample(s, 0, 42), std::invalid_argument);
}

TEST_CASE("explicit schedule exhaustion propagates") {
  const Strategy s = StableStrategy(1.0, 1.0, ExplicitSchedule{{0.0, 0.5, 0.75}});
  CHECK_NOTHROW(forward_sample(s, 2, 1));
  CHECK_THROWS_AS(forward_sample(s, 3, 1), std::out_of_range);
  EnsembleOptions o;
  o.M = 50;
  o.N = 3;
  CHECK_THROWS_AS(ensemble(s, o), std::out_of_range);
}

TEST_CASE("snapshots equal predictives recomputed from the prefix") {
  const std::vector<int> steps{0, 3, 10};
  Reinforcement r;
  const ConvexStrategy convex(Measure::dyadic_grid(1, {0.8, 1.2}), PartitionScheme::dyadic(),
                              r);
  const Trajectory t = forward_sample(convex, 10, 7, 0, steps);
  REQUIRE(t.snapshots.size() == 3);
  for (const auto& [n, snap] : t.snapshots) {
    const auto prefix = std::span<const double>(t.observations).first(static_cast<std::size_t>(n));
    const Measure recomputed = convex.predictive(convex.replay(prefix));
    CHECK(tv_distance(std::get<Measure>(snap), recomputed) == 0.0);
  }
  CHECK(t.weights.size() == 10);
  CHECK(t.weights[0] == 0.5);

  const StableStrategy stable(1.5, 2.0, GeometricSchedule{0.3});
  const Trajectory u = forward_sample(stable, 10, 7, 0, steps);
  for (const auto& [n, snap] : u.snapshots) {
    const StableLaw& law = std::get<StableLaw>(snap);
    CHECK(law.location() == u.f_values[static_cast<std::size_t>(n)]);
    CHECK(law.scale() == doctest::Approx(2.0 - stable.u_at(n)));
  }
}

TEST_CASE("ensemble with M = 1 is forward_sample") {
  for (const Strategy& s : {gaussian(), dirichlet_like()}) {
    EnsembleOptions o;
    o.N = 6;
    o.seed = 5;
    const EnsembleStats e = ensemble(s, o);
    CHECK(std::vector<double>(e.row(0).begin(), e.row(0).end()) ==
          forward_sample(s, 6, 5).observations);
  }
}

TEST_CASE("parallel ensemble is bit-identical to the serial reference") {
  for (const Strategy& s : {gaussian(), dirichlet_like(),
                            Strategy(DirichletBaseline(2.0, Measure::uniform()))}) {
    EnsembleOptions o;
    o.M = 2000;
    o.N = 8;
    o.seed = 99;
    o.pairs = {{1, 2}, {3, 7}};
    o.keep = 2;
    o.snapshot_steps = {0, 4};
    const EnsembleStats a = ensemble_serial(s, o);
    for (int threads : {1, 3, 8}) {
      o.threads = threads;
      const EnsembleStats b = ensemble(s, o);
      CHECK(a.x == b.x);
      CHECK(a.f == b.f);
      for (int n = 0; n < o.N; ++n) {
        CHECK(a.mean[n].mean == b.mean[n].mean);
        CHECK(a.second_moment[n].sd == b.second_moment[n].sd);
      }
      CHECK(a.pairs[1].product.mean == b.pairs[1].product.mean);
      CHECK(b.kept.size() == 2);
      CHECK(b.kept[1].observations == forward_sample(s, o.N, o.seed, 1).observations);
    }
  }
}

TEST_CASE("ensemble option validation") {
  EnsembleOptions o;
  o.M = 0;
  CHECK_THROWS(ensemble(gaussian(), o));
  o.M = 10;
  o.N = 3;
  o.pairs = {{1, 4}};
  CHECK_THROWS(ensemble(gaussian(), o));
}

TEST_CASE("marginal of X_1") {
  const int M = 100000;
  EnsembleOptions o;
  o.M = M;
  o.N = 2;
  o.seed = 2024;

  const EnsembleStats g = ensemble(gaussian(), o);
  CHECK(std::abs(g.mean[0].mean) < 4.0 / std::sqrt(M));
  CHECK(std::abs(g.second_moment[0].mean - 1.0) < 4.0 * std::sqrt(2.0 / M));
  auto x1 = g.column(1);
  CHECK(ks_statistic(x1, [](double t) { return normal_cdf(t); }) < ks_critical(M));

  const EnsembleStats c = ensemble(dirichlet_like(), o);
  auto u1 = c.column(1);
  CHECK(ks_statistic(u1, [](double t) { return std::clamp(t, 0.0, 1.0); }) < ks_critical(M));
}

TEST_CASE("X_1 and X_2 share one marginal") {
  const int M = 100000;
  EnsembleOptions o;
  o.M = M;
  o.N = 2;
  o.seed = 77;
  Reinforcement r;
  const std::vector<Strategy> strategies{
      gaussian(),
      dirichlet_like(),
      ConvexStrategy(Measure::dyadic_grid(2, {0.4, 1.6, 1.2, 0.8}), PartitionScheme::dyadic(),
                     ExpSmoothing{0.3}),
      ConvexStrategy(Measure::uniform(), PartitionScheme::dyadic(), r),
      StableStrategy(0.7, 1.0, GeometricSchedule{0.5}),
      DirichletBaseline(1.0, Measure::uniform()),
  };
  for (const Strategy& s : strategies) {
    const EnsembleStats e = ensemble(s, o);
    auto a = e.column(1);
    auto b = e.column(2);
    CHECK(ks_two_sample(a, b) < ks_critical_two_sample(M, M));
  }
}
