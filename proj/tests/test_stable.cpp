#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cidpred/stable.hpp"
#include "cidpred/stats.hpp"
#include "doctest.h"

using namespace cidpred;

namespace {

// Empirical E cos(tZ) with its 4-sigma band (|cos| <= 1).
double ecf(double gamma, double t, int n, Rng& rng) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::cos(t * stable_sample(gamma, rng));
  return sum / n;
}

}  // namespace

TEST_CASE("gamma must lie in (0, 2]") {
  Rng rng(1);
  CHECK_THROWS_AS(stable_sample(0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(stable_sample(2.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(StableLaw(3.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableLaw(2.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("closed-form cdf values") {
  CHECK(StableLaw(2.0, 0.0, 1.0).cdf(0.0) == doctest::Approx(0.5));
  CHECK(StableLaw(1.0, 0.0, 2.0).cdf(1.0) == doctest::Approx(0.75));
  CHECK(StableLaw(2.0, 1.0, 4.0).cdf(3.0) == doctest::Approx(0.841344746));
  CHECK(StableLaw(2.0, 0.0, 2.0).cdf(1.0) == doctest::Approx(0.760249938));
  CHECK_THROWS_AS(StableLaw(1.5, 0.0, 1.0).cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(StableLaw(0.7, 0.0, 1.0).quantile(0.3), std::domain_error);
  // Scale zero is the point mass.
  CHECK(StableLaw(2.0, 0.3, 0.0).cdf(0.3) == 1.0);
  CHECK(StableLaw(2.0, 0.3, 0.0).cdf(0.2) == 0.0);
}

TEST_CASE("Cauchy cdf matches the integral of its density") {
  // Density (2b/pi) / (b^2 + 4 (t - a)^2), integrated by the trapezoid rule.
  const double a = 0.4;
  const double b = 1.7;
  const auto density = [&](double t) {
    return (2.0 * b / std::numbers::pi) / (b * b + 4.0 * (t - a) * (t - a));
  };
  const StableLaw law(1.0, a, b);
  const double lo = -2.0;
  const double hi = 3.0;
  const int steps = 200000;
  const double h = (hi - lo) / steps;
  double integral = 0.5 * (density(lo) + density(hi));
  for (int i = 1; i < steps; ++i) integral += density(lo + i * h);
  integral *= h;
  CHECK(integral == doctest::Approx(law.cdf(hi) - law.cdf(lo)).epsilon(1e-8));
}

TEST_CASE("quantile inverts cdf") {
  for (double gamma : {1.0, 2.0}) {
    const StableLaw law(gamma, -0.5, 1.3);
    for (double p : {0.001, 0.1, 0.5, 0.77, 0.999}) {
      CHECK(law.cdf(law.quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
  }
}

TEST_CASE("characteristic function") {
  const StableLaw law(1.5, 0.2, 0.8);
  const auto phi = law.characteristic_function(1.3);
  const double modulus = std::exp(-0.4 * std::pow(1.3, 1.5));
  CHECK(phi.real() == doctest::Approx(modulus * std::cos(0.26)));
  CHECK(phi.imag() == doctest::Approx(modulus * std::sin(0.26)));
}

TEST_CASE("sampler distribution, gamma = 2 and 1") {
  const int n = 100000;
  Rng rng(2);
  std::vector<double> xs(n);
  for (double& x : xs) x = stable_sample(2.0, rng);
  CHECK(ks_statistic(xs, [](double t) { return normal_cdf(t); }) < ks_critical(n));
  for (double& x : xs) x = stable_sample(1.0, rng);
  CHECK(ks_statistic(xs, [](double t) { return 0.5 + std::atan(2.0 * t) / std::numbers::pi; }) <
        ks_critical(n));

  // Location-scale law against its own cdf.
  const StableLaw law(1.0, 3.0, 0.5);
  for (double& x : xs) x = law.sample(rng);
  CHECK(ks_statistic(xs, [&](double t) { return law.cdf(t); }) < ks_critical(n));
}

TEST_CASE("sampler characteristic function for all gamma") {
  const int n = 100000;
  Rng rng(3);
  for (double gamma : {0.7, 1.0, 1.5, 2.0}) {
    CAPTURE(gamma);
    for (double t : {0.5, 1.0, 2.0}) {
      const double expected = std::exp(-0.5 * std::pow(t, gamma));
      CHECK(std::abs(ecf(gamma, t, n, rng) - expected) < 0.01);
    }
  }
}

TEST_CASE("sampling is deterministic per seed") {
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 100; ++i) CHECK(stable_sample(0.7, a) == stable_sample(0.7, b));
}
