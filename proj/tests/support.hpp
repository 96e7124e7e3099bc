#ifndef CIDPRED_TESTS_SUPPORT_HPP_
#define CIDPRED_TESTS_SUPPORT_HPP_

#include <cmath>
#include <map>
#include <vector>

#include "cidpred/measure.hpp"
#include "cidpred/rng.hpp"

namespace cidpred::testing {

// Random dyadic measure of level <= max_level, optionally with atoms on the
// same grid. Masses are normalised so the total is 1 to rounding.
inline Measure random_measure(Rng& rng, int max_level = 5, bool with_atoms = true) {
  const int level = static_cast<int>(rng.index(static_cast<std::uint64_t>(max_level) + 1));
  const std::size_t cells = std::size_t{1} << level;
  std::vector<double> weights(cells);
  for (double& w : weights) w = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
  weights[rng.index(cells)] += 0.5;
  std::map<double, double> atoms;
  if (with_atoms) {
    const auto count = rng.index(3);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double loc = std::ldexp(static_cast<double>(rng.index(cells + 1)), -level);
      atoms[loc] += 0.1 + rng.uniform();
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (const auto& [x, m] : atoms) total += m;
  std::vector<double> dens(cells);
  for (std::size_t i = 0; i < cells; ++i) dens[i] = weights[i] / total * static_cast<double>(cells);
  std::vector<double> bps(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) bps[i] = std::ldexp(static_cast<double>(i), -level);
  std::vector<Atom> out;
  for (const auto& [x, m] : atoms) out.push_back({x, m / total});
  return MeasureBuilder::build(std::move(bps), std::move(dens), std::move(out));
}

// Mass of each level-`level` cell [k h, (k+1) h) computed from density_at
// midpoints; exact for measures whose breakpoints lie on that grid. Atoms are
// returned separately.
inline std::vector<double> cell_masses(const Measure& m, int level) {
  const std::size_t cells = std::size_t{1} << level;
  const double h = std::ldexp(1.0, -level);
  std::vector<double> out(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    out[k] = m.density_at((static_cast<double>(k) + 0.5) * h) * h;
  }
  return out;
}

// Brute-force total variation for dyadic measures of level <= `level`.
inline double tv_oracle(const Measure& a, const Measure& b, int level = 12) {
  const auto ca = cell_masses(a, level);
  const auto cb = cell_masses(b, level);
  double sum = 0.0;
  for (std::size_t k = 0; k < ca.size(); ++k) sum += std::abs(ca[k] - cb[k]);
  std::map<double, double> diff;
  for (const Atom& x : a.atoms()) diff[x.location] += x.mass;
  for (const Atom& x : b.atoms()) diff[x.location] -= x.mass;
  for (const auto& [loc, d] : diff) sum += std::abs(d);
  return 0.5 * sum;
}

// Midpoint-rule integral of |F_a - F_b|.
inline double w1_oracle(const Measure& a, const Measure& b, int level = 14) {
  const std::size_t cells = std::size_t{1} << level;
  const double h = std::ldexp(1.0, -level);
  double sum = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * h;
    sum += std::abs(a.cdf(t) - b.cdf(t)) * h;
  }
  return sum;
}

}  // namespace cidpred::testing

#endif  // CIDPRED_TESTS_SUPPORT_HPP_
