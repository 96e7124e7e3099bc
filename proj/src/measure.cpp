#include "cidpred/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace cidpred {
namespace {

void check_layout(const std::vector<double>& breakpoints,
                  const std::vector<double>& densities) {
  if (breakpoints.size() < 2 || densities.size() + 1 != breakpoints.size()) {
    throw std::invalid_argument(
        "measure: need k+1 breakpoints for k densities (k >= 1)");
  }
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
    throw std::invalid_argument("measure: breakpoints must span [0, 1]");
  }
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) {
      throw std::invalid_argument(
          "measure: breakpoints must be strictly increasing");
    }
  }
  for (double d : densities) {
    if (!std::isfinite(d) || d < 0.0) {
      throw std::invalid_argument("measure: densities must be finite and >= 0");
    }
  }
}

// Number of fractional binary digits of x in [0, 1].
int dyadic_depth(double x) {
  if (x == 0.0 || x == 1.0) return 0;
  int exponent = 0;
  const double fraction = std::frexp(x, &exponent);  // x = fraction * 2^exponent
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
  int shift = exponent - 53;
  while ((mantissa & 1U) == 0U) {
    mantissa >>= 1U;
    ++shift;
  }
  return shift >= 0 ? 0 : -shift;
}

double abs_linear_integral(double g0, double slope, double width) {
  const double g1 = g0 + slope * width;
  if ((g0 >= 0.0 && g1 >= 0.0) || (g0 <= 0.0 && g1 <= 0.0)) {
    return 0.5 * width * (std::abs(g0) + std::abs(g1));
  }
  const double root = -g0 / slope;
  return 0.5 * (std::abs(g0) * root + std::abs(g1) * (width - root));
}

std::vector<double> merged_points(const Measure& m1, const Measure& m2,
                                  bool with_atoms) {
  std::vector<double> pts(m1.breakpoints().begin(), m1.breakpoints().end());
  pts.insert(pts.end(), m2.breakpoints().begin(), m2.breakpoints().end());
  if (with_atoms) {
    for (const Atom& a : m1.atoms()) pts.push_back(a.location);
    for (const Atom& a : m2.atoms()) pts.push_back(a.location);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

Measure::Measure()
    : Measure(Trusted{}, {0.0, 1.0}, {1.0}, {}, kNormTolerance) {}

Measure::Measure(Trusted, std::vector<double> breakpoints,
                 std::vector<double> densities, std::vector<Atom> atoms,
                 double tolerance)
    : breakpoints_(std::move(breakpoints)),
      densities_(std::move(densities)),
      atoms_(std::move(atoms)) {
  check_layout(breakpoints_, densities_);
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!(a.location >= 0.0 && a.location <= 1.0)) {
      throw std::invalid_argument("measure: atom outside [0, 1]");
    }
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) {
      throw std::invalid_argument("measure: atom masses must be > 0");
    }
    if (i > 0 && atoms_[i - 1].location == a.location) {
      throw std::invalid_argument("measure: duplicate atom location " +
                                  std::to_string(a.location));
    }
  }
  cumulative_.assign(breakpoints_.size(), 0.0);
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    cumulative_[i + 1] =
        cumulative_[i] + densities_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
  }
  atom_cumulative_.resize(atoms_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    acc += atoms_[i].mass;
    atom_cumulative_[i] = acc;
  }
  knots_ = breakpoints_;
  for (const Atom& a : atoms_) knots_.push_back(a.location);
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
  const double total = cumulative_.back() + acc;
  if (!(std::abs(total - 1.0) <= tolerance)) {
    throw std::invalid_argument("measure: total mass " + std::to_string(total) +
                                " is not 1");
  }
}

Measure Measure::dyadic_grid(int level, std::vector<double> densities) {
  if (level < 0 || level > 30) {
    throw std::invalid_argument("measure: grid level must be in [0, 30]");
  }
  const std::size_t cells = std::size_t{1} << level;
  if (densities.size() != cells) {
    throw std::invalid_argument("measure: grid needs 2^level densities");
  }
  std::vector<double> bps(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    bps[i] = std::ldexp(static_cast<double>(i), -level);
  }
  return Measure(Trusted{}, std::move(bps), std::move(densities), {},
                 kNormTolerance);
}

Measure Measure::piecewise(std::vector<double> breakpoints,
                           std::vector<double> densities) {
  return Measure(Trusted{}, std::move(breakpoints), std::move(densities), {},
                 kNormTolerance);
}

Measure Measure::point_mass(double x) {
  return Measure(Trusted{}, {0.0, 1.0}, {0.0}, {{x, 1.0}}, kNormTolerance);
}

Measure Measure::from_parts(std::vector<double> breakpoints,
                            std::vector<double> densities,
                            std::vector<Atom> atoms) {
  return Measure(Trusted{}, std::move(breakpoints), std::move(densities),
                 std::move(atoms), kNormTolerance);
}

Measure Measure::empirical(std::span<const double> points) {
  if (points.empty()) {
    throw std::invalid_argument("measure: empirical measure of no points");
  }
  std::map<double, std::size_t> counts;
  for (double x : points) ++counts[x];
  const double n = static_cast<double>(points.size());
  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  for (const auto& [x, k] : counts) {
    atoms.push_back({x, static_cast<double>(k) / n});
  }
  return MeasureBuilder::build({0.0, 1.0}, {0.0}, std::move(atoms));
}

int Measure::resolution_level() const {
  int level = 0;
  for (double b : breakpoints_) level = std::max(level, dyadic_depth(b));
  return level;
}

double Measure::atom_mass() const {
  return atom_cumulative_.empty() ? 0.0 : atom_cumulative_.back();
}

double Measure::atom_mass_at(double x) const {
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), x,
      [](const Atom& a, double v) { return a.location < v; });
  return (it != atoms_.end() && it->location == x) ? it->mass : 0.0;
}

std::size_t Measure::piece_of(double x) const {
  // Largest i with b_i <= x, clamped to the last piece.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin()) return 0;
  const auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(i, densities_.size() - 1);
}

double Measure::density_at(double x) const { return densities_[piece_of(x)]; }

namespace {

double diffuse_cdf(std::span<const double> bps, std::span<const double> dens,
                   std::span<const double> cum, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return cum.back();
  auto it = std::upper_bound(bps.begin(), bps.end(), t);
  const auto i = static_cast<std::size_t>(it - bps.begin()) - 1;
  return cum[i] + dens[i] * (t - bps[i]);
}

}  // namespace

double Measure::cdf(double t) const {
  double f = diffuse_cdf(breakpoints_, densities_, cumulative_, t);
  auto it = std::upper_bound(
      atoms_.begin(), atoms_.end(), t,
      [](double v, const Atom& a) { return v < a.location; });
  if (it != atoms_.begin()) {
    f += atom_cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }
  return f;
}

double Measure::cdf_left(double t) const {
  double f = diffuse_cdf(breakpoints_, densities_, cumulative_, t);
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), t,
      [](const Atom& a, double v) { return a.location < v; });
  if (it != atoms_.begin()) {
    f += atom_cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }
  return f;
}

// Sums the pieces and atoms inside `a` directly instead of differencing the
// cdf, which would lose all relative accuracy on very narrow cells.
double Measure::probability(Interval a) const {
  if (!(a.lo < a.hi)) return 0.0;
  constexpr std::size_t kDirect = 32;
  const bool closed = a.hi >= 1.0;
  const double lo = std::max(0.0, a.lo);
  const double hi = std::min(1.0, a.hi);
  double p = 0.0;
  if (lo < hi) {
    const std::size_t i0 = piece_of(lo);
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), hi);
    const std::size_t i1 =
        std::min(static_cast<std::size_t>(it - breakpoints_.begin()) - 1, densities_.size() - 1);
    if (i0 == i1) {
      p = densities_[i0] * (hi - lo);
    } else {
      p = densities_[i0] * (breakpoints_[i0 + 1] - lo) + densities_[i1] * (hi - breakpoints_[i1]);
      if (i1 - i0 <= kDirect) {
        for (std::size_t i = i0 + 1; i < i1; ++i) {
          p += densities_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
        }
      } else {
        p += cumulative_[i1] - cumulative_[i0 + 1];
      }
    }
  }
  const auto first = static_cast<std::size_t>(
      std::lower_bound(atoms_.begin(), atoms_.end(), a.lo,
                       [](const Atom& at, double v) { return at.location < v; }) -
      atoms_.begin());
  const auto last = static_cast<std::size_t>(
      closed ? std::upper_bound(atoms_.begin(), atoms_.end(), a.hi,
                                [](double v, const Atom& at) { return v < at.location; }) -
                   atoms_.begin()
             : std::lower_bound(atoms_.begin(), atoms_.end(), a.hi,
                                [](const Atom& at, double v) { return at.location < v; }) -
                   atoms_.begin());
  if (last > first) {
    if (last - first <= kDirect) {
      for (std::size_t i = first; i < last; ++i) p += atoms_[i].mass;
    } else {
      p += atom_cumulative_[last - 1] - (first > 0 ? atom_cumulative_[first - 1] : 0.0);
    }
  }
  return std::max(0.0, p);
}

double Measure::probability(const IntervalSet& a) const {
  double p = 0.0;
  for (const Interval& iv : a) p += probability(iv);
  return p;
}

double Measure::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    const double lo = breakpoints_[i];
    const double hi = breakpoints_[i + 1];
    m += densities_[i] * (hi - lo) * (hi + lo) * 0.5;
  }
  for (const Atom& a : atoms_) m += a.location * a.mass;
  return m;
}

double Measure::moment(Interval a) const {
  if (!(a.lo < a.hi)) return 0.0;
  const bool closed = a.hi >= 1.0;
  double m = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    const double lo = std::max(a.lo, breakpoints_[i]);
    const double hi = std::min(a.hi, breakpoints_[i + 1]);
    if (lo < hi) m += densities_[i] * (hi - lo) * (hi + lo) * 0.5;
  }
  for (const Atom& at : atoms_) {
    if (at.location >= a.lo && (at.location < a.hi || (closed && at.location <= a.hi))) {
      m += at.location * at.mass;
    }
  }
  return m;
}

double Measure::variance() const {
  double second = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    const double lo = breakpoints_[i];
    const double hi = breakpoints_[i + 1];
    second += densities_[i] * (hi - lo) * (hi * hi + hi * lo + lo * lo) / 3.0;
  }
  for (const Atom& a : atoms_) second += a.location * a.location * a.mass;
  const double m = mean();
  return std::max(0.0, second - m * m);
}

double Measure::quantile(double p) const {
  if (!(p > 0.0)) return 0.0;
  // Bisection on the right-continuous cdf, finished off analytically inside
  // the piece or at the atom where the crossing happens.
  auto it = std::partition_point(knots_.begin(), knots_.end(),
                                 [&](double k) { return cdf(k) < p; });
  if (it == knots_.end()) return 1.0;
  if (it == knots_.begin()) return 0.0;
  const double right = *it;
  if (cdf_left(right) >= p) {
    const double left = *(it - 1);
    const double d = density_at(left);
    const double t = left + (p - cdf(left)) / d;
    return std::clamp(t, left, right);
  }
  return right;
}

Measure Measure::refined(int level) const {
  if (level < 0 || level > 24) {
    throw std::invalid_argument("measure: refinement level must be in [0, 24]");
  }
  std::vector<double> pts(breakpoints_.begin(), breakpoints_.end());
  const std::size_t cells = std::size_t{1} << level;
  for (std::size_t i = 1; i < cells; ++i) {
    pts.push_back(std::ldexp(static_cast<double>(i), -level));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> dens(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) dens[i] = density_at(pts[i]);
  return Measure(Trusted{}, std::move(pts), std::move(dens), atoms_,
                 MeasureBuilder::kComputedTolerance);
}

Measure Measure::conditional(Interval cell) const {
  const double mass = probability(cell);
  if (!(mass > 0.0)) {
    throw std::domain_error("measure: conditioning on a zero-probability cell");
  }
  const bool closed = cell.hi >= 1.0;
  const double lo = std::max(0.0, cell.lo);
  const double hi = std::min(1.0, cell.hi);
  std::vector<double> bps;
  std::vector<double> dens;
  if (lo > 0.0) {
    bps.push_back(0.0);
    dens.push_back(0.0);
  }
  bps.push_back(lo);
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    const double b = breakpoints_[i + 1];
    const double start = std::max(lo, breakpoints_[i]);
    if (start >= hi) break;
    if (b <= lo) continue;
    dens.push_back(densities_[i] / mass);
    bps.push_back(std::min(b, hi));
  }
  if (hi < 1.0) {
    dens.push_back(0.0);
    bps.push_back(1.0);
  }
  std::vector<Atom> atoms;
  for (const Atom& a : atoms_) {
    if (a.location >= lo && (a.location < hi || (closed && a.location <= hi))) {
      atoms.push_back({a.location, a.mass / mass});
    }
  }
  return MeasureBuilder::build(std::move(bps), std::move(dens), std::move(atoms));
}

double Measure::sample(Rng& rng) const {
  const double u = rng.uniform();
  const double atoms_total = atom_mass();
  if (u < atoms_total) {
    auto it = std::upper_bound(atom_cumulative_.begin(), atom_cumulative_.end(), u);
    if (it == atom_cumulative_.end()) --it;
    return atoms_[static_cast<std::size_t>(it - atom_cumulative_.begin())].location;
  }
  const double v = std::min(u - atoms_total, cumulative_.back());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
  auto i = static_cast<std::size_t>(it - cumulative_.begin());
  i = i == 0 ? 0 : i - 1;
  i = std::min(i, densities_.size() - 1);
  while (densities_[i] == 0.0 && i > 0) --i;  // rounding at the top end
  const double t = breakpoints_[i] + (v - cumulative_[i]) / densities_[i];
  return std::clamp(t, breakpoints_[i], breakpoints_[i + 1]);
}

double Measure::sample_within(Interval cell, Rng& rng) const {
  const double mass = probability(cell);
  if (!(mass > 0.0)) {
    throw std::domain_error("measure: sampling a zero-probability cell");
  }
  const double p = cdf_left(cell.lo) + (1.0 - rng.uniform()) * mass;
  double t = std::max(quantile(p), cell.lo);
  if (cell.hi < 1.0 && t >= cell.hi) t = std::nextafter(cell.hi, cell.lo);
  return std::min(t, 1.0);
}

Measure MeasureBuilder::build(std::vector<double> breakpoints,
                              std::vector<double> densities,
                              std::vector<Atom> atoms) {
  return Measure(Measure::Trusted{}, std::move(breakpoints),
                 std::move(densities), std::move(atoms), kComputedTolerance);
}

Measure mixture(std::span<const double> weights,
                std::span<const Measure> measures) {
  if (weights.size() != measures.size() || measures.empty()) {
    throw std::invalid_argument("mixture: need one weight per measure");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > MeasureBuilder::kComputedTolerance) {
    throw std::invalid_argument("mixture: weights must sum to 1");
  }
  std::vector<double> pts;
  for (const Measure& m : measures) {
    pts.insert(pts.end(), m.breakpoints().begin(), m.breakpoints().end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> dens(pts.size() - 1, 0.0);
  std::map<double, double> atom_mass;
  for (std::size_t j = 0; j < measures.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const Measure& m = measures[j];
    std::size_t piece = 0;
    const auto bps = m.breakpoints();
    const auto md = m.densities();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      while (bps[piece + 1] <= pts[i]) ++piece;
      dens[i] += weights[j] * md[piece];
    }
    for (const Atom& a : m.atoms()) atom_mass[a.location] += weights[j] * a.mass;
  }
  std::vector<Atom> atoms;
  for (const auto& [x, w] : atom_mass) {
    if (w > 0.0) atoms.push_back({x, w});
  }
  return MeasureBuilder::build(std::move(pts), std::move(dens), std::move(atoms));
}

double tv_distance(const Measure& m1, const Measure& m2) {
  const auto pts = merged_points(m1, m2, false);
  double diffuse = 0.0;
  std::size_t p1 = 0;
  std::size_t p2 = 0;
  const auto b1 = m1.breakpoints();
  const auto b2 = m2.breakpoints();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    while (b1[p1 + 1] <= pts[i]) ++p1;
    while (b2[p2 + 1] <= pts[i]) ++p2;
    diffuse += std::abs(m1.densities()[p1] - m2.densities()[p2]) *
               (pts[i + 1] - pts[i]);
  }
  double atomic = 0.0;
  const auto a1 = m1.atoms();
  const auto a2 = m2.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a1.size() || j < a2.size()) {
    if (j == a2.size() || (i < a1.size() && a1[i].location < a2[j].location)) {
      atomic += a1[i++].mass;
    } else if (i == a1.size() || a2[j].location < a1[i].location) {
      atomic += a2[j++].mass;
    } else {
      atomic += std::abs(a1[i++].mass - a2[j++].mass);
    }
  }
  return std::min(1.0, 0.5 * (diffuse + atomic));
}

double w1_distance(const Measure& m1, const Measure& m2) {
  const auto pts = merged_points(m1, m2, true);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double p = pts[i];
    const double g0 = m1.cdf(p) - m2.cdf(p);
    const double slope = m1.density_at(p) - m2.density_at(p);
    total += abs_linear_integral(g0, slope, pts[i + 1] - p);
  }
  return total;
}

double bl_upper(const Measure& m1, const Measure& m2) {
  return std::min(w1_distance(m1, m2), 2.0 * tv_distance(m1, m2));
}

double ks_distance(const Measure& m1, const Measure& m2) {
  const auto pts = merged_points(m1, m2, true);
  double sup = 0.0;
  for (double t : pts) {
    sup = std::max(sup, std::abs(m1.cdf(t) - m2.cdf(t)));
    sup = std::max(sup, std::abs(m1.cdf_left(t) - m2.cdf_left(t)));
  }
  return sup;
}

}  // namespace cidpred
