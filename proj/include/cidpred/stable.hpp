#ifndef CIDPRED_STABLE_HPP_
#define CIDPRED_STABLE_HPP_

#include <complex>

#include "cidpred/rng.hpp"

namespace cidpred {

/// Draw of Z, the symmetric gamma-stable variable with
/// E exp(itZ) = exp(-|t|^gamma / 2).
///
/// Chambers-Mallows-Stuck for general gamma, rescaled by (1/2)^(1/gamma);
/// gamma = 2 is a standard normal draw and gamma = 1 is (1/2) tan(pi (U - 1/2)).
/// Throws std::invalid_argument unless 0 < gamma <= 2.
double stable_sample(double gamma, Rng& rng);

/*
 * S(a, b): the law of a + b^(1/gamma) Z on the real line.
 *
 * gamma = 2 is the normal law with mean a and variance b; gamma = 1 is the
 * Cauchy law with density (2b/pi) / (b^2 + 4 (t - a)^2), so that the standard
 * Cauchy is S(0, 2). b = 0 is the point mass at a.
 *
 * Closed-form cdf and quantile exist only for gamma in {1, 2}; the other
 * members throw std::domain_error for any other gamma.
 */
class StableLaw {
 public:
  StableLaw(double gamma, double location, double scale);

  double gamma() const { return gamma_; }
  double location() const { return location_; }
  double scale() const { return scale_; }

  bool has_closed_form() const { return gamma_ == 1.0 || gamma_ == 2.0; }

  std::complex<double> characteristic_function(double t) const;

  double sample(Rng& rng) const;

  double cdf(double t) const;
  double quantile(double p) const;

 private:
  double gamma_;
  double location_;
  double scale_;
};

/// Standard normal cdf.
double normal_cdf(double z);

}  // namespace cidpred

#endif  // CIDPRED_STABLE_HPP_
