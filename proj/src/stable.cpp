#include "cidpred/stable.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cidpred {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 2.0)) {
    throw std::invalid_argument("stable: gamma must be in (0, 2], got " +
                                std::to_string(gamma));
  }
}

}  // namespace

double stable_sample(double gamma, Rng& rng) {
  check_gamma(gamma);
  if (gamma == 2.0) return rng.normal();
  if (gamma == 1.0) {
    return 0.5 * std::tan(std::numbers::pi * (rng.uniform_open() - 0.5));
  }
  // Symmetric CMS: V ~ U(-pi/2, pi/2), W ~ Exp(1) gives
  // E exp(itX) = exp(-|t|^gamma).
  const double v = std::numbers::pi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  const double x = std::sin(gamma * v) / std::pow(std::cos(v), 1.0 / gamma) *
                   std::pow(std::cos((1.0 - gamma) * v) / w, (1.0 - gamma) / gamma);
  return std::pow(0.5, 1.0 / gamma) * x;
}

StableLaw::StableLaw(double gamma, double location, double scale)
    : gamma_(gamma), location_(location), scale_(scale) {
  check_gamma(gamma);
  if (!std::isfinite(location)) {
    throw std::invalid_argument("stable: location must be finite");
  }
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("stable: scale must be >= 0");
  }
}

std::complex<double> StableLaw::characteristic_function(double t) const {
  const double modulus = std::exp(-0.5 * scale_ * std::pow(std::abs(t), gamma_));
  return std::polar(modulus, t * location_);
}

double StableLaw::sample(Rng& rng) const {
  if (scale_ == 0.0) return location_;
  return location_ + std::pow(scale_, 1.0 / gamma_) * stable_sample(gamma_, rng);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double StableLaw::cdf(double t) const {
  if (!has_closed_form()) {
    throw std::domain_error("stable: no closed-form cdf for gamma " +
                            std::to_string(gamma_));
  }
  if (scale_ == 0.0) return t >= location_ ? 1.0 : 0.0;
  if (gamma_ == 2.0) return normal_cdf((t - location_) / std::sqrt(scale_));
  return 0.5 + std::atan(2.0 * (t - location_) / scale_) / std::numbers::pi;
}

double StableLaw::quantile(double p) const {
  if (!has_closed_form()) {
    throw std::domain_error("stable: no closed-form quantile for gamma " +
                            std::to_string(gamma_));
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("stable: quantile needs p in (0, 1)");
  }
  if (scale_ == 0.0) return location_;
  if (gamma_ == 2.0) {
    return location_ -
           std::sqrt(scale_) * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  return location_ + 0.5 * scale_ * std::tan(std::numbers::pi * (p - 0.5));
}

}  // namespace cidpred
