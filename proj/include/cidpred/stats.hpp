#ifndef CIDPRED_STATS_HPP_
#define CIDPRED_STATS_HPP_

#include <functional>
#include <span>
#include <vector>

namespace cidpred {

/// 99.9% asymptotic Kolmogorov-Smirnov critical value, 1.949 / sqrt(n).
double ks_critical(double n);

/// Two-sample critical value 1.949 sqrt((n + m) / (n m)).
double ks_critical_two_sample(double n, double m);

/// sup_t |F_n(t) - F(t)| for the sample against a continuous cdf. The sample
/// is sorted in place.
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);

/// sup_t |F_n(t) - G_m(t)|. Both samples are sorted in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)
  std::size_t n = 0;
};

/// Summed in index order so results do not depend on scheduling.
Moments moments(std::span<const double> xs);

}  // namespace cidpred

#endif  // CIDPRED_STATS_HPP_
