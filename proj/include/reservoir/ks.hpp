#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace reservoir {

/// Kolmogorov-Smirnov distance between a pooled sample and a CDF that may
/// carry atoms at the lower and upper ends of its support.
///
/// The sample is split into `at_lower` hits on the lower atom, `at_upper`
/// hits on the upper atom, and the sorted `interior` values in between.
/// `cdf` is evaluated only at interior sample points and must be continuous
/// there. The supremum is taken over the atoms and both one-sided limits of
/// the empirical CDF at every interior sample.
template <typename Cdf>
double ks_distance_with_atoms(std::span<const double> interior, std::size_t at_lower,
                              std::size_t at_upper, double lower_mass, double upper_mass,
                              Cdf&& cdf) {
  const double total = static_cast<double>(interior.size() + at_lower + at_upper);
  if (total == 0.0) return 0.0;

  double below = static_cast<double>(at_lower);
  double d = std::abs(below / total - lower_mass);
  for (double x : interior) {
    const double f = cdf(x);
    d = std::max(d, std::abs(below / total - f));
    below += 1.0;
    d = std::max(d, std::abs(below / total - f));
  }
  // Left limit at the upper atom.
  d = std::max(d, std::abs(below / total - (1.0 - upper_mass)));
  return d;
}

// Two-sample KS distance between sorted samples.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 0.0 : 1.0;
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace reservoir
