#pragma once

#include <cstddef>

namespace hssalt {

/// Limiting survival function of sqrt(n) D_n: P(K > x) for the Kolmogorov
/// distribution. Uses the alternating series 2 sum (-1)^(k-1) exp(-2 k^2 x^2)
/// for x >= 1 and the Jacobi theta form for smaller x.
double kolmogorov_sf(double x);

/// P(D_n >= d) for the one-sample two-sided statistic with a fully specified
/// continuous CDF, by the Marsaglia-Tsang-Wang matrix method. Falls back to
/// the limiting series once the tail is below about 1e-16.
double ks_exact_sf(double d, std::size_t n);

}  // namespace hssalt
