#include <cmath>
#include <cstddef>

#include "hssalt/kernels.hpp"

namespace hssalt::kernels::scalar {

void exp_affine(std::span<const double> x, double a, double b, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(a * x[i] + b);
}

ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a) {
  ExpMoments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = w[i] * std::exp(a * x[i]);
    m.sum += e;
    m.sum_times_x += e * x[i];
  }
  return m;
}

}  // namespace hssalt::kernels::scalar
