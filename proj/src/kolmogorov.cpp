#include "hssalt/kolmogorov.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "hssalt/error.hpp"

namespace hssalt {
namespace {

using Matrix = std::vector<double>;

void multiply(const Matrix& a, const Matrix& b, Matrix& out, std::size_t m) {
  out.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out[i * m + j] += aik * b[k * m + j];
    }
  }
}

// result = h^power, tracking a decimal exponent to avoid overflow.
void matrix_power(const Matrix& h, std::size_t m, std::size_t power, Matrix& result, int& exponent) {
  if (power == 1) {
    result = h;
    exponent = 0;
    return;
  }
  Matrix half;
  int half_exp = 0;
  matrix_power(h, m, power / 2, half, half_exp);
  Matrix sq;
  multiply(half, half, sq, m);
  exponent = 2 * half_exp;
  if (power % 2 == 1) {
    multiply(h, sq, result, m);
  } else {
    result = std::move(sq);
  }
  if (result[(m / 2) * m + m / 2] > 1e140) {
    for (double& v : result) v *= 1e-140;
    exponent += 140;
  }
}

}  // namespace

double kolmogorov_sf(double x) {
  if (std::isnan(x)) throw ArgumentError("Kolmogorov argument is NaN");
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // P(K <= x) = sqrt(2 pi)/x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double total = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * w);
      total += term;
      if (term < 1e-18 * total) break;
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * total;
  }
  double total = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    total += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * total));
}

double ks_exact_sf(double d, std::size_t n) {
  if (n == 0) throw ArgumentError("sample size must be positive");
  if (std::isnan(d)) throw ArgumentError("KS statistic is NaN");
  if (d <= 0.0) return 1.0;
  if (d >= 1.0) return 0.0;
  const double nd = static_cast<double>(n) * d;
  if (nd * d > 18.0) return kolmogorov_sf(std::sqrt(static_cast<double>(n)) * d);

  const std::size_t k = static_cast<std::size_t>(nd) + 1;
  const std::size_t m = 2 * k - 1;
  const double h = static_cast<double>(k) - nd;
  Matrix mat(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) mat[i * m + j] = (i + 1 >= j) ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    mat[i * m] -= std::pow(h, static_cast<double>(i + 1));
    mat[(m - 1) * m + i] -= std::pow(h, static_cast<double>(m - i));
  }
  if (2.0 * h - 1.0 > 0.0) mat[(m - 1) * m] += std::pow(2.0 * h - 1.0, static_cast<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i + 1 && j < m; ++j) {
      for (std::size_t g = 1; g <= i + 1 - j; ++g) mat[i * m + j] /= static_cast<double>(g);
    }
  }

  Matrix power;
  int exponent = 0;
  matrix_power(mat, m, n, power, exponent);
  double s = power[(k - 1) * m + (k - 1)];
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / static_cast<double>(n);
    if (s < 1e-140) {
      s *= 1e140;
      exponent -= 140;
    }
  }
  const double cdf = s * std::pow(10.0, exponent);
  return std::min(1.0, std::max(0.0, 1.0 - cdf));
}

}  // namespace hssalt
