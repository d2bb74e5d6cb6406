#pragma once

// Data-parallel inner loops of the likelihood and EM code.
//
// Every kernel has a portable scalar reference implementation and, on x86-64
// builds, an AVX2/FMA variant. The variant is chosen once at startup from the
// CPU's feature flags; HSSALT_KERNELS=scalar in the environment (or
// set_backend) forces the reference path. Variants agree with the reference to
// a few ulps per element; they are not bit-identical because the vector exp
// and the lane-wise summation order differ.

#include <span>
#include <string_view>

namespace hssalt::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend backend);

/// True when the backend was compiled in and the running CPU supports it.
bool backend_supported(Backend backend);
Backend active_backend();
/// Throws ArgumentError if the backend is not supported.
void set_backend(Backend backend);

struct ExpMoments {
  double sum = 0.0;         ///< sum_i w_i * exp(a * x_i)
  double sum_times_x = 0.0; ///< sum_i w_i * x_i * exp(a * x_i)
};

/// out[i] = exp(a * x[i] + b). out.size() must equal x.size().
void exp_affine(std::span<const double> x, double a, double b, std::span<double> out);

/// Weighted exponential moments. With x = ln t these are sum w t^a and
/// sum w t^a ln t, the two sums behind the shape-parameter score.
ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a);

namespace scalar {
void exp_affine(std::span<const double> x, double a, double b, std::span<double> out);
ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a);
}  // namespace scalar

#if defined(HSSALT_HAVE_AVX2)
namespace avx2 {
void exp_affine(std::span<const double> x, double a, double b, std::span<double> out);
ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a);
}  // namespace avx2
#endif

}  // namespace hssalt::kernels
