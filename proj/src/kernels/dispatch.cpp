#include <atomic>
#include <cstdlib>
#include <string>

#include "hssalt/error.hpp"
#include "hssalt/kernels.hpp"

namespace hssalt::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(HSSALT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("HSSALT_KERNELS"); env != nullptr && std::string(env) == "scalar") {
    return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_supported(Backend backend) {
  return backend == Backend::Scalar || cpu_has_avx2();
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_supported(backend)) {
    throw ArgumentError("kernel backend '" + std::string(to_string(backend)) + "' is not available");
  }
  current().store(backend, std::memory_order_relaxed);
}

void exp_affine(std::span<const double> x, double a, double b, std::span<double> out) {
#if defined(HSSALT_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::exp_affine(x, a, b, out);
#endif
  scalar::exp_affine(x, a, b, out);
}

ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a) {
#if defined(HSSALT_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::weighted_exp_moments(x, w, a);
#endif
  return scalar::weighted_exp_moments(x, w, a);
}

}  // namespace hssalt::kernels
