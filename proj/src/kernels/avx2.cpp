// AVX2/FMA variants of the kernels in scalar.cpp. Compiled with -mavx2 -mfma;
// only ever called after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "hssalt/kernels.hpp"

namespace hssalt::kernels::avx2 {
namespace {

// Arguments beyond this are handed to std::exp so that overflow, underflow
// and NaN behave exactly like the scalar reference.
constexpr double kExpSafeBound = 708.0;

// Cephes-style exp: x = n ln2 + r with |r| <= ln2/2, then a (2,3) Pade form
// for exp(r) and an exponent-field scale by 2^n.
inline __m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000009e0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  // 1.5 * 2^52: adding it leaves round-to-nearest integer n in the low mantissa bits.
  const __m256d shifter = _mm256_set1_pd(6755399441055744.0);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d px = _mm256_fmadd_pd(p0, rr, p1);
  px = _mm256_fmadd_pd(px, rr, p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
  qx = _mm256_fmadd_pd(qx, rr, q2);
  qx = _mm256_fmadd_pd(qx, rr, q3);
  const __m256d ratio = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  const __m256d mant = _mm256_fmadd_pd(two, ratio, one);

  __m256i k = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, shifter)),
                               _mm256_castpd_si256(shifter));
  k = _mm256_slli_epi64(_mm256_add_epi64(k, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(mant, _mm256_castsi256_pd(k));
}

inline bool all_in_safe_range(__m256d y) {
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d ay = _mm256_and_pd(y, abs_mask);
  // Ordered compare: NaN lanes report false and take the scalar path.
  const __m256d ok = _mm256_cmp_pd(ay, _mm256_set1_pd(kExpSafeBound), _CMP_LE_OQ);
  return _mm256_movemask_pd(ok) == 0xF;
}

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void exp_affine(std::span<const double> x, double a, double b, std::span<double> out) {
  const std::size_t size = x.size();
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d y = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vb);
    if (all_in_safe_range(y)) {
      _mm256_storeu_pd(out.data() + i, exp4(y));
    } else {
      for (std::size_t k = i; k < i + 4; ++k) out[k] = std::exp(a * x[k] + b);
    }
  }
  for (; i < size; ++i) out[i] = std::exp(a * x[i] + b);
}

ExpMoments weighted_exp_moments(std::span<const double> x, std::span<const double> w, double a) {
  const std::size_t size = x.size();
  const __m256d va = _mm256_set1_pd(a);
  __m256d acc = _mm256_setzero_pd();
  __m256d acc_x = _mm256_setzero_pd();
  ExpMoments tail;
  std::size_t i = 0;
  for (; i + 4 <= size; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    const __m256d y = _mm256_mul_pd(va, vx);
    if (all_in_safe_range(y)) {
      const __m256d e = _mm256_mul_pd(_mm256_loadu_pd(w.data() + i), exp4(y));
      acc = _mm256_add_pd(acc, e);
      acc_x = _mm256_fmadd_pd(e, vx, acc_x);
    } else {
      for (std::size_t k = i; k < i + 4; ++k) {
        const double e = w[k] * std::exp(a * x[k]);
        tail.sum += e;
        tail.sum_times_x += e * x[k];
      }
    }
  }
  for (; i < size; ++i) {
    const double e = w[i] * std::exp(a * x[i]);
    tail.sum += e;
    tail.sum_times_x += e * x[i];
  }
  return {horizontal_sum(acc) + tail.sum, horizontal_sum(acc_x) + tail.sum_times_x};
}

}  // namespace hssalt::kernels::avx2
