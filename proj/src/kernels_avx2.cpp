#include "offload/kernels.hpp"

#ifdef OFFLOAD_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#define OFFLOAD_AVX2 __attribute__((target("avx2,fma")))

namespace offload::simd::avx2 {

namespace {

OFFLOAD_AVX2 inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lanes = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lanes);
}

OFFLOAD_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 2^n for integral n in [-1022, 1023], built from the exponent bits.
OFFLOAD_AVX2 inline __m256d pow2i(__m256d n) {
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(n32), _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_castsi256_pd(bits);
}

// exp(x) by range reduction x = n ln2 + r, |r| <= ln2/2, and a degree-13 Taylor polynomial.
// 2^n is applied in two halves so results down to the subnormal range stay correct.
OFFLOAD_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-745.2);
  const __m256d hi_limit = _mm256_set1_pd(709.78);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi_limit), lo_limit);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr double inv_fact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,       1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,               1.0};
  __m256d p = _mm256_set1_pd(inv_fact[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[i]));

  const __m256d half = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2i(half)), pow2i(_mm256_sub_pd(n, half)));
  result = _mm256_andnot_pd(underflow, result);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), overflow);
  return result;
}

}  // namespace

OFFLOAD_AVX2 void power_moments(std::span<const double> weights, std::span<const double> ratios,
                                std::span<double> out) {
  if (weights.size() != ratios.size()) throw std::invalid_argument("power_moments: size mismatch");
  const std::size_t n_out = out.size();
  std::vector<double> acc(4 * n_out, 0.0);
  const std::size_t n = weights.size();
  for (std::size_t k = 0; k < n; k += 4) {
    const std::size_t remaining = n - k;
    __m256d term, y;
    if (remaining >= 4) {
      term = _mm256_loadu_pd(weights.data() + k);
      y = _mm256_loadu_pd(ratios.data() + k);
    } else {
      const __m256i mask = tail_mask(remaining);
      term = _mm256_maskload_pd(weights.data() + k, mask);
      y = _mm256_maskload_pd(ratios.data() + k, mask);
    }
    double* a = acc.data();
    for (std::size_t m = 0; m < n_out; ++m, a += 4) {
      _mm256_storeu_pd(a, _mm256_add_pd(_mm256_loadu_pd(a), term));
      term = _mm256_mul_pd(term, y);
    }
  }
  for (std::size_t m = 0; m < n_out; ++m) out[m] = hsum(_mm256_loadu_pd(acc.data() + 4 * m));
}

OFFLOAD_AVX2 double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t) {
  if (coef.size() != rate.size()) throw std::invalid_argument("exp_weighted_sum: size mismatch");
  const __m256d neg_t = _mm256_set1_pd(-t);
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n = coef.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_loadu_pd(rate.data() + k), neg_t));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(coef.data() + k), e, acc);
  }
  if (k < n) {
    const __m256i mask = tail_mask(n - k);
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_maskload_pd(rate.data() + k, mask), neg_t));
    acc = _mm256_fmadd_pd(_mm256_maskload_pd(coef.data() + k, mask), e, acc);
  }
  return hsum(acc);
}

OFFLOAD_AVX2 void exp_batch(std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size()) throw std::invalid_argument("exp_batch: size mismatch");
  const std::size_t n = x.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(out.data() + k, exp_pd(_mm256_loadu_pd(x.data() + k)));
  if (k < n) {
    const __m256i mask = tail_mask(n - k);
    _mm256_maskstore_pd(out.data() + k, mask, exp_pd(_mm256_maskload_pd(x.data() + k, mask)));
  }
}

}  // namespace offload::simd::avx2

#endif  // OFFLOAD_HAVE_AVX2_KERNELS
