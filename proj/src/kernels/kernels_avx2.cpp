#include "grsm/kernels.hpp"

#if defined(GRSM_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cassert>
#include <limits>

// Compiled without -mavx2: every entry point carries a target attribute so
// inline library code instantiated here never leaks AVX2 into scalar paths.
#define GRSM_AVX2 __attribute__((target("avx2,fma")))

namespace grsm::kernels::avx2 {
namespace {

GRSM_AVX2 inline __m256d load2(const cd* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}

GRSM_AVX2 inline void store2(cd* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

// [a0 a1] * [b0 b1] for two interleaved complex values per register.
GRSM_AVX2 inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

}  // namespace

GRSM_AVX2 void complex_multiply(std::span<const cd> a, std::span<const cd> b,
                                std::span<cd> out) {
  assert(a.size() == b.size() && out.size() == a.size());
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    store2(&out[i], cmul(load2(&a[i]), load2(&b[i])));
  }
  if (i < n) {
    const __m128d av = _mm_loadu_pd(reinterpret_cast<const double*>(&a[i]));
    const __m128d bv = _mm_loadu_pd(reinterpret_cast<const double*>(&b[i]));
    const __m128d b_re = _mm_movedup_pd(bv);
    const __m128d b_im = _mm_permute_pd(bv, 0x3);
    const __m128d a_swap = _mm_permute_pd(av, 0x1);
    const __m128d r = _mm_fmaddsub_pd(av, b_re, _mm_mul_pd(a_swap, b_im));
    _mm_storeu_pd(reinterpret_cast<double*>(&out[i]), r);
  }
}

GRSM_AVX2 cd complex_dot(std::span<const cd> a, std::span<const cd> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, cmul(load2(&a[i]), load2(&b[i])));
    acc1 = _mm256_add_pd(acc1, cmul(load2(&a[i + 2]), load2(&b[i + 2])));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = _mm256_add_pd(acc0, cmul(load2(&a[i]), load2(&b[i])));
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d sum = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  if (i < n) {
    const __m128d av = _mm_loadu_pd(reinterpret_cast<const double*>(&a[i]));
    const __m128d bv = _mm_loadu_pd(reinterpret_cast<const double*>(&b[i]));
    const __m128d b_re = _mm_movedup_pd(bv);
    const __m128d b_im = _mm_permute_pd(bv, 0x3);
    const __m128d a_swap = _mm_permute_pd(av, 0x1);
    sum = _mm_add_pd(sum, _mm_fmaddsub_pd(av, b_re, _mm_mul_pd(a_swap, b_im)));
  }
  alignas(16) std::array<double, 2> r{};
  _mm_store_pd(r.data(), sum);
  return {r[0], r[1]};
}

GRSM_AVX2 void scaled_energy(std::span<const cd> y, double scale, std::span<double> out) {
  assert(out.size() == y.size());
  const std::size_t n = y.size();
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = load2(&y[i]);
    const __m256d v1 = load2(&y[i + 2]);
    // hadd interleaves the 128-bit halves: [e0 e2 e1 e3]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    const __m256d e = _mm256_permute4x64_pd(h, 0b11011000);
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(s, e));
  }
  for (; i < n; ++i) {
    const __m128d v = _mm_loadu_pd(reinterpret_cast<const double*>(&y[i]));
    const __m128d sq = _mm_mul_pd(v, v);
    const __m128d e = _mm_hadd_pd(sq, sq);
    out[i] = scale * _mm_cvtsd_f64(e);
  }
}

GRSM_AVX2 std::size_t nearest_point(cd y, std::span<const cd> points) {
  assert(!points.empty());
  const std::size_t n = points.size();
  const __m256d yv = _mm256_setr_pd(y.real(), y.imag(), y.real(), y.imag());
  constexpr std::size_t kChunk = 64;
  alignas(32) std::array<double, kChunk> dist{};
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t base = 0; base < n; base += kChunk) {
    const std::size_t len = std::min(kChunk, n - base);
    std::size_t j = 0;
    for (; j + 4 <= len; j += 4) {
      const __m256d d0 = _mm256_sub_pd(yv, load2(&points[base + j]));
      const __m256d d1 = _mm256_sub_pd(yv, load2(&points[base + j + 2]));
      const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
      _mm256_store_pd(&dist[j], _mm256_permute4x64_pd(h, 0b11011000));
    }
    for (; j < len; ++j) {
      const __m128d d = _mm_sub_pd(_mm256_castpd256_pd128(yv),
                                   _mm_loadu_pd(reinterpret_cast<const double*>(&points[base + j])));
      const __m128d sq = _mm_mul_pd(d, d);
      dist[j] = _mm_cvtsd_f64(_mm_hadd_pd(sq, sq));
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (dist[k] < best_d) {
        best_d = dist[k];
        best = base + k;
      }
    }
  }
  return best;
}

}  // namespace grsm::kernels::avx2

#endif
