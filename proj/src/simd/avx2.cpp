// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 + FMA kernels. This file is compiled with -mavx2 -mfma and is only
// entered after a runtime CPU check.

#include "llp/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace llp::simd::avx2 {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d pair = _mm_add_pd(lo, hi);
    double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // mul then add, no fma: must round exactly like the reference
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void pb_fold(double* dist, std::size_t len, double p) {
    const double q = 1.0 - p;
    const __m256d vp = _mm256_set1_pd(p);
    const __m256d vq = _mm256_set1_pd(q);
    // Walk downward so each block still sees the unmodified entry below it.
    std::size_t hi = len;  // one past the highest index not yet updated
    while (hi >= 5) {
        double* cur = dist + hi - 4;
        __m256d c = _mm256_loadu_pd(cur);
        __m256d prev = _mm256_loadu_pd(cur - 1);
        _mm256_storeu_pd(cur, _mm256_add_pd(_mm256_mul_pd(c, vq), _mm256_mul_pd(prev, vp)));
        hi -= 4;
    }
    for (std::size_t k = hi; k-- > 1;) dist[k] = dist[k] * q + dist[k - 1] * p;
    if (len > 0) dist[0] = dist[0] * q;
}

void adam_update(double* params, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d ob1 = _mm256_set1_pd(c.one_minus_beta1);
    const __m256d ob2 = _mm256_set1_pd(c.one_minus_beta2);
    const __m256d c1 = _mm256_set1_pd(c.correction1);
    const __m256d c2 = _mm256_set1_pd(c.correction2);
    const __m256d lr = _mm256_set1_pd(c.learning_rate);
    const __m256d eps = _mm256_set1_pd(c.epsilon);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ob1, g));
        __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(ob2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        __m256d m_hat = _mm256_div_pd(mi, c1);
        __m256d v_hat = _mm256_div_pd(vi, c2);
        __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
        _mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
    }
    if (i < n) scalar::table.adam_update(params + i, grad + i, m + i, v + i, n - i, c);
}

} // namespace

extern const KernelTable table;
const KernelTable table{Isa::avx2, dot, axpy, pb_fold, adam_update};

} // namespace llp::simd::avx2

#endif
