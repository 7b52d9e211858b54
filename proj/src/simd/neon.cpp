// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// NEON kernels for AArch64, where Advanced SIMD is part of the base ISA.

#include "llp/simd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace llp::simd::neon {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void pb_fold(double* dist, std::size_t len, double p) {
    const double q = 1.0 - p;
    const float64x2_t vp = vdupq_n_f64(p);
    const float64x2_t vq = vdupq_n_f64(q);
    std::size_t hi = len;
    while (hi >= 3) {
        double* cur = dist + hi - 2;
        float64x2_t c = vld1q_f64(cur);
        float64x2_t prev = vld1q_f64(cur - 1);
        vst1q_f64(cur, vaddq_f64(vmulq_f64(c, vq), vmulq_f64(prev, vp)));
        hi -= 2;
    }
    for (std::size_t k = hi; k-- > 1;) dist[k] = dist[k] * q + dist[k - 1] * p;
    if (len > 0) dist[0] = dist[0] * q;
}

void adam_update(double* params, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
    const float64x2_t b1 = vdupq_n_f64(c.beta1);
    const float64x2_t b2 = vdupq_n_f64(c.beta2);
    const float64x2_t ob1 = vdupq_n_f64(c.one_minus_beta1);
    const float64x2_t ob2 = vdupq_n_f64(c.one_minus_beta2);
    const float64x2_t c1 = vdupq_n_f64(c.correction1);
    const float64x2_t c2 = vdupq_n_f64(c.correction2);
    const float64x2_t lr = vdupq_n_f64(c.learning_rate);
    const float64x2_t eps = vdupq_n_f64(c.epsilon);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t g = vld1q_f64(grad + i);
        float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(ob1, g));
        float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(ob2, vmulq_f64(g, g)));
        vst1q_f64(m + i, mi);
        vst1q_f64(v + i, vi);
        float64x2_t step = vdivq_f64(vmulq_f64(lr, vdivq_f64(mi, c1)), vaddq_f64(vsqrtq_f64(vdivq_f64(vi, c2)), eps));
        vst1q_f64(params + i, vsubq_f64(vld1q_f64(params + i), step));
    }
    if (i < n) scalar::table.adam_update(params + i, grad + i, m + i, v + i, n - i, c);
}

} // namespace

extern const KernelTable table;
const KernelTable table{Isa::neon, dot, axpy, pb_fold, adam_update};

} // namespace llp::simd::neon

#endif
