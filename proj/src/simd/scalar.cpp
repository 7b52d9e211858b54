// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels. Every vectorized variant is tested against these.

#include <cmath>

#include "llp/simd/kernels.hpp"

namespace llp::simd::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void pb_fold(double* dist, std::size_t len, double p) {
    const double q = 1.0 - p;
    for (std::size_t k = len; k-- > 1;) dist[k] = dist[k] * q + dist[k - 1] * p;
    dist[0] = dist[0] * q;
}

void adam_update(double* params, const double* grad, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = c.beta1 * m[i] + c.one_minus_beta1 * g;
        v[i] = c.beta2 * v[i] + c.one_minus_beta2 * (g * g);
        const double m_hat = m[i] / c.correction1;
        const double v_hat = v[i] / c.correction2;
        params[i] = params[i] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

} // namespace

const KernelTable table{Isa::scalar, dot, axpy, pb_fold, adam_update};

} // namespace llp::simd::scalar
