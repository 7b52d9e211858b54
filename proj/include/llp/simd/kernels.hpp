// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Inner-loop arithmetic kernels with a scalar reference implementation and
// vectorized variants (AVX2+FMA on x86-64, NEON on AArch64) selected at
// runtime.
//
// Elementwise kernels (axpy, pb_fold, adam_update) perform the same IEEE
// operations in the same order in every variant and are bit-identical to the
// scalar reference. dot() reassociates its sum and agrees with the reference
// to within rounding; each variant is itself deterministic.
//
// The selection can be forced with the LLP_SIMD environment variable
// (`scalar`, `avx2`, `neon`) or with select().

#pragma once

#include <cstddef>
#include <string_view>

namespace llp::simd {

enum class Isa { scalar, avx2, neon };

struct AdamCoefficients {
    double beta1;
    double beta2;
    double one_minus_beta1;
    double one_minus_beta2;
    // Bias corrections 1 - beta^t for the current step.
    double correction1;
    double correction2;
    double learning_rate;
    double epsilon;
};

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Folds one Bernoulli(p) into a truncated count distribution in place:
    // dist[k] <- dist[k] * (1 - p) + dist[k - 1] * p.
    void (*pb_fold)(double* dist, std::size_t len, double p);
    // One bias-corrected adaptive-moment update over n parameters.
    void (*adam_update)(double* params, const double* grad, double* m, double* v, std::size_t n,
                        const AdamCoefficients& c);
};

// Kernel set in use; chosen on first call.
const KernelTable& active();

// Returns nullptr when the variant is not compiled in or not supported by
// the running CPU.
const KernelTable* table_for(Isa isa);

// Switches the active set. Throws UsageError if the variant is unavailable.
void select(Isa isa);

std::string_view name(Isa isa);
Isa parse_isa(std::string_view text);

namespace scalar {
extern const KernelTable table;
}

} // namespace llp::simd
