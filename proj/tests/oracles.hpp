// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Reference computations used only by the tests. None of these call into the
// library paths they are used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "llp/classifier.hpp"

namespace llp::oracle {

inline double binomial_coefficient(unsigned n, unsigned k) {
    // product form in long double; exact for the sizes used in tests
    long double c = 1.0L;
    for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return static_cast<double>(std::round(c));
}

inline double binomial_pmf(unsigned n, unsigned k, double p) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                           k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(log_pmf);
}

// P(count = y) by walking all 2^n bit masks.
inline double count_probability(std::span<const double> p, unsigned y) {
    const unsigned n = static_cast<unsigned>(p.size());
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) != y) continue;
        double w = 1.0;
        for (unsigned i = 0; i < n; ++i) w *= (mask >> i) & 1u ? p[i] : 1.0 - p[i];
        total += w;
    }
    return total;
}

// P(h_i = 1 | count = y) by walking all 2^n bit masks.
inline std::vector<double> posterior_marginals(std::span<const double> p, unsigned y) {
    const unsigned n = static_cast<unsigned>(p.size());
    std::vector<double> phi(n, 0.0);
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) != y) continue;
        double w = 1.0;
        for (unsigned i = 0; i < n; ++i) w *= (mask >> i) & 1u ? p[i] : 1.0 - p[i];
        total += w;
        for (unsigned i = 0; i < n; ++i) {
            if ((mask >> i) & 1u) phi[i] += w;
        }
    }
    for (auto& v : phi) v /= total;
    return phi;
}

// Central finite differences of `loss` with respect to theta.
inline std::vector<double> numeric_gradient(const ClassifierParams& params,
                                            const std::function<double(const ClassifierParams&)>& loss,
                                            double step = 1e-4) {
    std::vector<double> grad(params.theta.size());
    ClassifierParams probe = params;
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const double orig = probe.theta[k];
        probe.theta[k] = orig + step;
        const double up = loss(probe);
        probe.theta[k] = orig - step;
        const double down = loss(probe);
        probe.theta[k] = orig;
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

// Smallest |pre-activation| of any hidden unit over the rows of `x`,
// recomputed from the flat parameter layout. Finite differences are only
// meaningful when this is well above the step size times the input scale.
inline double relu_margin(const ClassifierParams& params, const Matrix& x) {
    const auto& w = params.architecture.widths;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<double> a(x.row(r).begin(), x.row(r).end());
        std::size_t offset = 0;
        for (std::size_t l = 0; l + 2 < w.size(); ++l) {
            const std::size_t in = w[l], out = w[l + 1];
            std::vector<double> next(out);
            for (std::size_t o = 0; o < out; ++o) {
                double z = params.theta[offset + out * in + o];
                for (std::size_t i = 0; i < in; ++i) z += params.theta[offset + o * in + i] * a[i];
                margin = std::min(margin, std::abs(z));
                next[o] = z > 0.0 ? z : 0.0;
            }
            offset += out * in + out;
            a = std::move(next);
        }
    }
    return margin;
}

// max_k |a_k - b_k| / max(|a|_inf, |b|_inf, floor): error relative to the
// gradient's scale, so that near-zero components do not dominate.
inline double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-8) {
    double scale = floor, worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) scale = std::max({scale, std::abs(a[k]), std::abs(b[k])});
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst / scale;
}

inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t n, double lo = 0.01,
                                                double hi = 0.99) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> p(n);
    for (auto& v : p) v = dist(rng);
    return p;
}

} // namespace llp::oracle
