// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "llp/poisson_binomial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llp/error.hpp"
#include "llp/simd/kernels.hpp"

namespace llp {

double clamp_probability(double p) noexcept { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

ProbabilityVector::ProbabilityVector(std::span<const double> raw) {
    p_.reserve(raw.size());
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw UsageError("probability " + std::to_string(v) + " is outside [0, 1]");
        }
        p_.push_back(clamp_probability(v));
    }
}

std::vector<LabelConfiguration> enumerate_configurations(std::size_t n, std::size_t y) {
    if (n > kMaxEnumerationSize) {
        throw CapacityError("enumerating configurations of a bag of " + std::to_string(n) +
                            " instances exceeds the limit of " + std::to_string(kMaxEnumerationSize));
    }
    if (y > n) throw UsageError("positive count " + std::to_string(y) + " exceeds bag size " + std::to_string(n));
    LabelConfiguration h(n, 0);
    std::fill(h.end() - static_cast<std::ptrdiff_t>(y), h.end(), std::uint8_t{1});
    std::vector<LabelConfiguration> out;
    do {
        out.push_back(h);
    } while (std::next_permutation(h.begin(), h.end()));
    return out;
}

double configuration_probability(const ProbabilityVector& p, const LabelConfiguration& h) {
    double prob = 1.0;
    for (std::size_t i = 0; i < h.size(); ++i) prob *= h[i] ? p[i] : 1.0 - p[i];
    return prob;
}

double pb_enumerated(const ProbabilityVector& p, std::size_t y) {
    double total = 0.0;
    for (const auto& h : enumerate_configurations(p.size(), y)) total += configuration_probability(p, h);
    return total;
}

namespace {

// Truncated count distribution over counts 0..len-1, skipping entry `skip`.
std::vector<double> truncated_distribution(std::span<const double> p, std::size_t len,
                                           std::size_t skip = static_cast<std::size_t>(-1)) {
    const auto& kernels = simd::active();
    std::vector<double> dist(len, 0.0);
    dist[0] = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i != skip) kernels.pb_fold(dist.data(), len, p[i]);
    }
    return dist;
}

} // namespace

double pb_dp(const ProbabilityVector& p, std::size_t y) {
    if (y > p.size()) throw UsageError("positive count " + std::to_string(y) + " exceeds bag size " + std::to_string(p.size()));
    return truncated_distribution(p.values(), y + 1)[y];
}

std::vector<double> pb_distribution(const ProbabilityVector& p) {
    return truncated_distribution(p.values(), p.size() + 1);
}

double ConfigurationPosterior::weight_of(const LabelConfiguration& h) const {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == h; });
    return it == entries.end() ? 0.0 : it->second;
}

ConfigurationPosterior configuration_posterior(const ProbabilityVector& p, std::size_t y) {
    ConfigurationPosterior out;
    double total = 0.0;
    for (auto& h : enumerate_configurations(p.size(), y)) {
        double w = configuration_probability(p, h);
        total += w;
        out.entries.emplace_back(std::move(h), w);
    }
    for (auto& entry : out.entries) entry.second /= total;
    return out;
}

InstancePosteriors instance_posteriors(const ProbabilityVector& p, std::size_t y) {
    const std::size_t n = p.size();
    if (y > n) throw UsageError("positive count " + std::to_string(y) + " exceeds bag size " + std::to_string(n));
    if (y == 0) return {std::vector<double>(n, 0.0)};
    if (y == n) return {std::vector<double>(n, 1.0)};

    const double total = pb_dp(p, y);
    InstancePosteriors out{std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        // P(h_i = 1, count = y) = p_i * P(count of the others = y - 1)
        double others = truncated_distribution(p.values(), y, i)[y - 1];
        out.phi[i] = std::min(1.0, p[i] * others / total);
    }
    return out;
}

InstancePosteriors marginalize(const ConfigurationPosterior& posterior, std::size_t n) {
    InstancePosteriors out{std::vector<double>(n, 0.0)};
    for (const auto& [h, w] : posterior.entries) {
        for (std::size_t i = 0; i < n; ++i) {
            if (h[i]) out.phi[i] += w;
        }
    }
    return out;
}

double bag_log_likelihood(const ProbabilityVector& p, std::size_t y) { return std::log(pb_dp(p, y)); }

} // namespace llp
