// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// The distribution of the number of positives in a bag whose instances are
// independent Bernoulli variables with individual success probabilities, and
// the posteriors over instance labels given that count.
//
// Two evaluation routes are provided: explicit enumeration of every label
// configuration consistent with the count (exponential, guarded to n <= 20)
// and an O(n * y) convolution. The enumeration route is the oracle for the
// convolution and for the leave-one-out posteriors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace llp {

// Outputs are clamped to [kProbabilityClamp, 1 - kProbabilityClamp] before any
// count-distribution computation so that every count has positive
// probability and every log is finite.
inline constexpr double kProbabilityClamp = 1e-7;

// Largest bag the enumeration route accepts.
inline constexpr std::size_t kMaxEnumerationSize = 20;

// Per-instance positive probabilities, clamped on construction.
class ProbabilityVector {
public:
    ProbabilityVector() = default;
    // Throws UsageError for entries that are non-finite or outside [0, 1].
    explicit ProbabilityVector(std::span<const double> raw);
    ProbabilityVector(std::initializer_list<double> raw)
        : ProbabilityVector(std::span<const double>(raw.begin(), raw.size())) {}

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const noexcept { return p_[i]; }
    std::span<const double> values() const noexcept { return p_; }

private:
    std::vector<double> p_;
};

double clamp_probability(double p) noexcept;

using LabelConfiguration = std::vector<std::uint8_t>;

// All length-n binary vectors with exactly y ones, in lexicographic order.
// Throws CapacityError for n > kMaxEnumerationSize.
std::vector<LabelConfiguration> enumerate_configurations(std::size_t n, std::size_t y);

// Probability of one configuration, prod p_i^h_i (1 - p_i)^(1 - h_i).
double configuration_probability(const ProbabilityVector& p, const LabelConfiguration& h);

// P(count = y) by summing over every consistent configuration.
double pb_enumerated(const ProbabilityVector& p, std::size_t y);

// P(count = y) by the truncated convolution recurrence.
double pb_dp(const ProbabilityVector& p, std::size_t y);

// Full count distribution P(count = k), k = 0..n, by the same recurrence.
std::vector<double> pb_distribution(const ProbabilityVector& p);

// Posterior weight of each consistent configuration given the count.
struct ConfigurationPosterior {
    std::vector<std::pair<LabelConfiguration, double>> entries;

    double weight_of(const LabelConfiguration& h) const;
};

ConfigurationPosterior configuration_posterior(const ProbabilityVector& p, std::size_t y);

// phi_i = P(h_i = 1 | count = y), computed with leave-one-out convolutions.
struct InstancePosteriors {
    std::vector<double> phi;
};

InstancePosteriors instance_posteriors(const ProbabilityVector& p, std::size_t y);

// Same quantity obtained by marginalizing a configuration posterior.
InstancePosteriors marginalize(const ConfigurationPosterior& posterior, std::size_t n);

// log P(count = y).
double bag_log_likelihood(const ProbabilityVector& p, std::size_t y);

} // namespace llp
