// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <random>

#include "llp/error.hpp"
#include "llp/poisson_binomial.hpp"
#include "oracles.hpp"

using namespace llp;

TEST_CASE("enumerate_configurations lists consistent labelings in lexicographic order") {
    auto configs = enumerate_configurations(3, 2);
    REQUIRE(configs.size() == 3);
    CHECK(configs[0] == LabelConfiguration{0, 1, 1});
    CHECK(configs[1] == LabelConfiguration{1, 0, 1});
    CHECK(configs[2] == LabelConfiguration{1, 1, 0});

    auto none = enumerate_configurations(4, 0);
    REQUIRE(none.size() == 1);
    CHECK(none[0] == LabelConfiguration{0, 0, 0, 0});

    CHECK(enumerate_configurations(12, 6).size() == static_cast<std::size_t>(oracle::binomial_coefficient(12, 6)));
    CHECK(enumerate_configurations(12, 6).size() == 924);
}

TEST_CASE("enumeration refuses bags beyond its guard") {
    CHECK_THROWS_AS(enumerate_configurations(21, 3), CapacityError);
    ProbabilityVector big(std::vector<double>(21, 0.5));
    CHECK_THROWS_AS(pb_enumerated(big, 3), CapacityError);
    CHECK_THROWS_AS(configuration_posterior(big, 3), CapacityError);
    CHECK_NOTHROW(pb_dp(big, 3));
}

TEST_CASE("probability vectors clamp and reject invalid entries") {
    ProbabilityVector p{0.0, 1.0, 0.3};
    CHECK(p[0] == kProbabilityClamp);
    CHECK(p[1] == 1.0 - kProbabilityClamp);
    CHECK(p[2] == 0.3);
    CHECK_THROWS_AS(ProbabilityVector({1.5}), UsageError);
    CHECK_THROWS_AS(ProbabilityVector({std::nan("")}), UsageError);
}

TEST_CASE("count probability on small hand-checked cases") {
    CHECK(pb_enumerated({0.5, 0.5}, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pb_dp({0.5, 0.5}, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pb_enumerated({0.3}, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(pb_dp({0.3}, 0) == doctest::Approx(0.7).epsilon(1e-15));
    // 0.2*0.5*0.3 + 0.2*0.5*0.7 + 0.8*0.5*0.7
    CHECK(std::abs(pb_enumerated({0.2, 0.5, 0.7}, 2) - 0.38) < 1e-15);
    CHECK(std::abs(pb_dp({0.2, 0.5, 0.7}, 2) - 0.38) < 1e-15);
}

TEST_CASE("convolution matches the binomial pmf for a 128-instance bag") {
    ProbabilityVector p(std::vector<double>(128, 0.5));
    const double expected = oracle::binomial_coefficient(128, 64) * std::pow(0.5, 128);
    CHECK(std::abs(expected - 0.07038609217001514) < 1e-15);
    CHECK(std::abs(pb_dp(p, 64) - expected) <= 1e-12 * expected);
}

TEST_CASE("binomial reduction for constant probabilities") {
    for (unsigned n : {1u, 5u, 17u, 40u}) {
        for (double c : {0.05, 0.3, 0.5, 0.92}) {
            ProbabilityVector p(std::vector<double>(n, c));
            for (unsigned y = 0; y <= n; ++y) {
                const double expected = oracle::binomial_pmf(n, y, c);
                CHECK(std::abs(pb_dp(p, y) - expected) <= 1e-10 * expected);
            }
        }
    }
}

TEST_CASE("property: convolution equals enumeration and the distribution is normalized") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> n_dist(1, 12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = n_dist(rng);
        ProbabilityVector p(oracle::random_probabilities(rng, n, 0.0, 1.0));
        double total = 0.0;
        for (std::size_t y = 0; y <= n; ++y) {
            const double dp = pb_dp(p, y);
            CHECK(std::abs(dp - pb_enumerated(p, y)) <= 1e-12);
            CHECK(std::abs(dp - oracle::count_probability(p.values(), static_cast<unsigned>(y))) <= 1e-12);
            total += dp;
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
        auto dist = pb_distribution(p);
        for (std::size_t y = 0; y <= n; ++y) CHECK(dist[y] == doctest::Approx(pb_dp(p, y)).epsilon(1e-13));
    }
}

TEST_CASE("configuration posterior normalizes the enumerated probabilities") {
    auto sym = configuration_posterior({0.5, 0.5}, 1);
    REQUIRE(sym.entries.size() == 2);
    CHECK(sym.weight_of({1, 0}) == doctest::Approx(0.5));
    CHECK(sym.weight_of({0, 1}) == doctest::Approx(0.5));

    auto post = configuration_posterior({0.2, 0.5, 0.7}, 2);
    CHECK(std::abs(post.weight_of({1, 1, 0}) - 0.03 / 0.38) < 1e-14);
    CHECK(std::abs(post.weight_of({1, 0, 1}) - 0.07 / 0.38) < 1e-14);
    CHECK(std::abs(post.weight_of({0, 1, 1}) - 0.28 / 0.38) < 1e-14);
    CHECK(post.weight_of({1, 1, 1}) == 0.0);

    auto full = configuration_posterior({0.1, 0.4, 0.9}, 3);
    REQUIRE(full.entries.size() == 1);
    CHECK(full.entries[0].second == 1.0);
}

TEST_CASE("instance posteriors on hand-checked cases") {
    auto sym = instance_posteriors({0.5, 0.5, 0.5, 0.5}, 2);
    for (double v : sym.phi) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));

    auto phi = instance_posteriors({0.2, 0.5, 0.7}, 2).phi;
    CHECK(std::abs(phi[0] - 0.2631578947368421) < 1e-12);
    CHECK(std::abs(phi[1] - 0.8157894736842105) < 1e-12);
    CHECK(std::abs(phi[2] - 0.9210526315789473) < 1e-12);

    for (double v : instance_posteriors({0.9, 0.8, 0.99}, 0).phi) CHECK(v == 0.0);
    for (double v : instance_posteriors({0.1, 0.2}, 2).phi) CHECK(v == 1.0);
}

TEST_CASE("property: leave-one-out posteriors agree with enumeration") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> n_dist(1, 12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> y_dist(0, n);
        const auto y = y_dist(rng);
        ProbabilityVector p(oracle::random_probabilities(rng, n, 0.0, 1.0));
        auto phi = instance_posteriors(p, y).phi;
        auto via_alpha = marginalize(configuration_posterior(p, y), n).phi;
        auto via_masks = oracle::posterior_marginals(p.values(), static_cast<unsigned>(y));
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(phi[i] >= 0.0);
            CHECK(phi[i] <= 1.0);
            CHECK(std::abs(phi[i] - via_alpha[i]) <= 1e-10);
            CHECK(std::abs(phi[i] - via_masks[i]) <= 1e-10);
            sum += phi[i];
        }
        CHECK(std::abs(sum - static_cast<double>(y)) <= 1e-10);
    }
}

TEST_CASE("bag log-likelihood") {
    CHECK(bag_log_likelihood({0.5, 0.5}, 1) == doctest::Approx(-0.6931471805599453).epsilon(1e-14));
    CHECK(bag_log_likelihood({0.2, 0.5, 0.7}, 2) == doctest::Approx(-0.9675840262617056).epsilon(1e-14));
    // clamping keeps impossible counts finite
    CHECK(std::isfinite(bag_log_likelihood({0.0, 0.0, 0.0}, 3)));
}
