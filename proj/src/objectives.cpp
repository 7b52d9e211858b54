// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "llp/objectives.hpp"

#include <cmath>
#include <string>

#include "llp/error.hpp"
#include "parallel.hpp"

namespace llp {

BagMoments bag_moments(const ProbabilityVector& p) {
    BagMoments m;
    for (double f : p.values()) {
        m.mu += f;
        m.sigma2 += f * (1.0 - f);
    }
    if (m.sigma2 < kVarianceFloor) {
        m.sigma2 = kVarianceFloor;
        m.floored = true;
    }
    return m;
}

LossAndGrad cross_entropy(std::span<const double> outputs, std::span<const double> targets) {
    if (outputs.size() != targets.size()) throw UsageError("need one target per output");
    LossAndGrad out{0.0, std::vector<double>(outputs.size())};
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double f = clamp_probability(outputs[i]);
        const double t = targets[i];
        out.loss -= t * std::log(f) + (1.0 - t) * std::log(1.0 - f);
        out.output_grads[i] = (f - t) / (f * (1.0 - f));
    }
    return out;
}

LossAndGrad amle_bag_loss(std::span<const double> outputs, int positive_count) {
    ProbabilityVector p(outputs);
    const auto moments = bag_moments(p);
    const double residual = positive_count - moments.mu;
    const double s2 = moments.sigma2;
    LossAndGrad out{residual * residual / s2 + std::log(s2), std::vector<double>(p.size())};
    const double mean_path = -2.0 * residual / s2;
    const double variance_path = moments.floored ? 0.0 : -residual * residual / (s2 * s2) + 1.0 / s2;
    for (std::size_t i = 0; i < p.size(); ++i) out.output_grads[i] = mean_path + variance_path * (1.0 - 2.0 * p[i]);
    return out;
}

LossAndGrad dllp_bag_loss(std::span<const double> outputs, int positive_count) {
    if (outputs.empty()) throw UsageError("bag must contain at least one instance");
    ProbabilityVector p(outputs);
    const double n = static_cast<double>(p.size());
    const double target = positive_count / n;
    double mu = 0.0;
    for (double f : p.values()) mu += f;
    const double predicted = clamp_probability(mu / n);
    LossAndGrad out;
    out.loss = -(target * std::log(predicted) + (1.0 - target) * std::log(1.0 - predicted));
    out.output_grads.assign(p.size(), (predicted - target) / (predicted * (1.0 - predicted) * n));
    return out;
}

LossAndGrad m_step_loss(const ClassifierParams& params, const Matrix& instances, std::span<const double> phi) {
    return cross_entropy(forward(params, instances), phi);
}

LossAndGrad amle_loss(const ClassifierParams& params, const Bag& bag) {
    return amle_bag_loss(forward(params, bag.features), bag.positive_count);
}

LossAndGrad dllp_loss(const ClassifierParams& params, const Bag& bag) {
    return dllp_bag_loss(forward(params, bag.features), bag.positive_count);
}

LossAndGrad supervised_loss(const ClassifierParams& params, const Matrix& instances,
                            std::span<const std::uint8_t> labels) {
    std::vector<double> targets(labels.begin(), labels.end());
    return m_step_loss(params, instances, targets);
}

namespace {

ProbabilityVector bag_outputs(const ClassifierParams& params, const Bag& bag, std::size_t j) {
    auto f = forward(params, bag.features);
    for (double v : f) {
        if (!std::isfinite(v)) throw NumericalError("non-finite classifier output in bag " + std::to_string(j));
    }
    return ProbabilityVector(f);
}

} // namespace

EmState e_step(const ClassifierParams& params, const BagDataset& dataset, unsigned threads) {
    EmState state;
    state.posteriors.resize(dataset.size());
    std::vector<double> bag_ll(dataset.size());
    detail::parallel_for(dataset.size(), threads, [&](std::size_t j) {
        const auto& bag = dataset.bags[j];
        auto p = bag_outputs(params, bag, j);
        const auto y = static_cast<std::size_t>(bag.positive_count);
        state.posteriors[j] = instance_posteriors(p, y);
        bag_ll[j] = bag_log_likelihood(p, y);
    });
    // fixed summation order regardless of threading
    for (double v : bag_ll) state.log_likelihood += v;
    return state;
}

double mle_llp_objective(const ClassifierParams& params, const BagDataset& dataset, unsigned threads) {
    std::vector<double> bag_ll(dataset.size());
    detail::parallel_for(dataset.size(), threads, [&](std::size_t j) {
        const auto& bag = dataset.bags[j];
        bag_ll[j] = bag_log_likelihood(bag_outputs(params, bag, j), static_cast<std::size_t>(bag.positive_count));
    });
    double total = 0.0;
    for (double v : bag_ll) total += v;
    return total;
}

double em_lower_bound(const ProbabilityVector& p, const ConfigurationPosterior& alpha) {
    double bound = 0.0;
    for (const auto& [h, w] : alpha.entries) {
        if (w <= 0.0) continue;
        bound += w * std::log(configuration_probability(p, h)) - w * std::log(w);
    }
    return bound;
}

std::vector<std::uint8_t> predict(const ClassifierParams& params, const Matrix& instances,
                                  const InferenceConfig& config) {
    if (!(config.threshold > 0.0 && config.threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
    auto outputs = forward(params, instances);
    std::vector<std::uint8_t> labels(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) labels[i] = outputs[i] >= config.threshold ? 1 : 0;
    return labels;
}

} // namespace llp
