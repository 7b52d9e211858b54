// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Training objectives. Each returns a loss value and dLoss/df(x_i) for every
// instance it touched; classifier backward() turns those into parameter
// gradients.
//
//   mle         exact bag likelihood maximized by EM; the M-step is a
//               cross-entropy against posterior soft targets phi
//   amle        normal approximation of the count distribution
//   dllp        cross-entropy between true and mean predicted proportion
//   supervised  cross-entropy against instance labels
//
// The weakly supervised objectives only ever see Bag, which has no label
// field.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "llp/classifier.hpp"
#include "llp/data.hpp"
#include "llp/poisson_binomial.hpp"

namespace llp {

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> output_grads;
};

inline constexpr double kVarianceFloor = 1e-4;

struct BagMoments {
    double mu = 0.0;
    double sigma2 = 0.0;
    // true when sigma2 was raised to kVarianceFloor
    bool floored = false;
};

BagMoments bag_moments(const ProbabilityVector& p);

// Output-space losses: functions of the classifier outputs only.
LossAndGrad cross_entropy(std::span<const double> outputs, std::span<const double> targets);
LossAndGrad amle_bag_loss(std::span<const double> outputs, int positive_count);
LossAndGrad dllp_bag_loss(std::span<const double> outputs, int positive_count);

// Parameter-space entry points.
LossAndGrad m_step_loss(const ClassifierParams& params, const Matrix& instances, std::span<const double> phi);
LossAndGrad amle_loss(const ClassifierParams& params, const Bag& bag);
LossAndGrad dllp_loss(const ClassifierParams& params, const Bag& bag);
LossAndGrad supervised_loss(const ClassifierParams& params, const Matrix& instances,
                            std::span<const std::uint8_t> labels);

struct EmState {
    // One entry per bag, in dataset order.
    std::vector<InstancePosteriors> posteriors;
    // log-likelihood of the dataset at the parameters the posteriors came from
    double log_likelihood = 0.0;
    int refreshed_epoch = 0;
};

// Posterior soft targets for every bag, evaluated independently per bag.
// `threads` > 1 splits the bags across worker threads; the result does not
// depend on the thread count.
EmState e_step(const ClassifierParams& params, const BagDataset& dataset, unsigned threads = 1);

// Sum over bags of log P(count = y | X, theta).
double mle_llp_objective(const ClassifierParams& params, const BagDataset& dataset, unsigned threads = 1);

// One bag's term of the EM lower bound,
//   sum_h alpha(h) log P(h | X) - alpha(h) log alpha(h),
// over the configurations listed in `alpha`.
double em_lower_bound(const ProbabilityVector& p, const ConfigurationPosterior& alpha);

std::vector<std::uint8_t> predict(const ClassifierParams& params, const Matrix& instances,
                                  const InferenceConfig& config = {});

} // namespace llp
