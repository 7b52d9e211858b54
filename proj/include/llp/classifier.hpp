// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Feedforward instance classifier: fully connected layers with rectifier
// hidden units and one logistic-sigmoid output, trained with analytic
// gradients and an adaptive-moment optimizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llp/matrix.hpp"

namespace llp {

// Layer widths from input to output, e.g. {2, 32, 32, 1}.
struct Architecture {
    std::vector<std::size_t> widths;

    std::size_t input_dim() const { return widths.front(); }
    std::size_t layer_count() const { return widths.size() - 1; }
    std::size_t parameter_count() const;
    // Throws UsageError unless there are >= 2 widths, none zero, output 1.
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Weights of layer l are stored as a (widths[l+1] x widths[l]) row-major block
// followed by its widths[l+1] biases; layers are laid out in order.
struct ClassifierParams {
    Architecture architecture;
    std::vector<double> theta;
};

// Zero-mean normal weights with standard deviation 1/sqrt(fan_in); zero biases.
ClassifierParams init_params(const Architecture& architecture, std::uint64_t seed);

// Intermediate values kept for back-propagation.
struct ForwardPass {
    // activations[0] is the input; activations[l] the output of layer l.
    std::vector<Matrix> activations;

    std::span<const double> outputs() const { return activations.back().values(); }
};

ForwardPass forward_pass(const ClassifierParams& params, const Matrix& batch);

// f(x) for each row of the batch.
std::vector<double> forward(const ClassifierParams& params, const Matrix& batch);

// dLoss/dtheta given dLoss/df(x_i) for each row.
std::vector<double> backward(const ClassifierParams& params, const ForwardPass& pass,
                             std::span<const double> output_grads);
std::vector<double> backward(const ClassifierParams& params, const Matrix& batch,
                             std::span<const double> output_grads);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct OptimizerState {
    AdamConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

OptimizerState make_optimizer(const ClassifierParams& params, const AdamConfig& config = {});

// Bias-corrected adaptive-moment update. Throws NumericalError on a
// non-finite gradient entry, leaving params and state untouched.
void optimizer_step(ClassifierParams& params, OptimizerState& state, std::span<const double> grad);

// Plain gradient descent, theta -= learning_rate * grad.
void gradient_step(ClassifierParams& params, std::span<const double> grad, double learning_rate);

struct InferenceConfig {
    double threshold = 0.5;
};

struct Checkpoint {
    ClassifierParams params;
    OptimizerState optimizer;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace llp
