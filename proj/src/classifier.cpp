// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "llp/classifier.hpp"

#include <cmath>
#include <random>
#include <string>

#include "llp/error.hpp"
#include "llp/simd/kernels.hpp"

namespace llp {

std::size_t Architecture::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) count += widths[l] * widths[l + 1] + widths[l + 1];
    return count;
}

void Architecture::validate() const {
    if (widths.size() < 2) throw UsageError("architecture needs an input and an output width");
    for (auto w : widths) {
        if (w == 0) throw UsageError("architecture has a zero-width layer");
    }
    if (widths.back() != 1) throw UsageError("classifier output width must be 1");
}

namespace {

struct LayerView {
    std::size_t in;
    std::size_t out;
    std::size_t weight_offset;
    std::size_t bias_offset;
};

std::vector<LayerView> layers(const Architecture& arch) {
    std::vector<LayerView> out;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        LayerView v{arch.widths[l], arch.widths[l + 1], offset, offset + arch.widths[l] * arch.widths[l + 1]};
        offset = v.bias_offset + v.out;
        out.push_back(v);
    }
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_shape(const ClassifierParams& params, const Matrix& batch) {
    if (params.theta.size() != params.architecture.parameter_count()) {
        throw UsageError("parameter vector has " + std::to_string(params.theta.size()) + " entries, architecture needs " +
                         std::to_string(params.architecture.parameter_count()));
    }
    if (batch.cols() != params.architecture.input_dim()) {
        throw UsageError("batch has " + std::to_string(batch.cols()) + " features, classifier expects " +
                         std::to_string(params.architecture.input_dim()));
    }
}

} // namespace

ClassifierParams init_params(const Architecture& architecture, std::uint64_t seed) {
    architecture.validate();
    ClassifierParams params{architecture, std::vector<double>(architecture.parameter_count(), 0.0)};
    std::mt19937_64 rng(seed);
    for (const auto& layer : layers(architecture)) {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(layer.in)));
        for (std::size_t k = 0; k < layer.in * layer.out; ++k) params.theta[layer.weight_offset + k] = dist(rng);
    }
    return params;
}

ForwardPass forward_pass(const ClassifierParams& params, const Matrix& batch) {
    check_shape(params, batch);
    const auto& kernels = simd::active();
    const auto views = layers(params.architecture);
    const double* theta = params.theta.data();

    ForwardPass pass;
    pass.activations.reserve(views.size() + 1);
    pass.activations.push_back(batch);
    for (std::size_t l = 0; l < views.size(); ++l) {
        const auto& v = views[l];
        const bool output_layer = l + 1 == views.size();
        const Matrix& in = pass.activations.back();
        Matrix out(in.rows(), v.out);
        for (std::size_t r = 0; r < in.rows(); ++r) {
            const double* x = in.row(r).data();
            for (std::size_t o = 0; o < v.out; ++o) {
                double z = kernels.dot(x, theta + v.weight_offset + o * v.in, v.in) + theta[v.bias_offset + o];
                out(r, o) = output_layer ? sigmoid(z) : std::max(z, 0.0);
            }
        }
        pass.activations.push_back(std::move(out));
    }
    return pass;
}

std::vector<double> forward(const ClassifierParams& params, const Matrix& batch) {
    auto pass = forward_pass(params, batch);
    auto out = pass.outputs();
    return {out.begin(), out.end()};
}

std::vector<double> backward(const ClassifierParams& params, const ForwardPass& pass,
                             std::span<const double> output_grads) {
    const Matrix& input = pass.activations.front();
    check_shape(params, input);
    if (output_grads.size() != input.rows()) {
        throw UsageError("got " + std::to_string(output_grads.size()) + " output gradients for a batch of " +
                         std::to_string(input.rows()));
    }
    const auto& kernels = simd::active();
    const auto views = layers(params.architecture);
    const double* theta = params.theta.data();
    std::vector<double> grad(params.theta.size(), 0.0);

    // delta holds dLoss/dz for the current layer's pre-activations.
    const Matrix& output = pass.activations.back();
    Matrix delta(input.rows(), 1);
    for (std::size_t r = 0; r < input.rows(); ++r) {
        const double f = output(r, 0);
        delta(r, 0) = output_grads[r] * f * (1.0 - f);
    }

    for (std::size_t l = views.size(); l-- > 0;) {
        const auto& v = views[l];
        const Matrix& in = pass.activations[l];
        for (std::size_t r = 0; r < in.rows(); ++r) {
            const double* x = in.row(r).data();
            for (std::size_t o = 0; o < v.out; ++o) {
                const double d = delta(r, o);
                if (d == 0.0) continue;
                kernels.axpy(d, x, grad.data() + v.weight_offset + o * v.in, v.in);
                grad[v.bias_offset + o] += d;
            }
        }
        if (l == 0) break;

        Matrix prev(in.rows(), v.in);
        for (std::size_t r = 0; r < in.rows(); ++r) {
            double* dx = prev.row(r).data();
            for (std::size_t o = 0; o < v.out; ++o) {
                const double d = delta(r, o);
                if (d != 0.0) kernels.axpy(d, theta + v.weight_offset + o * v.in, dx, v.in);
            }
            // rectifier derivative: the stored activation is positive iff z > 0
            for (std::size_t c = 0; c < v.in; ++c) {
                if (!(in(r, c) > 0.0)) dx[c] = 0.0;
            }
        }
        delta = std::move(prev);
    }
    return grad;
}

std::vector<double> backward(const ClassifierParams& params, const Matrix& batch,
                             std::span<const double> output_grads) {
    return backward(params, forward_pass(params, batch), output_grads);
}

OptimizerState make_optimizer(const ClassifierParams& params, const AdamConfig& config) {
    return {config, std::vector<double>(params.theta.size(), 0.0), std::vector<double>(params.theta.size(), 0.0), 0};
}

void optimizer_step(ClassifierParams& params, OptimizerState& state, std::span<const double> grad) {
    if (grad.size() != params.theta.size() || state.first_moment.size() != params.theta.size() ||
        state.second_moment.size() != params.theta.size()) {
        throw UsageError("optimizer state, gradient and parameters disagree in size");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw NumericalError("non-finite gradient entry " + std::to_string(i) + " at optimizer step " +
                                 std::to_string(state.step + 1));
        }
    }
    ++state.step;
    const auto& c = state.config;
    const double t = static_cast<double>(state.step);
    simd::AdamCoefficients coeffs{c.beta1,
                                  c.beta2,
                                  1.0 - c.beta1,
                                  1.0 - c.beta2,
                                  1.0 - std::pow(c.beta1, t),
                                  1.0 - std::pow(c.beta2, t),
                                  c.learning_rate,
                                  c.epsilon};
    simd::active().adam_update(params.theta.data(), grad.data(), state.first_moment.data(),
                               state.second_moment.data(), grad.size(), coeffs);
}

void gradient_step(ClassifierParams& params, std::span<const double> grad, double learning_rate) {
    if (grad.size() != params.theta.size()) throw UsageError("gradient and parameters disagree in size");
    simd::active().axpy(-learning_rate, grad.data(), params.theta.data(), grad.size());
}

} // namespace llp
