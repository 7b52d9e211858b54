// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint layout (JSON, version 1):
//
//   {
//     "format": "llp-checkpoint",
//     "version": 1,
//     "architecture": {"widths": [d, h1, ..., 1],
//                      "hidden_activation": "relu",
//                      "output_activation": "sigmoid"},
//     "theta": [...],
//     "optimizer": {"kind": "adam", "learning_rate": .., "beta1": ..,
//                   "beta2": .., "epsilon": .., "step": ..,
//                   "first_moment": [...], "second_moment": [...]}
//   }
//
// Doubles are written with the shortest digits that parse back to the same
// bits, so save -> load is exact.

#include "json.hpp"

#include "llp/classifier.hpp"
#include "llp/error.hpp"
#include "text_io.hpp"

namespace llp {

namespace {

constexpr const char* kFormat = "llp-checkpoint";
constexpr int kVersion = 1;

} // namespace

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
    const auto& opt = checkpoint.optimizer;
    nlohmann::json doc = {
        {"format", kFormat},
        {"version", kVersion},
        {"architecture",
         {{"widths", checkpoint.params.architecture.widths},
          {"hidden_activation", "relu"},
          {"output_activation", "sigmoid"}}},
        {"theta", checkpoint.params.theta},
        {"optimizer",
         {{"kind", "adam"},
          {"learning_rate", opt.config.learning_rate},
          {"beta1", opt.config.beta1},
          {"beta2", opt.config.beta2},
          {"epsilon", opt.config.epsilon},
          {"step", opt.step},
          {"first_moment", opt.first_moment},
          {"second_moment", opt.second_moment}}},
    };
    return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
    Checkpoint out;
    try {
        auto doc = nlohmann::json::parse(text);
        if (doc.at("format").get<std::string>() != kFormat) throw FormatError("not an llp checkpoint");
        if (doc.at("version").get<int>() != kVersion) {
            throw FormatError("unsupported checkpoint version " + doc.at("version").dump());
        }
        const auto& arch = doc.at("architecture");
        if (arch.at("hidden_activation") != "relu" || arch.at("output_activation") != "sigmoid") {
            throw FormatError("checkpoint uses unsupported activations");
        }
        out.params.architecture.widths = arch.at("widths").get<std::vector<std::size_t>>();
        out.params.theta = doc.at("theta").get<std::vector<double>>();
        const auto& opt = doc.at("optimizer");
        out.optimizer.config.learning_rate = opt.at("learning_rate").get<double>();
        out.optimizer.config.beta1 = opt.at("beta1").get<double>();
        out.optimizer.config.beta2 = opt.at("beta2").get<double>();
        out.optimizer.config.epsilon = opt.at("epsilon").get<double>();
        out.optimizer.step = opt.at("step").get<std::uint64_t>();
        out.optimizer.first_moment = opt.at("first_moment").get<std::vector<double>>();
        out.optimizer.second_moment = opt.at("second_moment").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
    try {
        out.params.architecture.validate();
    } catch (const UsageError& e) {
        throw FormatError(std::string("checkpoint architecture invalid: ") + e.what());
    }
    const auto count = out.params.architecture.parameter_count();
    if (out.params.theta.size() != count || out.optimizer.first_moment.size() != count ||
        out.optimizer.second_moment.size() != count) {
        throw FormatError("checkpoint parameter count does not match its architecture");
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    text::write_file(path, checkpoint_to_json(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_json(text::read_file(path));
}

} // namespace llp
