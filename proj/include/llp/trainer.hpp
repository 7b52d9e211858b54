// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "llp/classifier.hpp"
#include "llp/data.hpp"
#include "llp/objectives.hpp"

namespace llp {

enum class Method { mle, amle, dllp, supervised };

std::string_view method_name(Method method);
Method parse_method(std::string_view text);

inline constexpr std::size_t kDefaultInstanceBatch = 32;
inline constexpr std::size_t kDefaultBagBatch = 8;

struct TrainConfig {
    Method method = Method::mle;
    std::vector<std::size_t> hidden_widths{32, 32};
    int max_epochs = 100;
    // Instances per batch for mle and supervised, bags per batch for amle
    // and dllp. Unset means the method default.
    std::optional<std::size_t> batch_size;
    AdamConfig optimizer;
    // Stop after `patience` consecutive epochs in which the monitored
    // training objective improved by less than relative_tolerance.
    int patience = 10;
    double relative_tolerance = 1e-5;
    std::uint64_t seed = 1;
    // mle only: recompute the posterior targets every this many epochs.
    int phi_refresh_interval = 1;
    double threshold = 0.5;
    unsigned threads = 1;

    std::size_t effective_batch_size() const;
    Architecture architecture(std::size_t feature_dim) const;
    void validate() const;
};

nlohmann::json config_to_json(const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    // mean loss per instance (mle, supervised) or per bag (amle, dllp)
    double loss = 0.0;
    // dataset log-likelihood after the epoch; mle only
    std::optional<double> log_likelihood;
    std::optional<double> test_accuracy;
    // wall-clock seconds since the start of training
    double seconds = 0.0;
};

struct TrainingRecord {
    std::vector<EpochRecord> rows;
    bool early_stopped = false;

    // `epoch,loss,log_likelihood,test_accuracy,seconds`
    std::string to_csv(bool include_seconds = true) const;
};

struct TrainResult {
    ClassifierParams params;
    OptimizerState optimizer;
    TrainingRecord record;
};

// `test`, when given, is evaluated after every epoch for the test_accuracy
// column. It never influences training or stopping.
TrainResult train(const BagDataset& dataset, const TrainConfig& config, const InstanceSet* test = nullptr);

struct Metrics {
    double accuracy = 0.0;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;

    std::size_t count() const { return true_positive + false_positive + true_negative + false_negative; }
};

Metrics evaluate(const ClassifierParams& params, const InstanceSet& instances, const InferenceConfig& config = {});
nlohmann::json metrics_to_json(const Metrics& metrics);

struct FoldResult {
    int fold = 0;
    Metrics metrics;
    TrainingRecord record;
};

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    // sample standard deviation over folds
    double std_accuracy = 0.0;
};

// Trains one model per fold on the remaining folds and tests it on the
// held-out fold's instances. Uses the dataset's fold assignment when present,
// otherwise assigns k folds with the config seed. Every fold trains with the
// config seed.
CrossValidationResult cross_validate(const BagDataset& dataset, const TrainConfig& config, int k);
nlohmann::json cross_validation_to_json(const CrossValidationResult& result, const TrainConfig& config);

struct SweepRow {
    std::size_t bag_size = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> fold_accuracies;
};

// Rebags `instances` into bags of exactly each size and cross-validates.
// mle is refused for sizes above `mle_capacity`.
std::vector<SweepRow> bag_size_sweep(const InstanceSet& instances, std::span<const std::size_t> sizes,
                                     const TrainConfig& config, int k, std::size_t mle_capacity = 128);

// Full-batch EM with plain gradient-descent M-steps: each cycle runs an
// E-step and then `inner_steps` gradient steps of size `learning_rate` on the
// mean per-instance cross-entropy against the posterior targets. `on_e_step`
// is called after every E-step. Returns the log-likelihood before the first
// cycle and after each cycle.
struct FullBatchEmConfig {
    int cycles = 30;
    int inner_steps = 200;
    double learning_rate = 1e-3;
};

std::vector<double> full_batch_em(ClassifierParams& params, const BagDataset& dataset, const FullBatchEmConfig& config,
                                  const std::function<void(int cycle, const EmState&)>& on_e_step = {});

} // namespace llp
