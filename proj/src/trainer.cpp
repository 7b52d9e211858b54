// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "llp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "llp/error.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace llp {

std::string_view method_name(Method method) {
    switch (method) {
    case Method::mle: return "mle";
    case Method::amle: return "amle";
    case Method::dllp: return "dllp";
    case Method::supervised: return "supervised";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    for (auto m : {Method::mle, Method::amle, Method::dllp, Method::supervised}) {
        if (text == method_name(m)) return m;
    }
    throw UsageError("unknown method '" + std::string(text) + "' (expected mle, amle, dllp or supervised)");
}

std::size_t TrainConfig::effective_batch_size() const {
    if (batch_size) return *batch_size;
    return method == Method::amle || method == Method::dllp ? kDefaultBagBatch : kDefaultInstanceBatch;
}

Architecture TrainConfig::architecture(std::size_t feature_dim) const {
    Architecture arch;
    arch.widths.push_back(feature_dim);
    arch.widths.insert(arch.widths.end(), hidden_widths.begin(), hidden_widths.end());
    arch.widths.push_back(1);
    return arch;
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw UsageError("max_epochs must be at least 1");
    if (patience < 1) throw UsageError("patience must be at least 1");
    if (effective_batch_size() < 1) throw UsageError("batch size must be at least 1");
    if (phi_refresh_interval < 1) throw UsageError("phi refresh interval must be at least 1");
    if (!(relative_tolerance >= 0.0)) throw UsageError("relative tolerance must be non-negative");
    if (!(optimizer.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
    if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
    for (auto w : hidden_widths) {
        if (w == 0) throw UsageError("hidden layer width must be positive");
    }
}

nlohmann::json config_to_json(const TrainConfig& config) {
    return {
        {"method", method_name(config.method)},
        {"hidden_widths", config.hidden_widths},
        {"max_epochs", config.max_epochs},
        {"batch_size", config.effective_batch_size()},
        {"batch_unit", config.method == Method::amle || config.method == Method::dllp ? "bags" : "instances"},
        {"learning_rate", config.optimizer.learning_rate},
        {"beta1", config.optimizer.beta1},
        {"beta2", config.optimizer.beta2},
        {"epsilon", config.optimizer.epsilon},
        {"patience", config.patience},
        {"relative_tolerance", config.relative_tolerance},
        {"seed", config.seed},
        {"phi_refresh_interval", config.phi_refresh_interval},
        {"threshold", config.threshold},
        {"threads", config.threads},
    };
}

std::string TrainingRecord::to_csv(bool include_seconds) const {
    std::string out = "epoch,loss,log_likelihood,test_accuracy,seconds\n";
    for (const auto& row : rows) {
        out += std::to_string(row.epoch);
        out += ',';
        text::append_double(out, row.loss);
        out += ',';
        if (row.log_likelihood) text::append_double(out, *row.log_likelihood);
        out += ',';
        if (row.test_accuracy) text::append_double(out, *row.test_accuracy);
        out += ',';
        if (include_seconds) text::append_double(out, row.seconds);
        out += '\n';
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// All instances of a dataset in bag order, with the owning bag of each row.
struct FlatInstances {
    Matrix features;
    std::vector<std::size_t> bag_of_row;
};

FlatInstances flatten(const BagDataset& dataset) {
    FlatInstances flat{Matrix(dataset.instance_count(), dataset.feature_dim), {}};
    flat.bag_of_row.reserve(flat.features.rows());
    std::size_t r = 0;
    for (std::size_t j = 0; j < dataset.size(); ++j) {
        const auto& bag = dataset.bags[j];
        for (std::size_t i = 0; i < bag.size(); ++i, ++r) {
            auto src = bag.features.row(i);
            std::copy(src.begin(), src.end(), flat.features.row(r).begin());
            flat.bag_of_row.push_back(j);
        }
    }
    return flat;
}

[[noreturn]] void fail_non_finite(int epoch, std::size_t batch, std::vector<std::size_t> bag_ids) {
    std::sort(bag_ids.begin(), bag_ids.end());
    bag_ids.erase(std::unique(bag_ids.begin(), bag_ids.end()), bag_ids.end());
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << epoch << ", batch " << batch << ", bags [";
    for (std::size_t i = 0; i < bag_ids.size(); ++i) msg << (i ? " " : "") << bag_ids[i];
    msg << "]";
    throw NumericalError(msg.str());
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void scale(std::vector<double>& values, double factor) {
    for (auto& v : values) v *= factor;
}

// Stochastic gradient updates on rows of `features` against per-row targets.
// Returns the mean per-row loss over the epoch.
double instance_epoch(ClassifierParams& params, OptimizerState& optimizer, const FlatInstances& flat,
                      std::span<const double> targets, std::size_t batch_size, std::mt19937_64& rng, int epoch) {
    std::vector<std::size_t> order(flat.features.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    double total = 0.0;
    std::vector<double> batch_targets;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
        std::span<const std::size_t> rows(order.data() + start, std::min(batch_size, order.size() - start));
        Matrix x = flat.features.gather(rows);
        batch_targets.clear();
        for (auto r : rows) batch_targets.push_back(targets[r]);

        auto pass = forward_pass(params, x);
        auto fail = [&] {
            std::vector<std::size_t> bags;
            for (auto r : rows) bags.push_back(flat.bag_of_row[r]);
            fail_non_finite(epoch, b, std::move(bags));
        };
        if (!all_finite(pass.outputs())) fail();
        auto lg = cross_entropy(pass.outputs(), batch_targets);
        if (!std::isfinite(lg.loss)) fail();
        total += lg.loss;
        scale(lg.output_grads, 1.0 / static_cast<double>(rows.size()));
        optimizer_step(params, optimizer, backward(params, pass, lg.output_grads));
    }
    return total / static_cast<double>(order.size());
}

// Bag-level updates for the proportion objectives. Returns the mean per-bag
// loss over the epoch.
double bag_epoch(Method method, ClassifierParams& params, OptimizerState& optimizer, const BagDataset& dataset,
                 std::size_t batch_size, std::mt19937_64& rng, int epoch) {
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    double total = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch_size, ++b) {
        std::span<const std::size_t> bags(order.data() + start, std::min(batch_size, order.size() - start));
        Matrix x(0, dataset.feature_dim);
        for (auto j : bags) {
            for (std::size_t i = 0; i < dataset.bags[j].size(); ++i) x.append_row(dataset.bags[j].features.row(i));
        }
        auto pass = forward_pass(params, x);
        auto outputs = pass.outputs();
        if (!all_finite(outputs)) fail_non_finite(epoch, b, {bags.begin(), bags.end()});
        std::vector<double> grads(x.rows());
        double batch_loss = 0.0;
        std::size_t offset = 0;
        for (auto j : bags) {
            const auto& bag = dataset.bags[j];
            auto slice = outputs.subspan(offset, bag.size());
            auto lg = method == Method::amle ? amle_bag_loss(slice, bag.positive_count)
                                             : dllp_bag_loss(slice, bag.positive_count);
            batch_loss += lg.loss;
            std::copy(lg.output_grads.begin(), lg.output_grads.end(), grads.begin() + static_cast<std::ptrdiff_t>(offset));
            offset += bag.size();
        }
        if (!std::isfinite(batch_loss)) fail_non_finite(epoch, b, {bags.begin(), bags.end()});
        total += batch_loss;
        scale(grads, 1.0 / static_cast<double>(bags.size()));
        optimizer_step(params, optimizer, backward(params, pass, grads));
    }
    return total / static_cast<double>(order.size());
}

std::vector<double> flatten_phi(const EmState& state) {
    std::vector<double> phi;
    for (const auto& post : state.posteriors) phi.insert(phi.end(), post.phi.begin(), post.phi.end());
    return phi;
}

} // namespace

TrainResult train(const BagDataset& dataset, const TrainConfig& config, const InstanceSet* test) {
    config.validate();
    dataset.validate();
    if (config.method == Method::supervised && !dataset.truth.present()) {
        throw UsageError("supervised training needs instance labels, but the bag data has none");
    }
    if (test && !test->labeled()) throw UsageError("test instances must be labeled");

    const auto start = Clock::now();
    TrainResult result;
    result.params = init_params(config.architecture(dataset.feature_dim), config.seed);
    result.optimizer = make_optimizer(result.params, config.optimizer);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    const std::size_t batch = config.effective_batch_size();

    FlatInstances flat;
    std::vector<double> targets;
    EmState em;
    if (config.method == Method::mle || config.method == Method::supervised) flat = flatten(dataset);
    if (config.method == Method::supervised) {
        for (std::size_t j = 0; j < dataset.size(); ++j) {
            auto labels = dataset.truth.labels(j);
            targets.insert(targets.end(), labels.begin(), labels.end());
        }
    }
    if (config.method == Method::mle) {
        em = e_step(result.params, dataset, config.threads);
        targets = flatten_phi(em);
    }

    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        EpochRecord row;
        row.epoch = epoch;
        double monitored = 0.0;
        switch (config.method) {
        case Method::mle: {
            if (epoch > 1 && (epoch - 1) % config.phi_refresh_interval == 0) {
                targets = flatten_phi(em);
                em.refreshed_epoch = epoch;
            }
            row.loss = instance_epoch(result.params, result.optimizer, flat, targets, batch, rng, epoch);
            // Posteriors at the end of this epoch; they become next epoch's
            // targets when a refresh is due.
            auto refreshed_at = em.refreshed_epoch;
            em = e_step(result.params, dataset, config.threads);
            em.refreshed_epoch = refreshed_at;
            row.log_likelihood = em.log_likelihood;
            monitored = -em.log_likelihood / static_cast<double>(dataset.size());
            break;
        }
        case Method::supervised:
            row.loss = instance_epoch(result.params, result.optimizer, flat, targets, batch, rng, epoch);
            monitored = row.loss;
            break;
        case Method::amle:
        case Method::dllp:
            row.loss = bag_epoch(config.method, result.params, result.optimizer, dataset, batch, rng, epoch);
            monitored = row.loss;
            break;
        }
        if (!std::isfinite(monitored)) fail_non_finite(epoch, 0, {});
        if (test) row.test_accuracy = evaluate(result.params, *test, {config.threshold}).accuracy;
        row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        result.record.rows.push_back(row);

        if (best - monitored > config.relative_tolerance * std::max(std::abs(best), 1e-12) || epoch == 1) {
            best = std::min(best, monitored);
            stale = 0;
        } else if (++stale >= config.patience) {
            result.record.early_stopped = epoch < config.max_epochs;
            break;
        }
    }
    return result;
}

Metrics evaluate(const ClassifierParams& params, const InstanceSet& instances, const InferenceConfig& config) {
    if (!instances.labeled()) throw UsageError("evaluation needs labeled instances");
    if (instances.size() == 0) throw UsageError("evaluation set is empty");
    if (instances.feature_dim() != params.architecture.input_dim()) {
        throw UsageError("instances have " + std::to_string(instances.feature_dim()) + " features, model expects " +
                         std::to_string(params.architecture.input_dim()));
    }
    auto predicted = predict(params, instances.features, config);
    Metrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool truth = (*instances.labels)[i] == 1;
        const bool guess = predicted[i] == 1;
        if (truth && guess) ++m.true_positive;
        else if (!truth && guess) ++m.false_positive;
        else if (!truth && !guess) ++m.true_negative;
        else ++m.false_negative;
    }
    m.accuracy = static_cast<double>(m.true_positive + m.true_negative) / static_cast<double>(m.count());
    return m;
}

nlohmann::json metrics_to_json(const Metrics& metrics) {
    return {
        {"accuracy", metrics.accuracy},
        {"count", metrics.count()},
        {"true_positive", metrics.true_positive},
        {"false_positive", metrics.false_positive},
        {"true_negative", metrics.true_negative},
        {"false_negative", metrics.false_negative},
    };
}

CrossValidationResult cross_validate(const BagDataset& dataset, const TrainConfig& config, int k) {
    BagDataset folded = dataset.folds ? dataset : assign_folds(dataset, k, config.seed);
    if (dataset.folds) {
        k = *std::max_element(folded.folds->begin(), folded.folds->end()) + 1;
        if (k < 2) throw UsageError("fold assignment has fewer than 2 folds");
    }
    if (!folded.truth.present()) throw UsageError("cross-validation needs instance labels to score held-out folds");

    CrossValidationResult result;
    result.folds.resize(static_cast<std::size_t>(k));
    TrainConfig fold_config = config;
    const unsigned fold_threads = config.threads;
    if (fold_threads > 1) fold_config.threads = 1;

    detail::parallel_for(static_cast<std::size_t>(k), fold_threads, [&](std::size_t f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t j = 0; j < folded.size(); ++j) {
            ((*folded.folds)[j] == static_cast<int>(f) ? test_idx : train_idx).push_back(j);
        }
        if (test_idx.empty() || train_idx.empty()) throw UsageError("fold " + std::to_string(f) + " is empty");
        BagDataset train_set = folded.subset(train_idx);
        InstanceSet test_set = folded.instances(test_idx);
        auto trained = train(train_set, fold_config, &test_set);
        auto& out = result.folds[f];
        out.fold = static_cast<int>(f);
        out.metrics = evaluate(trained.params, test_set, {config.threshold});
        out.record = std::move(trained.record);
    });

    double sum = 0.0;
    for (const auto& f : result.folds) sum += f.metrics.accuracy;
    result.mean_accuracy = sum / k;
    double sq = 0.0;
    for (const auto& f : result.folds) sq += (f.metrics.accuracy - result.mean_accuracy) * (f.metrics.accuracy - result.mean_accuracy);
    result.std_accuracy = std::sqrt(sq / (k - 1));
    return result;
}

nlohmann::json cross_validation_to_json(const CrossValidationResult& result, const TrainConfig& config) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : result.folds) {
        folds.push_back({{"fold", f.fold},
                         {"epochs", f.record.rows.size()},
                         {"early_stopped", f.record.early_stopped},
                         {"metrics", metrics_to_json(f.metrics)}});
    }
    return {
        {"method", method_name(config.method)},
        {"k", result.folds.size()},
        {"folds", folds},
        {"mean_accuracy", result.mean_accuracy},
        {"std_accuracy", result.std_accuracy},
    };
}

std::vector<SweepRow> bag_size_sweep(const InstanceSet& instances, std::span<const std::size_t> sizes,
                                     const TrainConfig& config, int k, std::size_t mle_capacity) {
    if (!instances.labeled()) throw UsageError("bag-size sweep needs labeled instances");
    for (auto size : sizes) {
        if (size < 1) throw UsageError("bag size must be at least 1");
        if (config.method == Method::mle && size > mle_capacity) {
            throw UsageError("bag size " + std::to_string(size) + " exceeds the mle capacity guard of " +
                             std::to_string(mle_capacity));
        }
        if (instances.size() / size < static_cast<std::size_t>(k)) {
            throw UsageError("bag size " + std::to_string(size) + ": " + std::to_string(instances.size()) +
                             " instances give fewer than " + std::to_string(k) + " bags");
        }
    }
    std::vector<SweepRow> rows;
    for (auto size : sizes) {
        auto bags = make_bags(instances, size, size, config.seed);
        auto cv = cross_validate(bags, config, k);
        SweepRow row{size, cv.mean_accuracy, cv.std_accuracy, {}};
        for (const auto& f : cv.folds) row.fold_accuracies.push_back(f.metrics.accuracy);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> full_batch_em(ClassifierParams& params, const BagDataset& dataset, const FullBatchEmConfig& config,
                                  const std::function<void(int, const EmState&)>& on_e_step) {
    dataset.validate();
    const auto flat = flatten(dataset);
    std::vector<double> history;
    for (int cycle = 0; cycle < config.cycles; ++cycle) {
        auto state = e_step(params, dataset);
        if (cycle == 0) history.push_back(state.log_likelihood);
        if (on_e_step) on_e_step(cycle, state);
        const auto phi = flatten_phi(state);
        for (int step = 0; step < config.inner_steps; ++step) {
            auto pass = forward_pass(params, flat.features);
            auto lg = cross_entropy(pass.outputs(), phi);
            scale(lg.output_grads, 1.0 / static_cast<double>(phi.size()));
            gradient_step(params, backward(params, pass, lg.output_grads), config.learning_rate);
        }
        history.push_back(mle_llp_objective(params, dataset));
    }
    return history;
}

} // namespace llp
