// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "llp/matrix.hpp"

namespace llp {

// A single instance as seen by a caller holding ground truth.
struct Instance {
    std::vector<double> features;
    std::optional<int> true_label;
};

// A flat collection of instances sharing one feature dimension. Labels are
// either present for every row or absent for all of them.
struct InstanceSet {
    Matrix features;
    std::optional<std::vector<std::uint8_t>> labels;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }
    bool labeled() const noexcept { return labels.has_value(); }
    Instance instance(std::size_t i) const;
};

// A bag as seen by the learning objectives: features and the positive count.
// There is deliberately no label field here.
struct Bag {
    Matrix features;
    int positive_count = 0;
    // Row indices into the instance list the bag was drawn from.
    std::vector<std::size_t> instance_ids;

    std::size_t size() const noexcept { return features.rows(); }
};

// Instance labels of a bag dataset, kept apart from the bags themselves.
// Every lookup is counted so tests can assert that the weakly supervised
// code paths never touch it.
class GroundTruth {
public:
    GroundTruth() = default;
    explicit GroundTruth(std::vector<std::vector<std::uint8_t>> per_bag);

    bool present() const noexcept { return labels_ != nullptr; }
    std::span<const std::uint8_t> labels(std::size_t bag) const;
    std::size_t reads() const noexcept { return reads_ ? reads_->load() : 0; }
    // Labels of the listed bags, in order. Copying is not counted as a read;
    // the result has its own counter.
    GroundTruth select(std::span<const std::size_t> bags) const;

private:
    std::shared_ptr<const std::vector<std::vector<std::uint8_t>>> labels_;
    std::shared_ptr<std::atomic<std::size_t>> reads_;
};

struct BagDataset {
    std::vector<Bag> bags;
    std::size_t feature_dim = 0;
    // fold id per bag, when cross-validation folds have been assigned
    std::optional<std::vector<int>> folds;
    GroundTruth truth;

    std::size_t size() const noexcept { return bags.size(); }
    std::size_t instance_count() const noexcept;
    // Throws UsageError when an invariant does not hold.
    void validate() const;
    // Bags in the listed order, keeping ground truth aligned; folds dropped.
    BagDataset subset(std::span<const std::size_t> bag_indices) const;
    // Flattens the listed bags into instances. Reads ground truth if present.
    InstanceSet instances(std::span<const std::size_t> bag_indices) const;
};

struct SyntheticSpec {
    std::size_t num_instances = 1000;
    std::size_t feature_dim = 2;
    double class_separation = 4.0;
    double positive_prior = 0.5;
    std::uint64_t seed = 0;
};

// Reads `f0,...,f{d-1}[,label]` instance CSV.
InstanceSet load_instances_csv(const std::filesystem::path& path);
InstanceSet parse_instances_csv(std::string_view text);
void write_instances_csv(const std::filesystem::path& path, const InstanceSet& instances);

// Random bags of uniformly drawn sizes in [min_size, max_size], sampling
// without replacement. Stops at the first drawn size that exceeds the number
// of remaining instances; the remainder is discarded.
BagDataset make_bags(const InstanceSet& instances, std::size_t min_size, std::size_t max_size,
                     std::uint64_t seed);

InstanceSet generate_synthetic(const SyntheticSpec& spec);

// Balanced random assignment of bags to k folds.
BagDataset assign_folds(BagDataset dataset, int k, std::uint64_t seed);

// Bag file: a `bag_id,y,n` table followed by a
// `bag_id,instance_id,f0,...,f{d-1}[,label]` table.
void write_bags_csv(const std::filesystem::path& path, const BagDataset& dataset);
BagDataset load_bags_csv(const std::filesystem::path& path);
BagDataset parse_bags_csv(std::string_view text);

} // namespace llp
