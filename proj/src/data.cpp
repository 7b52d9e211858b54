// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "llp/data.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "llp/error.hpp"
#include "text_io.hpp"

namespace llp {

Instance InstanceSet::instance(std::size_t i) const {
    auto row = features.row(i);
    Instance out{{row.begin(), row.end()}, std::nullopt};
    if (labels) out.true_label = (*labels)[i];
    return out;
}

GroundTruth::GroundTruth(std::vector<std::vector<std::uint8_t>> per_bag)
    : labels_(std::make_shared<const std::vector<std::vector<std::uint8_t>>>(std::move(per_bag))),
      reads_(std::make_shared<std::atomic<std::size_t>>(0)) {}

std::span<const std::uint8_t> GroundTruth::labels(std::size_t bag) const {
    if (!labels_) throw UsageError("dataset carries no instance labels");
    reads_->fetch_add(1, std::memory_order_relaxed);
    return (*labels_).at(bag);
}

GroundTruth GroundTruth::select(std::span<const std::size_t> bags) const {
    if (!labels_) return {};
    std::vector<std::vector<std::uint8_t>> picked;
    picked.reserve(bags.size());
    for (auto j : bags) picked.push_back(labels_->at(j));
    return GroundTruth(std::move(picked));
}

std::size_t BagDataset::instance_count() const noexcept {
    std::size_t total = 0;
    for (const auto& bag : bags) total += bag.size();
    return total;
}

void BagDataset::validate() const {
    if (bags.empty()) throw UsageError("dataset has no bags");
    for (std::size_t j = 0; j < bags.size(); ++j) {
        const auto& bag = bags[j];
        if (bag.size() == 0) throw UsageError("bag " + std::to_string(j) + " is empty");
        if (bag.features.cols() != feature_dim) {
            throw UsageError("bag " + std::to_string(j) + " has feature dimension " +
                             std::to_string(bag.features.cols()) + ", expected " + std::to_string(feature_dim));
        }
        if (bag.positive_count < 0 || static_cast<std::size_t>(bag.positive_count) > bag.size()) {
            throw UsageError("bag " + std::to_string(j) + " has positive count " +
                             std::to_string(bag.positive_count) + " outside [0, " + std::to_string(bag.size()) + "]");
        }
    }
    if (folds && folds->size() != bags.size()) throw UsageError("fold assignment does not cover every bag");
}

BagDataset BagDataset::subset(std::span<const std::size_t> bag_indices) const {
    BagDataset out;
    out.feature_dim = feature_dim;
    out.bags.reserve(bag_indices.size());
    for (auto j : bag_indices) out.bags.push_back(bags.at(j));
    out.truth = truth.select(bag_indices);
    return out;
}

InstanceSet BagDataset::instances(std::span<const std::size_t> bag_indices) const {
    InstanceSet out;
    std::size_t total = 0;
    for (auto j : bag_indices) total += bags.at(j).size();
    out.features = Matrix(total, feature_dim);
    if (truth.present()) out.labels.emplace();
    std::size_t r = 0;
    for (auto j : bag_indices) {
        const auto& bag = bags[j];
        for (std::size_t i = 0; i < bag.size(); ++i, ++r) {
            auto src = bag.features.row(i);
            std::copy(src.begin(), src.end(), out.features.row(r).begin());
        }
        if (truth.present()) {
            auto l = truth.labels(j);
            out.labels->insert(out.labels->end(), l.begin(), l.end());
        }
    }
    return out;
}

InstanceSet parse_instances_csv(std::string_view contents) {
    auto rows = text::lines(contents);
    if (rows.empty()) throw FormatError("instance file is empty");

    auto header = text::split(rows.front().second);
    bool labeled = header.back() == "label";
    std::size_t dim = header.size() - (labeled ? 1 : 0);
    if (dim == 0) throw FormatError("instance file declares no feature columns");
    for (std::size_t c = 0; c < dim; ++c) {
        if (header[c] == "label") throw FormatError("label column must be the last column");
    }
    if (rows.size() < 2) throw FormatError("instance file has a header but no rows");

    InstanceSet out;
    out.features = Matrix(rows.size() - 1, dim);
    if (labeled) out.labels.emplace(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto [line, text] = rows[r];
        auto fields = text::split(text);
        if (fields.size() != header.size()) {
            throw FormatError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                              " columns, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < dim; ++c) out.features(r - 1, c) = text::parse_finite(fields[c], line);
        if (labeled) {
            auto label = text::parse_int<int>(fields.back(), line);
            if (label != 0 && label != 1) {
                throw FormatError("line " + std::to_string(line) + ": label must be 0 or 1");
            }
            (*out.labels)[r - 1] = static_cast<std::uint8_t>(label);
        }
    }
    return out;
}

InstanceSet load_instances_csv(const std::filesystem::path& path) {
    return parse_instances_csv(text::read_file(path));
}

namespace {

void append_header(std::string& out, std::size_t dim) {
    for (std::size_t c = 0; c < dim; ++c) {
        if (c) out += ',';
        out += 'f';
        out += std::to_string(c);
    }
}

void append_features(std::string& out, std::span<const double> row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        text::append_double(out, row[c]);
    }
}

} // namespace

void write_instances_csv(const std::filesystem::path& path, const InstanceSet& instances) {
    std::string out;
    append_header(out, instances.feature_dim());
    if (instances.labeled()) out += ",label";
    out += '\n';
    for (std::size_t i = 0; i < instances.size(); ++i) {
        append_features(out, instances.features.row(i));
        if (instances.labeled()) {
            out += ',';
            out += static_cast<char>('0' + (*instances.labels)[i]);
        }
        out += '\n';
    }
    text::write_file(path, out);
}

BagDataset make_bags(const InstanceSet& instances, std::size_t min_size, std::size_t max_size, std::uint64_t seed) {
    if (!instances.labeled()) throw UsageError("bagging requires labeled instances");
    if (min_size < 1 || min_size > max_size || max_size > instances.size()) {
        throw UsageError("bag sizes must satisfy 1 <= min (" + std::to_string(min_size) + ") <= max (" +
                         std::to_string(max_size) + ") <= instance count (" + std::to_string(instances.size()) +
                         ")");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::size_t> size_dist(min_size, max_size);

    BagDataset out;
    out.feature_dim = instances.feature_dim();
    std::vector<std::vector<std::uint8_t>> truth;
    std::size_t pos = 0;
    while (order.size() - pos >= min_size) {
        auto n = size_dist(rng);
        if (n > order.size() - pos) break;
        std::span<const std::size_t> ids(order.data() + pos, n);
        Bag bag;
        bag.features = instances.features.gather(ids);
        bag.instance_ids.assign(ids.begin(), ids.end());
        std::vector<std::uint8_t> labels;
        labels.reserve(n);
        for (auto id : ids) labels.push_back((*instances.labels)[id]);
        bag.positive_count = static_cast<int>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
        out.bags.push_back(std::move(bag));
        truth.push_back(std::move(labels));
        pos += n;
    }
    if (out.bags.empty()) throw UsageError("no bag could be formed from the instances");
    out.truth = GroundTruth(std::move(truth));
    return out;
}

InstanceSet generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_instances < 2) throw UsageError("synthetic data needs at least 2 instances");
    if (spec.feature_dim < 1) throw UsageError("synthetic data needs at least 1 feature");
    if (!(spec.class_separation >= 0.0)) throw UsageError("class separation must be non-negative");
    if (!(spec.positive_prior > 0.0 && spec.positive_prior < 1.0)) {
        throw UsageError("positive prior must lie in (0, 1)");
    }

    std::mt19937_64 rng(spec.seed);
    std::bernoulli_distribution label_dist(spec.positive_prior);
    std::normal_distribution<double> noise(0.0, 1.0);

    InstanceSet out;
    out.features = Matrix(spec.num_instances, spec.feature_dim);
    out.labels.emplace(spec.num_instances);
    for (std::size_t i = 0; i < spec.num_instances; ++i) {
        bool positive = label_dist(rng);
        (*out.labels)[i] = positive ? 1 : 0;
        for (std::size_t c = 0; c < spec.feature_dim; ++c) out.features(i, c) = noise(rng);
        if (positive) out.features(i, 0) += spec.class_separation;
    }
    return out;
}

BagDataset assign_folds(BagDataset dataset, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("need at least 2 folds, got " + std::to_string(k));
    if (dataset.size() < static_cast<std::size_t>(k)) {
        throw UsageError("cannot split " + std::to_string(dataset.size()) + " bags into " + std::to_string(k) +
                         " folds");
    }
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> folds(dataset.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) folds[order[pos]] = static_cast<int>(pos % k);
    dataset.folds = std::move(folds);
    return dataset;
}

void write_bags_csv(const std::filesystem::path& path, const BagDataset& dataset) {
    std::string out = "bag_id,y,n\n";
    for (std::size_t j = 0; j < dataset.size(); ++j) {
        out += std::to_string(j) + ',' + std::to_string(dataset.bags[j].positive_count) + ',' +
               std::to_string(dataset.bags[j].size()) + '\n';
    }
    bool labeled = dataset.truth.present();
    out += "bag_id,instance_id,";
    append_header(out, dataset.feature_dim);
    if (labeled) out += ",label";
    out += '\n';
    for (std::size_t j = 0; j < dataset.size(); ++j) {
        const auto& bag = dataset.bags[j];
        std::span<const std::uint8_t> labels;
        if (labeled) labels = dataset.truth.labels(j);
        for (std::size_t i = 0; i < bag.size(); ++i) {
            out += std::to_string(j) + ',';
            out += std::to_string(i < bag.instance_ids.size() ? bag.instance_ids[i] : i) + ',';
            append_features(out, bag.features.row(i));
            if (labeled) {
                out += ',';
                out += static_cast<char>('0' + labels[i]);
            }
            out += '\n';
        }
    }
    text::write_file(path, out);
}

BagDataset parse_bags_csv(std::string_view contents) {
    auto rows = text::lines(contents);
    if (rows.empty()) throw FormatError("bag file is empty");
    auto bag_header = text::split(rows.front().second);
    if (bag_header != std::vector<std::string_view>{"bag_id", "y", "n"}) {
        throw FormatError("bag file must start with header 'bag_id,y,n'");
    }

    struct Summary {
        int y;
        std::size_t n;
    };
    std::vector<Summary> summaries;
    std::size_t r = 1;
    for (; r < rows.size(); ++r) {
        auto [line, text] = rows[r];
        if (text.starts_with("bag_id")) break;
        auto fields = text::split(text);
        if (fields.size() != 3) throw FormatError("line " + std::to_string(line) + ": expected 'bag_id,y,n'");
        auto id = text::parse_int<std::size_t>(fields[0], line);
        if (id != summaries.size()) {
            throw FormatError("line " + std::to_string(line) + ": bag ids must be consecutive from 0");
        }
        auto y = text::parse_int<int>(fields[1], line);
        auto n = text::parse_int<std::size_t>(fields[2], line);
        if (n < 1 || y < 0 || static_cast<std::size_t>(y) > n) {
            throw FormatError("line " + std::to_string(line) + ": need 0 <= y <= n and n >= 1");
        }
        summaries.push_back({y, n});
    }
    if (summaries.empty()) throw FormatError("bag file lists no bags");
    if (r == rows.size()) throw FormatError("bag file has no instance table");

    auto inst_header = text::split(rows[r].second);
    if (inst_header.size() < 3 || inst_header[1] != "instance_id") {
        throw FormatError("line " + std::to_string(rows[r].first) +
                          ": instance table header must be 'bag_id,instance_id,f0,...'");
    }
    bool labeled = inst_header.back() == "label";
    std::size_t dim = inst_header.size() - 2 - (labeled ? 1 : 0);
    if (dim == 0) throw FormatError("instance table declares no feature columns");

    BagDataset out;
    out.feature_dim = dim;
    out.bags.resize(summaries.size());
    std::vector<std::vector<std::uint8_t>> labels(summaries.size());
    for (std::size_t j = 0; j < summaries.size(); ++j) {
        out.bags[j].positive_count = summaries[j].y;
        out.bags[j].features = Matrix(0, dim);
    }
    std::vector<double> feature_row(dim);
    for (++r; r < rows.size(); ++r) {
        auto [line, text] = rows[r];
        auto fields = text::split(text);
        if (fields.size() != inst_header.size()) {
            throw FormatError("line " + std::to_string(line) + ": expected " + std::to_string(inst_header.size()) +
                              " columns, found " + std::to_string(fields.size()));
        }
        auto j = text::parse_int<std::size_t>(fields[0], line);
        if (j >= summaries.size()) throw FormatError("line " + std::to_string(line) + ": unknown bag id");
        auto& bag = out.bags[j];
        bag.instance_ids.push_back(text::parse_int<std::size_t>(fields[1], line));
        for (std::size_t c = 0; c < dim; ++c) feature_row[c] = text::parse_finite(fields[2 + c], line);
        bag.features.append_row(feature_row);
        if (labeled) {
            auto label = text::parse_int<int>(fields.back(), line);
            if (label != 0 && label != 1) throw FormatError("line " + std::to_string(line) + ": label must be 0 or 1");
            labels[j].push_back(static_cast<std::uint8_t>(label));
        }
    }
    for (std::size_t j = 0; j < summaries.size(); ++j) {
        if (out.bags[j].size() != summaries[j].n) {
            throw FormatError("bag " + std::to_string(j) + " declares n=" + std::to_string(summaries[j].n) + " but has " +
                              std::to_string(out.bags[j].size()) + " instance rows");
        }
    }
    if (labeled) out.truth = GroundTruth(std::move(labels));
    return out;
}

BagDataset load_bags_csv(const std::filesystem::path& path) { return parse_bags_csv(text::read_file(path)); }

} // namespace llp
