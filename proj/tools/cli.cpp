// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "llp/data.hpp"
#include "llp/error.hpp"
#include "llp/simd/kernels.hpp"
#include "llp/trainer.hpp"
#include "text_io.hpp"

namespace llp::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// FNV-1a over the file bytes.
std::string fingerprint(const fs::path& path) {
    const auto bytes = text::read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

fs::path output_dir(const std::string& flag, const std::string& fallback_name) {
    if (!flag.empty()) return flag;
    const char* root = std::getenv("LLP_OUTPUT_ROOT");
    if (!root || !*root) throw UsageError("--out not given and LLP_OUTPUT_ROOT is not set");
    return fs::path(root) / fallback_name;
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_json(const fs::path& path, const nlohmann::json& j) { text::write_file(path, j.dump(1) + "\n"); }

struct SynthArgs {
    SyntheticSpec spec;
    std::string out;
};

struct BagArgs {
    std::string in, out;
    std::size_t min_size = 1, max_size = 8;
    std::uint64_t seed = 0;
};

// Flags shared by train and sweep.
struct ModelArgs {
    TrainConfig config;
    std::vector<std::size_t> hidden{32, 32};
    std::size_t batch = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("--epochs", config.max_epochs, "maximum epochs")->capture_default_str();
        cmd->add_option("--seed", config.seed, "training seed")->capture_default_str();
        cmd->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',')->capture_default_str();
        cmd->add_option("--batch", batch, "batch size (instances for mle/supervised, bags for amle/dllp)");
        cmd->add_option("--lr", config.optimizer.learning_rate, "learning rate")->capture_default_str();
        cmd->add_option("--beta1", config.optimizer.beta1)->capture_default_str();
        cmd->add_option("--beta2", config.optimizer.beta2)->capture_default_str();
        cmd->add_option("--adam-eps", config.optimizer.epsilon)->capture_default_str();
        cmd->add_option("--patience", config.patience, "early-stop patience in epochs")->capture_default_str();
        cmd->add_option("--tol", config.relative_tolerance, "early-stop relative tolerance")->capture_default_str();
        cmd->add_option("--refresh", config.phi_refresh_interval, "mle: epochs between posterior refreshes")
            ->capture_default_str();
        cmd->add_option("--threshold", config.threshold, "decision threshold")->capture_default_str();
        cmd->add_option("--threads", config.threads, "worker threads")->capture_default_str();
    }

    TrainConfig resolve() {
        config.hidden_widths = hidden;
        if (batch) config.batch_size = batch;
        config.validate();
        return config;
    }
};

struct TrainArgs {
    std::string method, bags, out, test;
    int folds = 0;
    ModelArgs model;
};

struct EvalArgs {
    std::string checkpoint, in, out;
    double threshold = 0.5;
};

struct SweepArgs {
    std::string in, out;
    std::vector<std::size_t> sizes;
    std::vector<std::string> methods{"mle", "amle", "dllp"};
    int folds = 10;
    std::size_t mle_capacity = 128;
    ModelArgs model;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    auto instances = generate_synthetic(a.spec);
    write_instances_csv(a.out, instances);
    const auto pos = std::count(instances.labels->begin(), instances.labels->end(), 1);
    out << "wrote " << instances.size() << " instances to " << a.out << "\n";
    out << "class 0: " << instances.size() - static_cast<std::size_t>(pos) << "\n";
    out << "class 1: " << pos << "\n";
    return kExitOk;
}

int cmd_bag(const BagArgs& a, std::ostream& out) {
    auto instances = load_instances_csv(a.in);
    if (!instances.labeled()) throw UsageError("'" + a.in + "' has no label column; bagging needs labels");
    auto bags = make_bags(instances, a.min_size, a.max_size, a.seed);
    write_bags_csv(a.out, bags);

    std::map<std::size_t, std::size_t> histogram;
    long positives = 0;
    for (const auto& bag : bags.bags) {
        ++histogram[bag.size()];
        positives += bag.positive_count;
    }
    const auto used = bags.instance_count();
    out << "bags: " << bags.size() << "\n";
    out << "instances: " << used << " of " << instances.size() << "\n";
    out << "size histogram:\n";
    for (auto [size, count] : histogram) out << "  " << size << ": " << count << "\n";
    out << "positive fraction: " << fixed6(used ? static_cast<double>(positives) / static_cast<double>(used) : 0.0)
        << "\n";
    return kExitOk;
}

int cmd_train(TrainArgs& a, std::ostream& out) {
    auto config = a.model.resolve();
    config.method = parse_method(a.method);
    if (a.folds == 1 || a.folds < 0) throw UsageError("--folds must be 0 (no cross-validation) or at least 2");

    auto dataset = load_bags_csv(a.bags);
    std::optional<InstanceSet> test;
    if (!a.test.empty()) test = load_instances_csv(a.test);

    const auto dir = output_dir(a.out, std::string(method_name(config.method)) + "-seed" + std::to_string(config.seed));
    make_dir(dir);

    nlohmann::json manifest{
        {"tool", "llp"},
        {"version", LLP_VERSION},
        {"kernels", simd::name(simd::active().isa)},
        {"command", "train"},
        {"seed", config.seed},
        {"config", config_to_json(config)},
        {"folds", a.folds},
        {"dataset",
         {{"path", a.bags},
          {"fingerprint", fingerprint(a.bags)},
          {"bags", dataset.size()},
          {"instances", dataset.instance_count()},
          {"feature_dim", dataset.feature_dim}}},
    };
    if (test) manifest["test_dataset"] = {{"path", a.test}, {"fingerprint", fingerprint(a.test)}};

    if (a.folds >= 2) {
        nlohmann::json curves = nlohmann::json::array();
        for (int f = 0; f < a.folds; ++f) curves.push_back((dir / ("fold" + std::to_string(f) + "_curve.csv")).string());
        manifest["outputs"] = {{"manifest", (dir / "manifest.json").string()},
                               {"summary", (dir / "summary.json").string()},
                               {"curves", curves}};
        write_json(dir / "manifest.json", manifest);

        auto cv = cross_validate(dataset, config, a.folds);
        for (const auto& f : cv.folds) {
            text::write_file(dir / ("fold" + std::to_string(f.fold) + "_curve.csv"), f.record.to_csv());
        }
        write_json(dir / "summary.json", cross_validation_to_json(cv, config));
        out << "method " << method_name(config.method) << ", " << a.folds << " folds\n";
        out << "mean accuracy: " << fixed6(cv.mean_accuracy) << " (std " << fixed6(cv.std_accuracy) << ")\n";
        return kExitOk;
    }

    manifest["outputs"] = {{"manifest", (dir / "manifest.json").string()},
                           {"checkpoint", (dir / "checkpoint.json").string()},
                           {"curve", (dir / "curve.csv").string()}};
    write_json(dir / "manifest.json", manifest);

    auto result = train(dataset, config, test ? &*test : nullptr);
    save_checkpoint(dir / "checkpoint.json", {result.params, result.optimizer});
    text::write_file(dir / "curve.csv", result.record.to_csv());
    const auto& last = result.record.rows.back();
    out << "method " << method_name(config.method) << ": " << result.record.rows.size() << " epochs"
        << (result.record.early_stopped ? " (early stop)" : "") << "\n";
    out << "final loss: " << fixed6(last.loss) << "\n";
    if (last.test_accuracy) out << "test accuracy: " << fixed6(*last.test_accuracy) << "\n";
    out << "wrote " << dir.string() << "\n";
    return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    auto ckpt = load_checkpoint(a.checkpoint);
    auto instances = load_instances_csv(a.in);
    if (!instances.labeled()) throw UsageError("'" + a.in + "' has no label column; evaluation needs labels");
    auto metrics = evaluate(ckpt.params, instances, {a.threshold});
    auto j = metrics_to_json(metrics);
    if (!a.out.empty()) write_json(a.out, j);
    out << "accuracy: " << fixed6(metrics.accuracy) << "\n";
    out << "tp " << metrics.true_positive << " fp " << metrics.false_positive << " tn " << metrics.true_negative
        << " fn " << metrics.false_negative << "\n";
    return kExitOk;
}

int cmd_sweep(SweepArgs& a, std::ostream& out) {
    auto config = a.model.resolve();
    std::vector<Method> methods;
    for (const auto& m : a.methods) methods.push_back(parse_method(m));
    auto instances = load_instances_csv(a.in);

    std::string csv = "method,bag_size,mean_accuracy,std\n";
    for (auto m : methods) {
        config.method = m;
        for (const auto& row : bag_size_sweep(instances, a.sizes, config, a.folds, a.mle_capacity)) {
            csv += std::string(method_name(m)) + "," + std::to_string(row.bag_size) + "," +
                   fixed6(row.mean_accuracy) + "," + fixed6(row.std_accuracy) + "\n";
        }
    }
    const auto path = a.out.empty() ? output_dir("", "sweep") / "sweep.csv" : fs::path(a.out);
    if (path.has_parent_path()) make_dir(path.parent_path());
    text::write_file(path, csv);
    out << csv;
    return kExitOk;
}

int report(std::ostream& err, const char* kind, const std::string& msg, int code) {
    std::string line = msg;
    for (auto& c : line) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    err << "llp-error: " << kind << ": " << line << "\n";
    return code;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"learning from label proportions"};
    app.name(args.empty() ? "llp" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.set_version_flag("--version", LLP_VERSION);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate labeled Gaussian blobs");
    s->add_option("--n", synth.spec.num_instances, "instances")->capture_default_str();
    s->add_option("--dim", synth.spec.feature_dim, "feature dimension")->capture_default_str();
    s->add_option("--sep", synth.spec.class_separation, "class mean separation")->capture_default_str();
    s->add_option("--prior", synth.spec.positive_prior, "positive class prior")->capture_default_str();
    s->add_option("--seed", synth.spec.seed)->capture_default_str();
    s->add_option("--out", synth.out, "instance CSV to write")->required();

    BagArgs bag;
    auto* b = app.add_subcommand("bag", "group labeled instances into bags");
    b->add_option("--in", bag.in, "labeled instance CSV")->required();
    b->add_option("--min", bag.min_size, "smallest bag size")->capture_default_str();
    b->add_option("--max", bag.max_size, "largest bag size")->capture_default_str();
    b->add_option("--seed", bag.seed)->capture_default_str();
    b->add_option("--out", bag.out, "bag CSV to write")->required();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train a classifier from bags");
    t->add_option("--method", tr.method, "mle, amle, dllp or supervised")->required();
    t->add_option("--bags", tr.bags, "bag CSV")->required();
    t->add_option("--out", tr.out, "run directory (default: $LLP_OUTPUT_ROOT/<method>-seed<seed>)");
    t->add_option("--folds", tr.folds, "cross-validate over this many folds");
    t->add_option("--test", tr.test, "labeled instance CSV scored after every epoch");
    tr.model.add(t);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "score a checkpoint on labeled instances");
    e->add_option("--checkpoint", ev.checkpoint)->required();
    e->add_option("--in", ev.in, "labeled instance CSV")->required();
    e->add_option("--out", ev.out, "metrics JSON to write");
    e->add_option("--threshold", ev.threshold)->capture_default_str();

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "cross-validated accuracy per bag size");
    w->add_option("--in", sw.in, "labeled instance CSV")->required();
    w->add_option("--sizes", sw.sizes, "bag sizes")->delimiter(',')->required();
    w->add_option("--methods", sw.methods)->delimiter(',')->capture_default_str();
    w->add_option("--folds", sw.folds)->capture_default_str();
    w->add_option("--mle-capacity", sw.mle_capacity, "largest bag size allowed for mle")->capture_default_str();
    w->add_option("--out", sw.out, "results CSV (default: $LLP_OUTPUT_ROOT/sweep/sweep.csv)");
    sw.model.add(w);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << LLP_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& ex) {
        return report(err, "usage", ex.what(), kExitUsage);
    }

    try {
        if (*s) return cmd_synth(synth, out);
        if (*b) return cmd_bag(bag, out);
        if (*t) return cmd_train(tr, out);
        if (*e) return cmd_eval(ev, out);
        return cmd_sweep(sw, out);
    } catch (const NumericalError& ex) {
        return report(err, ex.kind(), ex.what(), kExitNumerical);
    } catch (const Error& ex) {
        return report(err, ex.kind(), ex.what(), kExitUsage);
    } catch (const std::exception& ex) {
        return report(err, "internal", ex.what(), kExitUsage);
    }
}

} // namespace llp::cli
