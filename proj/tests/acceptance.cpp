// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "llp/objectives.hpp"
#include "llp/poisson_binomial.hpp"
#include "llp/trainer.hpp"
#include "oracles.hpp"

using namespace llp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict pb_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> n_dist(1, 12);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> y_dist(0, n);
        const auto y = y_dist(rng);
        ProbabilityVector p(oracle::random_probabilities(rng, n, 0.0, 1.0));
        worst = std::max(worst, std::abs(pb_dp(p, y) - pb_enumerated(p, y)));
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-12 && t < 5.0, fmt("max |dp - enum| = %.3g over 1000 triples, %.3f s", worst, t)};
}

Verdict posterior_consistency() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> n_dist(1, 12);
    double worst_sum = 0.0, worst_phi = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> y_dist(0, n);
        const auto y = y_dist(rng);
        ProbabilityVector p(oracle::random_probabilities(rng, n, 0.0, 1.0));
        auto phi = instance_posteriors(p, y).phi;
        auto reference = marginalize(configuration_posterior(p, y), n).phi;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += phi[i];
            worst_phi = std::max(worst_phi, std::abs(phi[i] - reference[i]));
        }
        worst_sum = std::max(worst_sum, std::abs(sum - static_cast<double>(y)));
    }
    return {worst_sum <= 1e-10 && worst_phi <= 1e-10,
            fmt("max |sum phi - y| = %.3g, max |phi - enum phi| = %.3g over 1000 bags", worst_sum, worst_phi)};
}

Verdict gradient_suite() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> n_dist(1, 6), w_dist(1, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::map<std::string, double> worst{{"m_step", 0.0}, {"amle", 0.0}, {"dllp", 0.0}, {"supervised", 0.0}};

    int redrawn = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Architecture arch{{3, w_dist(rng), w_dist(rng), 1}};
        ClassifierParams params;
        Bag bag;
        const auto n = n_dist(rng);
        // draw until no hidden unit sits within reach of its kink, where the
        // central difference straddles a non-differentiable point
        for (std::uint64_t draw = 0;; ++draw, ++redrawn) {
            params = init_params(arch, 5000 + 100 * draw + static_cast<std::uint64_t>(trial));
            for (auto& t : params.theta) t += 0.1 * z(rng);
            bag.features = Matrix(n, 3);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < 3; ++c) bag.features(r, c) = z(rng);
            }
            if (oracle::relu_margin(params, bag.features) >= 1e-2) break;
        }
        std::uniform_int_distribution<int> y_dist(0, static_cast<int>(n));
        bag.positive_count = y_dist(rng);
        std::vector<double> phi(n);
        for (auto& v : phi) v = u(rng);
        std::vector<std::uint8_t> labels(n);
        for (auto& l : labels) l = u(rng) < 0.5;

        auto check = [&](const std::string& name, const LossAndGrad& lg,
                         const std::function<double(const ClassifierParams&)>& loss) {
            auto analytic = backward(params, bag.features, lg.output_grads);
            auto numeric = oracle::numeric_gradient(params, loss);
            worst[name] = std::max(worst[name], oracle::relative_error(analytic, numeric));
        };
        check("m_step", m_step_loss(params, bag.features, phi),
              [&](const ClassifierParams& p) { return m_step_loss(p, bag.features, phi).loss; });
        check("amle", amle_loss(params, bag), [&](const ClassifierParams& p) { return amle_loss(p, bag).loss; });
        check("dllp", dllp_loss(params, bag), [&](const ClassifierParams& p) { return dllp_loss(p, bag).loss; });
        check("supervised", supervised_loss(params, bag.features, labels),
              [&](const ClassifierParams& p) { return supervised_loss(p, bag.features, labels).loss; });
    }
    bool pass = true;
    std::string detail = "max relative error over 100 problems:";
    for (const auto& [name, err] : worst) {
        pass = pass && err <= 1e-5;
        detail += fmt(" %s %.2g", name.c_str(), err);
    }
    return {pass, detail + fmt(" (%d draws redrawn near a ReLU kink)", redrawn)};
}

// Shared by the monotonicity and bound-tightness criteria.
struct EmRun {
    std::vector<double> history;
    double worst_gap = 0.0;
    double seconds = 0.0;
};

const EmRun& em_run() {
    static std::optional<EmRun> cached;
    if (cached) return *cached;
    EmRun run;
    const auto t0 = Clock::now();
    auto instances = generate_synthetic({400, 2, 2.0, 0.5, 404});
    auto all = make_bags(instances, 1, 6, 405);
    std::vector<std::size_t> first(50);
    for (std::size_t j = 0; j < 50; ++j) first[j] = j;
    auto dataset = all.subset(first);

    auto params = init_params(Architecture{{2, 16, 16, 1}}, 406);
    run.history = full_batch_em(params, dataset, {}, [&](int, const EmState&) {
        for (const auto& bag : dataset.bags) {
            ProbabilityVector p(forward(params, bag.features));
            const auto y = static_cast<std::size_t>(bag.positive_count);
            const double gap = std::abs(em_lower_bound(p, configuration_posterior(p, y)) - bag_log_likelihood(p, y));
            run.worst_gap = std::max(run.worst_gap, gap);
        }
    });
    run.seconds = seconds_since(t0);
    cached = run;
    return *cached;
}

Verdict em_monotonicity() {
    const auto& run = em_run();
    double worst_drop = 0.0;
    for (std::size_t t = 1; t < run.history.size(); ++t) worst_drop = std::max(worst_drop, run.history[t - 1] - run.history[t]);
    const bool pass = run.history.size() == 31 && worst_drop <= 1e-8 && run.seconds < 60.0;
    return {pass, fmt("L: %.6f -> %.6f over %zu cycles, largest decrease %.3g, %.2f s", run.history.front(),
                      run.history.back(), run.history.size() - 1, std::max(worst_drop, 0.0), run.seconds)};
}

Verdict bound_tightness() {
    const auto& run = em_run();
    return {run.worst_gap <= 1e-9, fmt("max per-bag |L(theta, alpha) - L(theta)| = %.3g over 30 E-steps", run.worst_gap)};
}

// Ten-fold runs on easy blobs, shared by the convergence and epoch-efficiency
// criteria.
struct ConvergenceRuns {
    std::map<Method, CrossValidationResult> cv;
    double seconds = 0.0;
};

const ConvergenceRuns& convergence_runs() {
    static std::optional<ConvergenceRuns> cached;
    if (cached) return *cached;
    ConvergenceRuns runs;
    const auto t0 = Clock::now();
    auto dataset = make_bags(generate_synthetic({2000, 2, 4.0, 0.5, 606}), 1, 8, 607);
    for (auto m : {Method::supervised, Method::mle, Method::amle, Method::dllp}) {
        TrainConfig cfg;
        cfg.method = m;
        cfg.max_epochs = 200;
        cfg.seed = 608;
        runs.cv[m] = cross_validate(dataset, cfg, 10);
    }
    runs.seconds = seconds_since(t0);
    cached = runs;
    return *cached;
}

Verdict convergence() {
    const auto& runs = convergence_runs();
    const double sup = runs.cv.at(Method::supervised).mean_accuracy;
    const double mle = runs.cv.at(Method::mle).mean_accuracy;
    const double amle = runs.cv.at(Method::amle).mean_accuracy;
    const double dllp = runs.cv.at(Method::dllp).mean_accuracy;
    int max_epochs = 0;
    for (const auto& [m, cv] : runs.cv) {
        for (const auto& f : cv.folds) max_epochs = std::max(max_epochs, static_cast<int>(f.record.rows.size()));
    }
    const bool pass = sup - mle <= 0.03 && sup - amle <= 0.06 && sup - dllp <= 0.06 && max_epochs <= 200 &&
                      runs.seconds < 600.0;
    return {pass, fmt("mean accuracy: supervised %.4f, mle %.4f, amle %.4f, dllp %.4f; longest run %d epochs; %.1f s",
                      sup, mle, amle, dllp, max_epochs, runs.seconds)};
}

double epochs_to_95(const TrainingRecord& record) {
    const double final_acc = *record.rows.back().test_accuracy;
    for (const auto& row : record.rows) {
        if (*row.test_accuracy >= 0.95 * final_acc) return row.epoch;
    }
    return record.rows.back().epoch;
}

Verdict epoch_efficiency() {
    const auto& runs = convergence_runs();
    std::map<Method, double> med;
    for (auto m : {Method::mle, Method::amle, Method::dllp}) {
        std::vector<double> e;
        for (const auto& f : runs.cv.at(m).folds) e.push_back(epochs_to_95(f.record));
        med[m] = median(e);
    }
    const bool pass = med[Method::mle] <= med[Method::amle] && med[Method::mle] <= med[Method::dllp];
    return {pass, fmt("median epochs to 95%% of final accuracy: mle %.1f, amle %.1f, dllp %.1f", med[Method::mle],
                      med[Method::amle], med[Method::dllp])};
}

Verdict bag_size_degradation() {
    const auto t0 = Clock::now();
    auto instances = generate_synthetic({2000, 2, 1.5, 0.5, 808});
    const std::vector<std::size_t> sizes{2, 4, 8, 16};
    bool pass = true;
    std::string detail;
    for (auto m : {Method::mle, Method::amle, Method::dllp}) {
        TrainConfig cfg;
        cfg.method = m;
        cfg.max_epochs = 200;
        cfg.seed = 809;
        auto rows = bag_size_sweep(instances, sizes, cfg, 10);
        detail += fmt("%s%s", detail.empty() ? "" : "; ", std::string(method_name(m)).c_str());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            detail += fmt(" %zu:%.4f", rows[k].bag_size, rows[k].mean_accuracy);
            if (k == 0) continue;
            const double pooled =
                std::sqrt(0.5 * (rows[k].std_accuracy * rows[k].std_accuracy + rows[k - 1].std_accuracy * rows[k - 1].std_accuracy));
            if (rows[k].mean_accuracy > rows[k - 1].mean_accuracy + pooled) {
                pass = false;
                detail += "(rise)";
            }
        }
    }
    return {pass, detail + fmt("; %.1f s", seconds_since(t0))};
}

Verdict single_instance_equivalence() {
    auto train_bags = make_bags(generate_synthetic({1000, 2, 4.0, 0.5, 909}), 1, 1, 910);
    auto test = generate_synthetic({2000, 2, 4.0, 0.5, 911});
    std::map<Method, double> acc;
    for (auto m : {Method::supervised, Method::mle, Method::amle, Method::dllp}) {
        TrainConfig cfg;
        cfg.method = m;
        cfg.max_epochs = 200;
        cfg.seed = 912;
        acc[m] = evaluate(train(train_bags, cfg).params, test).accuracy;
    }
    bool pass = train_bags.size() == 1000;
    for (auto m : {Method::mle, Method::amle, Method::dllp}) pass = pass && std::abs(acc[m] - acc[Method::supervised]) <= 0.02;
    return {pass, fmt("%zu bags; test accuracy: supervised %.4f, mle %.4f, amle %.4f, dllp %.4f", train_bags.size(),
                      acc[Method::supervised], acc[Method::mle], acc[Method::amle], acc[Method::dllp])};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string without_seconds(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

Verdict determinism() {
    const auto dir = fs::temp_directory_path() / "llp_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink;
    auto cli = [&](std::vector<std::string> args) {
        args.insert(args.begin(), "llp");
        return cli::run(args, sink, sink);
    };
    const auto p = [&](const char* f) { return (dir / f).string(); };
    bool pass = cli({"synth", "--n", "600", "--seed", "10", "--out", p("data.csv")}) == 0 &&
                cli({"bag", "--in", p("data.csv"), "--min", "1", "--max", "8", "--seed", "11", "--out", p("bags.csv")}) == 0;
    std::string detail;
    for (std::string m : {"mle", "amle", "dllp", "supervised"}) {
        // same flags, same output directory: the second run must reproduce
        // the first run's manifest and artifacts
        const auto out = dir / m;
        const std::vector<std::string> args{"train", "--method", m, "--bags", p("bags.csv"), "--epochs", "20",
                                            "--seed", "1", "--test", p("data.csv"), "--out", out.string()};
        const int first = cli(args);
        const auto manifest = slurp(out / "manifest.json"), checkpoint = slurp(out / "checkpoint.json"),
                   curve = without_seconds(slurp(out / "curve.csv"));
        fs::remove_all(out);
        const int second = cli(args);
        const bool same = first == 0 && second == 0 && !checkpoint.empty() && manifest == slurp(out / "manifest.json") &&
                          checkpoint == slurp(out / "checkpoint.json") &&
                          curve == without_seconds(slurp(out / "curve.csv"));
        pass = pass && same;
        detail += m + (same ? " identical; " : " DIFFERENT; ");
    }
    fs::remove_all(dir);
    return {pass, detail + "compared manifest, checkpoint and curve without seconds"};
}

struct Criterion {
    int id;
    const char* name;
    Verdict (*run)();
};

const Criterion kCriteria[] = {
    {1, "Poisson binomial oracle equivalence", pb_equivalence},
    {2, "posterior consistency", posterior_consistency},
    {3, "gradient suite", gradient_suite},
    {4, "EM monotonicity", em_monotonicity},
    {5, "bound tightness", bound_tightness},
    {6, "desk-scale convergence", convergence},
    {7, "epoch efficiency", epoch_efficiency},
    {8, "bag-size degradation", bag_size_degradation},
    {9, "single-instance bag equivalence", single_instance_equivalence},
    {10, "training determinism", determinism},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& ex) {
            v = {false, std::string("threw: ") + ex.what()};
        }
        std::printf("%s  %2d  %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
        std::fflush(stdout);
        failures += !v.pass;
    }
    return failures ? 1 : 0;
}
