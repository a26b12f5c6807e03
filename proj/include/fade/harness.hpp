#pragma once

// Declarative experiment runner. A RunSpec names a task, a learner with its
// hyperparameters, a step budget, a seed and a metric window; run_experiment
// builds both sides, drives the online loop (sample -> predict -> score ->
// update), and returns a RunRecord with the windowed metric series, per-group
// decay-rate averages where the learner adapts decay, and full-resolution
// summary means. Grids enumerate a cartesian product of learner axes and
// aggregate across seeds.
//
// Seed policy: a batch run with index i uses seed = spec.seed + i; inside a
// run, the task structure, learner initialization, and per-step stream draw
// from derive_seed(seed, role) with the roles defined in rng.hpp. Everything
// downstream is bit-determined by (RunSpec, seed).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fade/errors.hpp"
#include "fade/learners.hpp"
#include "fade/tasks.hpp"

namespace fade {

struct TaskSpec {
    enum class Kind { linear_tracking, teacher_student, emnist };
    Kind kind = Kind::linear_tracking;
    double noise_std = 0.0; // linear tracking
    bool partial = false;   // emnist: partial label permutation
};

struct LearnerSpec {
    std::string name;
    std::map<std::string, double> hp;
};

struct RunSpec {
    TaskSpec task;
    LearnerSpec learner;
    long steps = 0;
    std::uint64_t seed = 0;
    long metric_window = 1000;
    long summary_tail = 0; // >0: also average the final `summary_tail` steps
};

struct ParamGroup {
    std::string name;
    std::vector<int> indices; // weight indices (linear) or head rows (nets)
};

struct RunRecord {
    std::vector<long> window_step; // 1-based step count at the end of each window
    std::vector<double> window_metric;
    std::vector<std::string> group_names;
    std::vector<std::vector<double>> window_group_lambda; // [group][window]
    std::vector<double> final_group_lambda;

    std::string metric_name; // "mse" or "online_accuracy"
    bool has_summary = false;
    double metric_mean = std::numeric_limits<double>::quiet_NaN();
    double tail_mean = std::numeric_limits<double>::quiet_NaN();
    long steps = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    double steps_per_sec = 0.0;
};

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

struct MetricSeries {
    std::vector<double> window_means;
    double lifetime_mean = std::numeric_limits<double>::quiet_NaN();
};

// Windowed means plus the full-resolution lifetime mean (never the mean of
// the windowed points). A trailing partial window is averaged over its
// actual length.
inline MetricSeries compute_metrics(std::span<const double> values, long window) {
    if (window <= 0) throw config_error("compute_metrics: window must be positive");
    MetricSeries out;
    long double total = 0.0L, acc = 0.0L;
    long in_window = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total += values[i];
        acc += values[i];
        if (++in_window == window) {
            out.window_means.push_back(static_cast<double>(acc / in_window));
            acc = 0.0L;
            in_window = 0;
        }
    }
    if (in_window > 0) out.window_means.push_back(static_cast<double>(acc / in_window));
    if (!values.empty()) out.lifetime_mean = static_cast<double>(total / values.size());
    return out;
}

// Mean decay rate per declared group.
inline std::vector<double> lambda_group_probe(const OnlineLearner& learner,
                                              const std::vector<ParamGroup>& groups) {
    std::vector<double> means;
    means.reserve(groups.size());
    for (const auto& g : groups) means.push_back(learner.lambda_group_mean(g.indices));
    return means;
}

// Pre-update score of a prediction: squared error (mean over outputs) for
// regression tasks, 0/1 correctness of the arg-max class for classification.
inline double score_prediction(const Eigen::VectorXd& pred, const StreamSample& sample,
                               TaskSpec::Kind kind) {
    if (kind == TaskSpec::Kind::emnist) {
        if (sample.label < 0 || sample.label >= pred.size())
            throw data_error("label " + std::to_string(sample.label) + " out of range");
        Eigen::Index argmax = 0;
        pred.maxCoeff(&argmax);
        return argmax == sample.label ? 1.0 : 0.0;
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        const double d = sample.y[k] - pred[k];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// The online loop. Templated over the task so tests can drive it with mocks.
// ---------------------------------------------------------------------------

template <typename Task>
RunRecord run_loop(Task& task, OnlineLearner& learner, const RunSpec& spec,
                   const std::vector<ParamGroup>& groups) {
    if (spec.steps < 0) throw config_error("run_loop: negative step count");
    if (spec.metric_window <= 0) throw config_error("run_loop: metric window must be positive");
    if (spec.summary_tail < 0 || spec.summary_tail > spec.steps)
        throw config_error("run_loop: summary_tail out of range");

    RunRecord rec;
    rec.steps = spec.steps;
    rec.seed = spec.seed;
    rec.metric_name =
        (spec.task.kind == TaskSpec::Kind::emnist) ? "online_accuracy" : "mse";
    const bool probe_lambda = learner.adaptive_decay() && !groups.empty();
    if (probe_lambda) {
        for (const auto& g : groups) rec.group_names.push_back(g.name);
        rec.window_group_lambda.resize(groups.size());
    }
    if (spec.steps == 0) return rec; // empty series; summary flagged undefined

    const auto t_begin = std::chrono::steady_clock::now();
    long double total = 0.0L, window_acc = 0.0L, tail_acc = 0.0L;
    long in_window = 0;
    const long tail_from = spec.steps - spec.summary_tail;
    for (long t = 0; t < spec.steps; ++t) {
        const StreamSample& sample = task.next();
        double metric;
        try {
            const Eigen::VectorXd& pred = learner.predict(sample.x);
            metric = score_prediction(pred, sample, spec.task.kind);
            if (!std::isfinite(metric)) throw numeric_error("non-finite prediction");
            learner.update(sample);
        } catch (const numeric_error& e) {
            throw numeric_error("step " + std::to_string(t) + ": " + e.what() +
                                "\nlearner state:\n" + learner.state_dump());
        }
        total += metric;
        window_acc += metric;
        if (spec.summary_tail > 0 && t >= tail_from) tail_acc += metric;
        if (++in_window == spec.metric_window || t + 1 == spec.steps) {
            rec.window_step.push_back(t + 1);
            rec.window_metric.push_back(static_cast<double>(window_acc / in_window));
            if (probe_lambda) {
                const auto means = lambda_group_probe(learner, groups);
                for (std::size_t gi = 0; gi < groups.size(); ++gi)
                    rec.window_group_lambda[gi].push_back(means[gi]);
            }
            window_acc = 0.0L;
            in_window = 0;
        }
    }
    const auto t_end = std::chrono::steady_clock::now();

    rec.has_summary = true;
    rec.metric_mean = static_cast<double>(total / spec.steps);
    if (spec.summary_tail > 0)
        rec.tail_mean = static_cast<double>(tail_acc / spec.summary_tail);
    if (probe_lambda) rec.final_group_lambda = lambda_group_probe(learner, groups);
    rec.wall_seconds = std::chrono::duration<double>(t_end - t_begin).count();
    rec.steps_per_sec = rec.wall_seconds > 0 ? spec.steps / rec.wall_seconds : 0.0;
    return rec;
}

// ---------------------------------------------------------------------------
// Learner construction and validation.
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_keys(const LearnerSpec& spec, const std::vector<std::string>& required) {
    for (const auto& key : required)
        if (!spec.hp.count(key))
            throw config_error("learner '" + spec.name + "' needs hyperparameter '" + key + "'");
    for (const auto& [key, value] : spec.hp) {
        (void)value;
        if (std::find(required.begin(), required.end(), key) == required.end())
            throw config_error("learner '" + spec.name + "' does not take key '" + key + "'");
    }
}

inline double get(const LearnerSpec& spec, const std::string& key) { return spec.hp.at(key); }

inline std::unique_ptr<OnlineLearner> build_linear_learner(const LearnerSpec& spec, int dim) {
    const std::string& n = spec.name;
    if (n == "sgd") {
        validate_keys(spec, {"alpha"});
        return std::make_unique<LinearSgdLearner>(dim, get(spec, "alpha"), 0.0);
    }
    if (n == "sgd_wd") {
        validate_keys(spec, {"alpha", "lambda"});
        return std::make_unique<LinearSgdLearner>(dim, get(spec, "alpha"), get(spec, "lambda"));
    }
    if (n == "idbd") {
        validate_keys(spec, {"theta_alpha", "beta0"});
        MetaHyper hp;
        hp.theta_alpha = get(spec, "theta_alpha");
        hp.beta0 = get(spec, "beta0");
        return std::make_unique<LinearIdbdLearner>(dim, hp, false, 0.0);
    }
    if (n == "idbd_wd") {
        validate_keys(spec, {"theta_alpha", "beta0", "lambda"});
        MetaHyper hp;
        hp.theta_alpha = get(spec, "theta_alpha");
        hp.beta0 = get(spec, "beta0");
        return std::make_unique<LinearIdbdLearner>(dim, hp, true, get(spec, "lambda"));
    }
    if (n == "fade") {
        validate_keys(spec, {"alpha", "theta_lambda", "gamma0"});
        MetaHyper hp;
        hp.alpha = get(spec, "alpha");
        hp.theta_lambda = get(spec, "theta_lambda");
        hp.gamma0 = get(spec, "gamma0");
        return std::make_unique<LinearFadeLearner>(dim, hp);
    }
    if (n == "fade_idbd" || n == "coupled") {
        validate_keys(spec, {"theta_alpha", "theta_lambda", "beta0", "gamma0"});
        MetaHyper hp;
        hp.theta_alpha = get(spec, "theta_alpha");
        hp.theta_lambda = get(spec, "theta_lambda");
        hp.beta0 = get(spec, "beta0");
        hp.gamma0 = get(spec, "gamma0");
        return std::make_unique<LinearFadeIdbdLearner>(dim, hp, n == "coupled");
    }
    throw config_error("unknown linear-task learner '" + n + "'");
}

inline std::unique_ptr<OnlineLearner> build_net_learner(const LearnerSpec& spec,
                                                        const std::vector<int>& shape,
                                                        Activation act, NetLoss loss,
                                                        std::uint64_t init_seed) {
    const std::string& n = spec.name;
    NetBaselineConfig cfg;
    cfg.shape = shape;
    cfg.activation = act;
    cfg.loss = loss;
    if (n == "sgd") {
        validate_keys(spec, {"alpha"});
        cfg.alpha = get(spec, "alpha");
        return std::make_unique<NetBaselineLearner>(cfg, init_seed);
    }
    if (n == "sgd_wd") {
        validate_keys(spec, {"alpha", "lambda"});
        cfg.alpha = get(spec, "alpha");
        cfg.decay = get(spec, "lambda");
        return std::make_unique<NetBaselineLearner>(cfg, init_seed);
    }
    if (n == "sgd_wclip") {
        validate_keys(spec, {"alpha", "kappa"});
        cfg.alpha = get(spec, "alpha");
        cfg.clip = true;
        cfg.kappa = get(spec, "kappa");
        return std::make_unique<NetBaselineLearner>(cfg, init_seed);
    }
    if (n == "adam") {
        validate_keys(spec, {"alpha"});
        cfg.use_adam = true;
        cfg.alpha = get(spec, "alpha");
        return std::make_unique<NetBaselineLearner>(cfg, init_seed);
    }
    if (n == "adamw") {
        // Decoupled decay scaled by the step size (the framework convention
        // the reference results were produced with): shrink = alpha * lambda.
        validate_keys(spec, {"alpha", "lambda"});
        cfg.use_adam = true;
        cfg.alpha = get(spec, "alpha");
        cfg.decay = get(spec, "alpha") * get(spec, "lambda");
        return std::make_unique<NetBaselineLearner>(cfg, init_seed);
    }
    if (n == "fade_sgd" || n == "fade_adam") {
        validate_keys(spec, {"alpha", "theta_lambda", "gamma0"});
        NetFadeConfig fcfg;
        fcfg.shape = shape;
        fcfg.activation = act;
        fcfg.loss = loss;
        fcfg.adam_base = (n == "fade_adam");
        fcfg.alpha = get(spec, "alpha");
        fcfg.theta_lambda = get(spec, "theta_lambda");
        fcfg.gamma0 = get(spec, "gamma0");
        return std::make_unique<NetFadeLearner>(fcfg, init_seed);
    }
    throw config_error("unknown network-task learner '" + n + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// run_experiment.
// ---------------------------------------------------------------------------

inline RunRecord run_experiment(const RunSpec& spec, const EmnistDataset* data = nullptr) {
    const std::uint64_t learner_seed = derive_seed(spec.seed, seed_role_learner_init);
    switch (spec.task.kind) {
        case TaskSpec::Kind::linear_tracking: {
            LinearTrackingTask task(spec.seed, spec.task.noise_std);
            auto learner = detail::build_linear_learner(spec.learner, LinearTrackingTask::dim);
            std::vector<ParamGroup> groups;
            ParamGroup rel{"relevant", task.relevant_indices()};
            ParamGroup irr{"irrelevant", {}};
            for (int i = 0; i < LinearTrackingTask::dim; ++i)
                if (std::find(rel.indices.begin(), rel.indices.end(), i) == rel.indices.end())
                    irr.indices.push_back(i);
            groups.push_back(std::move(rel));
            groups.push_back(std::move(irr));
            return run_loop(task, *learner, spec, groups);
        }
        case TaskSpec::Kind::teacher_student: {
            TeacherStudentTask task(spec.seed);
            auto learner = detail::build_net_learner(
                spec.learner,
                {TeacherStudentTask::in_dim, TeacherStudentTask::hidden_dim,
                 TeacherStudentTask::out_dim},
                Activation::relu, NetLoss::mse, learner_seed);
            std::vector<ParamGroup> groups{{"fast", task.fast_rows()},
                                           {"slow", task.slow_rows()},
                                           {"stable", task.stable_rows()}};
            return run_loop(task, *learner, spec, groups);
        }
        case TaskSpec::Kind::emnist: {
            if (data == nullptr)
                throw data_error("emnist task needs a dataset (set --data-root or FADE_DATA_ROOT)");
            EmnistStream task(data, spec.seed, spec.task.partial);
            auto learner = detail::build_net_learner(
                spec.learner, {data->images.pixels_per_image(), 300, 150, data->num_classes},
                Activation::leaky_relu, NetLoss::cross_entropy, learner_seed);
            return run_loop(task, *learner, spec, {});
        }
    }
    throw config_error("run_experiment: unknown task kind");
}

// ---------------------------------------------------------------------------
// Parallel execution across independent runs.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_runs(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(n));
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Summary statistic of one run: the tail mean when a tail is configured.
inline double run_summary_value(const RunRecord& rec) {
    return rec.steps > 0 && !std::isnan(rec.tail_mean) ? rec.tail_mean : rec.metric_mean;
}

struct SeedAggregate {
    std::vector<double> values;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = 0.0; // sample standard deviation across seeds
    double sem = 0.0;    // standard error of the mean
};

inline SeedAggregate aggregate_seeds(std::vector<double> values) {
    SeedAggregate a;
    a.values = std::move(values);
    if (a.values.empty()) return a;
    long double sum = 0.0L;
    for (double v : a.values) sum += v;
    a.mean = static_cast<double>(sum / a.values.size());
    if (a.values.size() > 1) {
        long double ss = 0.0L;
        for (double v : a.values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(static_cast<double>(ss / (a.values.size() - 1)));
        a.sem = a.stddev / std::sqrt(static_cast<double>(a.values.size()));
    }
    return a;
}

// Runs `seeds` replicates of `spec` (seed, seed+1, ...) and aggregates their
// summary values.
inline SeedAggregate run_seeds(const RunSpec& spec, int seeds, int jobs,
                               const EmnistDataset* data = nullptr,
                               std::vector<RunRecord>* records_out = nullptr) {
    std::vector<RunRecord> records(static_cast<std::size_t>(seeds));
    parallel_runs(static_cast<std::size_t>(seeds), jobs, [&](std::size_t i) {
        RunSpec rs = spec;
        rs.seed = spec.seed + i;
        records[i] = run_experiment(rs, data);
    });
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(run_summary_value(r));
    if (records_out) *records_out = std::move(records);
    return aggregate_seeds(std::move(values));
}

// ---------------------------------------------------------------------------
// Grid search.
// ---------------------------------------------------------------------------

struct GridAxis {
    std::string key;
    std::vector<double> values;
};

struct GridSpec {
    RunSpec base;
    std::vector<GridAxis> axes;
    int seeds = 1;
};

struct GridCell {
    std::map<std::string, double> assignment;
    SeedAggregate summary;
    int faults = 0; // seeds that aborted with a numeric fault (cell ranks last)
};

struct GridResult {
    std::vector<GridCell> cells; // ranked, best first
    bool higher_is_better = false;
    std::string metric_name;
};

inline GridResult grid_search(const GridSpec& grid, int jobs,
                              const EmnistDataset* data = nullptr) {
    if (grid.seeds < 1) throw config_error("grid_search: seeds must be >= 1");
    std::size_t n_cells = 1;
    for (const auto& axis : grid.axes) {
        if (axis.values.empty()) throw config_error("grid axis '" + axis.key + "' is empty");
        n_cells *= axis.values.size();
    }

    std::vector<std::map<std::string, double>> assignments(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        std::size_t rem = c;
        for (const auto& axis : grid.axes) {
            assignments[c][axis.key] = axis.values[rem % axis.values.size()];
            rem /= axis.values.size();
        }
    }

    // A cell whose run diverges is data, not an error: it keeps its slot and
    // ranks behind every finite cell.
    const std::size_t total = n_cells * static_cast<std::size_t>(grid.seeds);
    std::vector<double> summaries(total);
    std::vector<char> faulted(total, 0);
    parallel_runs(total, jobs, [&](std::size_t i) {
        const std::size_t cell = i / grid.seeds;
        const std::size_t s = i % grid.seeds;
        RunSpec rs = grid.base;
        for (const auto& [key, value] : assignments[cell]) rs.learner.hp[key] = value;
        rs.seed = grid.base.seed + s;
        try {
            summaries[i] = run_summary_value(run_experiment(rs, data));
        } catch (const numeric_error&) {
            summaries[i] = std::numeric_limits<double>::quiet_NaN();
            faulted[i] = 1;
        }
    });

    GridResult result;
    result.higher_is_better = (grid.base.task.kind == TaskSpec::Kind::emnist);
    result.metric_name =
        result.higher_is_better ? "online_accuracy" : "mse";
    result.cells.resize(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        result.cells[c].assignment = assignments[c];
        std::vector<double> vals(summaries.begin() + c * grid.seeds,
                                 summaries.begin() + (c + 1) * grid.seeds);
        result.cells[c].summary = aggregate_seeds(std::move(vals));
        for (int s = 0; s < grid.seeds; ++s) result.cells[c].faults += faulted[c * grid.seeds + s];
        if (result.cells[c].faults > 0)
            result.cells[c].summary.mean = std::numeric_limits<double>::quiet_NaN();
    }
    const auto rank_key = [&](const GridCell& cell) {
        if (std::isnan(cell.summary.mean))
            return result.higher_is_better ? -std::numeric_limits<double>::infinity()
                                           : std::numeric_limits<double>::infinity();
        return cell.summary.mean;
    };
    std::stable_sort(result.cells.begin(), result.cells.end(),
                     [&](const GridCell& a, const GridCell& b) {
                         return result.higher_is_better ? rank_key(a) > rank_key(b)
                                                        : rank_key(a) < rank_key(b);
                     });
    return result;
}

} // namespace fade
