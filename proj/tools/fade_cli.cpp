// Command-line front end over the experiment harness.
//
//   fade run --config spec.toml [--seed N] [--steps N] [--out DIR]
//   fade grid --config grid.toml [--jobs N] [--out DIR]
//   fade reproduce-table1 [--seeds N] [--steps N] [--jobs N] [--out DIR]
//   fade reproduce-nonlinear [--seeds N] [--steps N] [--jobs N] [--out DIR]
//   fade reproduce-emnist [--variant full|partial] [--data-root DIR] ...
//   fade check-oracles
//
// Exit codes: 0 ok, 1 check failure, 2 config error, 3 numeric fault,
// 4 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "fade/io.hpp"
#include "fade/oracle.hpp"
#include "fade/repro.hpp"

namespace {

using namespace fade;

std::string resolve_data_root(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FADE_DATA_ROOT")) return env;
    return {};
}

const EmnistDataset& emnist_data(const std::string& root_flag) {
    static std::optional<EmnistDataset> dataset;
    if (!dataset) {
        const std::string root = resolve_data_root(root_flag);
        if (root.empty())
            throw data_error(
                "no dataset location: pass --data-root or set FADE_DATA_ROOT to the directory "
                "holding the EMNIST Balanced train files");
        dataset = load_emnist_from_root(root);
    }
    return *dataset;
}

std::string run_stem(const RunSpec& spec) {
    return spec.learner.name + "_" + task_name(spec.task) + "_s" + std::to_string(spec.seed);
}

void print_record_line(const RunSpec& spec, const RunRecord& rec) {
    std::printf("%-12s %-16s seed=%-4llu steps=%-9ld %s=%.6f", spec.learner.name.c_str(),
                task_name(spec.task).c_str(), static_cast<unsigned long long>(spec.seed),
                rec.steps, rec.metric_name.c_str(), rec.metric_mean);
    if (!std::isnan(rec.tail_mean)) std::printf(" tail=%.6f", rec.tail_mean);
    std::printf(" (%.2fs, %.0f steps/s)\n", rec.wall_seconds, rec.steps_per_sec);
}

int cmd_run(const std::string& config, std::optional<long> seed, std::optional<long> steps,
            const std::string& out_dir, const std::string& data_root) {
    RunSpec spec = load_run_spec(config);
    if (seed) spec.seed = static_cast<std::uint64_t>(*seed);
    if (steps) {
        spec.steps = *steps;
        if (spec.summary_tail > spec.steps) {
            std::fprintf(stderr, "note: clamping summary_tail to the reduced %ld steps\n",
                         spec.steps);
            spec.summary_tail = spec.steps;
        }
    }
    const EmnistDataset* data =
        spec.task.kind == TaskSpec::Kind::emnist ? &emnist_data(data_root) : nullptr;
    const RunRecord rec = run_experiment(spec, data);
    print_record_line(spec, rec);
    if (!rec.has_summary) std::fprintf(stderr, "warning: zero-step run, summary undefined\n");
    write_outputs(spec, rec, out_dir, run_stem(spec));
    std::printf("wrote %s/%s.{csv,json}\n", out_dir.c_str(), run_stem(spec).c_str());
    return 0;
}

int cmd_grid(const std::string& config, std::optional<long> seeds, std::optional<long> steps,
             int jobs, const std::string& out_dir, const std::string& data_root) {
    GridSpec grid = load_grid_spec(config);
    if (seeds) grid.seeds = static_cast<int>(*seeds);
    if (steps) grid.base.steps = *steps;
    const EmnistDataset* data =
        grid.base.task.kind == TaskSpec::Kind::emnist ? &emnist_data(data_root) : nullptr;
    const GridResult result = grid_search(grid, jobs, data);

    std::printf("%-6s %-12s %-12s assignment\n", "rank", "mean", "std");
    nlohmann::ordered_json jcells = nlohmann::ordered_json::array();
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/grid_results.csv", std::ios::binary);
    csv << "rank,mean,std";
    for (const auto& axis : grid.axes) csv << "," << axis.key;
    csv << "\n";
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& cell = result.cells[i];
        std::string assign;
        for (const auto& [k, v] : cell.assignment)
            assign += k + "=" + std::to_string(v) + " ";
        if (cell.faults > 0)
            std::printf("%-6zu %-12s %-12s %s(diverged %d/%d seeds)\n", i + 1, "-", "-",
                        assign.c_str(), cell.faults, grid.seeds);
        else
            std::printf("%-6zu %-12.6g %-12.6g %s\n", i + 1, cell.summary.mean,
                        cell.summary.stddev, assign.c_str());
        csv << (i + 1) << "," << detail::fmt_double(cell.summary.mean) << ","
            << detail::fmt_double(cell.summary.stddev);
        for (const auto& axis : grid.axes) csv << "," << detail::fmt_double(cell.assignment.at(axis.key));
        csv << "\n";
        nlohmann::ordered_json jc;
        for (const auto& [k, v] : cell.assignment) jc["assignment"][k] = v;
        jc["mean"] = cell.summary.mean;
        jc["std"] = cell.summary.stddev;
        jc["per_seed"] = cell.summary.values;
        jcells.push_back(jc);
    }
    std::ofstream js(out_dir + "/grid_results.json", std::ios::binary);
    js << nlohmann::ordered_json{{"metric", result.metric_name},
                                 {"higher_is_better", result.higher_is_better},
                                 {"cells", jcells}}
              .dump(2)
       << "\n";
    std::printf("wrote %s/grid_results.{csv,json}\n", out_dir.c_str());
    return 0;
}

int cmd_reproduce_table1(int seeds, long steps, int jobs, const std::string& out_dir) {
    std::printf("linear tracking, %ld steps, %d seeds per cell\n", steps, seeds);
    std::printf("%-12s %-8s %-12s %-10s %-12s\n", "method", "noise", "mse", "std",
                "reference");
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& cell : repro::table1_cells()) {
        RunSpec spec;
        spec.task.kind = TaskSpec::Kind::linear_tracking;
        spec.task.noise_std = cell.noise_std;
        spec.learner = cell.learner;
        spec.steps = steps;
        spec.seed = 0;
        spec.metric_window = 1000;
        const auto agg = run_seeds(spec, seeds, jobs);
        std::printf("%-12s %-8.1f %-12.4f %-10.4f %.3f +- %.3f\n", cell.method.c_str(),
                    cell.noise_std, agg.mean, agg.stddev, cell.ref_mean, cell.ref_std);
        nlohmann::ordered_json row;
        row["method"] = cell.method;
        row["noise_std"] = cell.noise_std;
        row["mse_mean"] = agg.mean;
        row["mse_std"] = agg.stddev;
        row["per_seed"] = agg.values;
        row["reference_mean"] = cell.ref_mean;
        row["reference_std"] = cell.ref_std;
        rows.push_back(row);
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream js(out_dir + "/table1.json", std::ios::binary);
    js << rows.dump(2) << "\n";
    std::printf("wrote %s/table1.json\n", out_dir.c_str());
    return 0;
}

int cmd_reproduce_nonlinear(int seeds, long steps, int jobs, const std::string& out_dir) {
    std::printf("teacher-student tracking, %ld steps, %d seeds (summary over final 25%%)\n",
                steps, seeds);
    const long tail = steps / 4;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& preset : repro::nonlinear_presets()) {
        RunSpec spec;
        spec.task.kind = TaskSpec::Kind::teacher_student;
        spec.learner = preset.learner;
        spec.steps = steps;
        spec.metric_window = 10000;
        spec.summary_tail = tail;
        std::vector<RunRecord> records;
        const auto agg = run_seeds(spec, seeds, jobs, nullptr, &records);
        std::printf("%-12s mse=%.5f +- %.5f (full-scale reference %.4f)\n",
                    preset.method.c_str(), agg.mean, agg.stddev, preset.ref_value);
        write_outputs(spec, records[0], out_dir, preset.method + "_teacher_student_s0");
        nlohmann::ordered_json row;
        row["method"] = preset.method;
        row["mse_tail_mean"] = agg.mean;
        row["mse_tail_std"] = agg.stddev;
        row["per_seed"] = agg.values;
        row["reference_full_scale"] = preset.ref_value;
        rows.push_back(row);
    }
    std::ofstream js(out_dir + "/nonlinear.json", std::ios::binary);
    js << rows.dump(2) << "\n";
    std::printf("wrote %s/nonlinear.json\n", out_dir.c_str());
    return 0;
}

int cmd_reproduce_emnist(const std::string& variant, int seeds, long steps, int jobs,
                         const std::string& out_dir, const std::string& data_root) {
    const EmnistDataset& data = emnist_data(data_root);
    const bool partial = variant == "partial";
    std::printf("label-permuted EMNIST (%s), %ld steps, %d seeds\n", variant.c_str(), steps,
                seeds);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& preset : repro::emnist_presets()) {
        RunSpec spec;
        spec.task.kind = TaskSpec::Kind::emnist;
        spec.task.partial = partial;
        spec.learner = preset.learner;
        spec.steps = steps;
        spec.metric_window = 2500;
        std::vector<RunRecord> records;
        const auto agg = run_seeds(spec, seeds, jobs, &data, &records);
        std::printf("%-12s accuracy=%.4f +- %.4f (full-scale full-permutation reference %.3f)\n",
                    preset.method.c_str(), agg.mean, agg.stddev, preset.ref_value);
        write_outputs(spec, records[0], out_dir,
                      preset.method + "_emnist_" + variant + "_s0");
        nlohmann::ordered_json row;
        row["method"] = preset.method;
        row["accuracy_mean"] = agg.mean;
        row["accuracy_std"] = agg.stddev;
        row["per_seed"] = agg.values;
        rows.push_back(row);
    }
    std::ofstream js(out_dir + "/emnist_" + variant + ".json", std::ios::binary);
    js << rows.dump(2) << "\n";
    std::printf("wrote %s/emnist_%s.json\n", out_dir.c_str(), variant.c_str());
    return 0;
}

int cmd_check_oracles() {
    using namespace fade::oracle;
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        std::printf("%-60s %s\n", name, ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    // Sensitivity probes: 100 valid random probes under 1e-6 relative error.
    {
        int valid = 0, under = 0;
        std::uint64_t seed = 0;
        while (valid < 100 && seed < 1000) {
            SensitivityProbe probe;
            probe.seed = seed++;
            probe.horizon = 50;
            probe.alpha = 0.05;
            probe.gamma0 = -2.3;
            const auto rep = finite_diff_sensitivity(probe);
            if (!rep.valid) continue;
            ++valid;
            if (rep.rel_err < 1e-6) ++under;
        }
        report("sensitivity trace vs finite difference (100 probes)", valid == 100 && under == valid);
    }

    // Replay interpreters, bitwise.
    MetaHyper hp;
    hp.alpha = 0.05;
    hp.theta_alpha = 0.01;
    hp.theta_lambda = 0.01;
    hp.beta0 = -4.6;
    hp.gamma0 = -2.3;
    report("replay interpreter: fade", replay_trace_check(Rule::fade, 20, 1000, hp, 1).bitwise_equal);
    report("replay interpreter: idbd", replay_trace_check(Rule::idbd, 20, 1000, hp, 2).bitwise_equal);
    report("replay interpreter: idbd_wd",
           replay_trace_check(Rule::idbd_wd, 20, 1000, hp, 3, 0.01).bitwise_equal);
    report("replay interpreter: fade_idbd",
           replay_trace_check(Rule::fade_idbd, 20, 1000, hp, 4).bitwise_equal);
    report("replay interpreter: coupled",
           replay_trace_check(Rule::coupled, 20, 1000, hp, 5).bitwise_equal);

    // Central differences on a known curved function.
    {
        auto f = [](std::span<const double> p) { return std::sin(p[0]) * p[1] * p[1]; };
        std::vector<double> at{0.4, -1.1};
        const auto g = numerical_gradient(f, at, 1e-6);
        const bool ok = std::abs(g[0] - std::cos(0.4) * 1.21) < 1e-8 &&
                        std::abs(g[1] - std::sin(0.4) * -2.2) < 1e-8;
        report("central-difference gradient", ok);
    }

    std::printf(failures == 0 ? "all oracle checks passed\n"
                              : "%d oracle check(s) FAILED\n",
                failures);
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FADE: online per-parameter weight-decay adaptation benchmark harness"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", data_root, variant = "full";
    std::optional<long> seed, seeds_opt, steps_opt;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    auto add_common = [&](CLI::App* cmd, bool with_data_root) {
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->add_option("--jobs", jobs, "parallel runs")->capture_default_str();
        if (with_data_root)
            cmd->add_option("--data-root", data_root,
                            "directory with the EMNIST files (or FADE_DATA_ROOT)");
    };

    auto* run = app.add_subcommand("run", "execute one run spec");
    run->add_option("--config", config, "run spec TOML")->required();
    run->add_option("--seed", seed, "seed override");
    run->add_option("--steps", steps_opt, "step-count override");
    add_common(run, true);

    auto* grid = app.add_subcommand("grid", "execute a hyperparameter grid");
    grid->add_option("--config", config, "grid spec TOML")->required();
    grid->add_option("--seeds", seeds_opt, "seeds per cell override");
    grid->add_option("--steps", steps_opt, "step-count override");
    add_common(grid, true);

    auto* t1 = app.add_subcommand("reproduce-table1",
                                  "linear-tracking summary, all six methods at both noise levels");
    t1->add_option("--seeds", seeds_opt, "seeds per cell (default 10)");
    t1->add_option("--steps", steps_opt, "steps per run (default 200000)");
    add_common(t1, false);

    auto* nl = app.add_subcommand("reproduce-nonlinear",
                                  "teacher-student tracking, all six methods");
    nl->add_option("--seeds", seeds_opt, "seeds per cell (default 5)");
    nl->add_option("--steps", steps_opt, "steps per run (default 2000000)");
    add_common(nl, false);

    auto* em = app.add_subcommand("reproduce-emnist",
                                  "label-permuted EMNIST, all seven methods");
    em->add_option("--variant", variant, "full|partial")
        ->check(CLI::IsMember({"full", "partial"}));
    em->add_option("--seeds", seeds_opt, "seeds per cell (default 5)");
    em->add_option("--steps", steps_opt, "steps per run (default 5000000)");
    add_common(em, true);

    app.add_subcommand("check-oracles", "run the oracle validation suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config, seed, steps_opt, out_dir, data_root);
        if (grid->parsed()) return cmd_grid(config, seeds_opt, steps_opt, jobs, out_dir, data_root);
        if (t1->parsed())
            return cmd_reproduce_table1(static_cast<int>(seeds_opt.value_or(10)),
                                        steps_opt.value_or(200000), jobs, out_dir);
        if (nl->parsed())
            return cmd_reproduce_nonlinear(static_cast<int>(seeds_opt.value_or(5)),
                                           steps_opt.value_or(2000000), jobs, out_dir);
        if (em->parsed())
            return cmd_reproduce_emnist(variant, static_cast<int>(seeds_opt.value_or(5)),
                                        steps_opt.value_or(5000000), jobs, out_dir, data_root);
        return cmd_check_oracles();
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric fault: %s\n", e.what());
        return 3;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 4;
    }
}
