#pragma once

// Config and result files. RunSpecs are TOML ([task] / [learner] / [run]
// tables, a [grid] + [axes] pair for grids); results are a CSV series per run
// plus a JSON summary echoing the resolved spec. Output files contain only
// deterministic content, so identical records produce identical bytes;
// timing lives in the RunRecord and is reported on the console instead.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>
#include <toml.hpp>

#include "fade/errors.hpp"
#include "fade/harness.hpp"

namespace fade {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const toml::table* get_table(const toml::table& root, const char* name, bool required) {
    const auto node = root.get(name);
    if (!node) {
        if (required) throw config_error(std::string("config: missing [") + name + "] table");
        return nullptr;
    }
    const toml::table* t = node->as_table();
    if (!t) throw config_error(std::string("config: [") + name + "] is not a table");
    return t;
}

inline void reject_unknown_keys(const toml::table& t, const char* table_name,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : t) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key.str() == a) ok = true;
        if (!ok)
            throw config_error("config: unknown key '" + std::string(key.str()) + "' in [" +
                               table_name + "]");
    }
}

inline double number_at(const toml::table& t, const char* table_name, std::string_view key) {
    const auto node = t.get(key);
    if (const auto f = node->value<double>()) return *f;
    throw config_error("config: key '" + std::string(key) + "' in [" + table_name +
                       "] must be a number");
}

} // namespace detail

inline TaskSpec parse_task_table(const toml::table& t) {
    detail::reject_unknown_keys(t, "task", {"name", "noise_std", "variant"});
    TaskSpec task;
    const auto name = t.get("name") ? t.get("name")->value<std::string>() : std::nullopt;
    if (!name) throw config_error("config: [task] needs a string 'name'");
    if (*name == "linear_tracking")
        task.kind = TaskSpec::Kind::linear_tracking;
    else if (*name == "teacher_student")
        task.kind = TaskSpec::Kind::teacher_student;
    else if (*name == "emnist")
        task.kind = TaskSpec::Kind::emnist;
    else
        throw config_error("config: unknown task '" + *name + "'");
    if (t.contains("noise_std")) {
        if (task.kind != TaskSpec::Kind::linear_tracking)
            throw config_error("config: noise_std only applies to linear_tracking");
        task.noise_std = detail::number_at(t, "task", "noise_std");
    }
    if (t.contains("variant")) {
        if (task.kind != TaskSpec::Kind::emnist)
            throw config_error("config: variant only applies to emnist");
        const auto v = t.get("variant")->value<std::string>();
        if (!v || (*v != "full" && *v != "partial"))
            throw config_error("config: variant must be \"full\" or \"partial\"");
        task.partial = (*v == "partial");
    }
    return task;
}

inline LearnerSpec parse_learner_table(const toml::table& t) {
    LearnerSpec learner;
    const auto name = t.get("name") ? t.get("name")->value<std::string>() : std::nullopt;
    if (!name) throw config_error("config: [learner] needs a string 'name'");
    learner.name = *name;
    for (const auto& [key, value] : t) {
        if (key.str() == "name") continue;
        const auto f = value.value<double>();
        if (!f)
            throw config_error("config: learner key '" + std::string(key.str()) +
                               "' must be a number");
        learner.hp[std::string(key.str())] = *f;
    }
    return learner;
}

inline long default_metric_window(TaskSpec::Kind kind) {
    switch (kind) {
        case TaskSpec::Kind::linear_tracking: return 1000;
        case TaskSpec::Kind::teacher_student: return 10000;
        case TaskSpec::Kind::emnist: return 2500; // one task
    }
    return 1000;
}

inline RunSpec parse_run_spec(const toml::table& root) {
    RunSpec spec;
    spec.task = parse_task_table(*detail::get_table(root, "task", true));
    spec.learner = parse_learner_table(*detail::get_table(root, "learner", true));
    const toml::table& run = *detail::get_table(root, "run", true);
    detail::reject_unknown_keys(run, "run",
                                {"steps", "seed", "metric_window", "summary_tail"});
    if (!run.contains("steps")) throw config_error("config: [run] needs 'steps'");
    spec.steps = run.get("steps")->value<long>().value_or(-1);
    if (spec.steps < 0) throw config_error("config: steps must be a non-negative integer");
    spec.seed = static_cast<std::uint64_t>(run.get("seed") ? run.get("seed")->value<long>().value_or(0) : 0);
    if (run.contains("metric_window"))
        spec.metric_window = run.get("metric_window")->value<long>().value_or(0);
    else
        spec.metric_window = default_metric_window(spec.task.kind);
    if (spec.metric_window <= 0) throw config_error("config: metric_window must be positive");
    if (run.contains("summary_tail"))
        spec.summary_tail = run.get("summary_tail")->value<long>().value_or(-1);
    if (spec.summary_tail < 0) throw config_error("config: summary_tail must be >= 0");
    return spec;
}

inline RunSpec load_run_spec(const std::string& path) {
    try {
        const toml::table root = toml::parse_file(path);
        for (const auto& [key, value] : root) {
            (void)value;
            if (key.str() != "task" && key.str() != "learner" && key.str() != "run")
                throw config_error("config: unknown table [" + std::string(key.str()) + "]");
        }
        return parse_run_spec(root);
    } catch (const toml::parse_error& e) {
        throw config_error("config: cannot parse '" + path + "': " + std::string(e.description()));
    }
}

inline GridSpec load_grid_spec(const std::string& path) {
    try {
        const toml::table root = toml::parse_file(path);
        for (const auto& [key, value] : root) {
            (void)value;
            if (key.str() != "task" && key.str() != "learner" && key.str() != "run" &&
                key.str() != "grid" && key.str() != "axes")
                throw config_error("config: unknown table [" + std::string(key.str()) + "]");
        }
        GridSpec grid;
        grid.base = parse_run_spec(root);
        const toml::table& g = *detail::get_table(root, "grid", true);
        detail::reject_unknown_keys(g, "grid", {"seeds"});
        grid.seeds = static_cast<int>(g.get("seeds") ? g.get("seeds")->value<long>().value_or(1) : 1);
        const toml::table& axes = *detail::get_table(root, "axes", true);
        for (const auto& [key, value] : axes) {
            GridAxis axis;
            axis.key = std::string(key.str());
            const toml::array* arr = value.as_array();
            if (!arr) throw config_error("config: axis '" + axis.key + "' must be an array");
            for (const auto& v : *arr) {
                const auto f = v.value<double>();
                if (!f) throw config_error("config: axis '" + axis.key + "' has a non-number");
                axis.values.push_back(*f);
            }
            grid.axes.push_back(std::move(axis));
        }
        if (grid.axes.empty()) throw config_error("config: [axes] is empty");
        return grid;
    } catch (const toml::parse_error& e) {
        throw config_error("config: cannot parse '" + path + "': " + std::string(e.description()));
    }
}

// ---------------------------------------------------------------------------
// Output writers.
// ---------------------------------------------------------------------------

inline std::string task_name(const TaskSpec& task) {
    switch (task.kind) {
        case TaskSpec::Kind::linear_tracking: return "linear_tracking";
        case TaskSpec::Kind::teacher_student: return "teacher_student";
        case TaskSpec::Kind::emnist: return "emnist";
    }
    return "?";
}

inline void write_series_csv(const RunRecord& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "step," << rec.metric_name;
    for (const auto& g : rec.group_names) out << ",lambda_" << g;
    out << "\n";
    for (std::size_t i = 0; i < rec.window_step.size(); ++i) {
        out << rec.window_step[i] << "," << detail::fmt_double(rec.window_metric[i]);
        for (const auto& series : rec.window_group_lambda)
            out << "," << detail::fmt_double(series[i]);
        out << "\n";
    }
}

inline nlohmann::ordered_json spec_to_json(const RunSpec& spec) {
    nlohmann::ordered_json j;
    j["task"]["name"] = task_name(spec.task);
    if (spec.task.kind == TaskSpec::Kind::linear_tracking)
        j["task"]["noise_std"] = spec.task.noise_std;
    if (spec.task.kind == TaskSpec::Kind::emnist)
        j["task"]["variant"] = spec.task.partial ? "partial" : "full";
    j["learner"]["name"] = spec.learner.name;
    for (const auto& [key, value] : spec.learner.hp) j["learner"][key] = value;
    j["run"]["steps"] = spec.steps;
    j["run"]["seed"] = spec.seed;
    j["run"]["metric_window"] = spec.metric_window;
    j["run"]["summary_tail"] = spec.summary_tail;
    return j;
}

inline nlohmann::ordered_json record_to_json(const RunSpec& spec, const RunRecord& rec) {
    nlohmann::ordered_json j = spec_to_json(spec);
    j["summary"]["metric"] = rec.metric_name;
    if (rec.has_summary) {
        j["summary"]["undefined"] = false;
        j["summary"]["mean"] = rec.metric_mean;
        if (!std::isnan(rec.tail_mean)) j["summary"]["tail_mean"] = rec.tail_mean;
        for (std::size_t g = 0; g < rec.group_names.size(); ++g)
            j["summary"]["final_lambda"][rec.group_names[g]] = rec.final_group_lambda[g];
    } else {
        j["summary"]["undefined"] = true; // zero-step run
    }
    return j;
}

inline void write_summary_json(const RunSpec& spec, const RunRecord& rec,
                               const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << record_to_json(spec, rec).dump(2) << "\n";
}

// CSV + JSON for one run, at <dir>/<stem>.csv and <dir>/<stem>.json.
inline void write_outputs(const RunSpec& spec, const RunRecord& rec, const std::string& dir,
                          const std::string& stem) {
    std::filesystem::create_directories(dir);
    write_series_csv(rec, dir + "/" + stem + ".csv");
    write_summary_json(spec, rec, dir + "/" + stem + ".json");
}

} // namespace fade
