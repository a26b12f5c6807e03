#pragma once

// Pinned benchmark configurations: the selected hyperparameters for every
// method on the three streams, plus the reference means and standard
// deviations the linear-tracking summary is checked against. Used by the
// reproduce-* CLI subcommands and the acceptance suite so both always run
// the same settings.

#include <string>
#include <vector>

#include "fade/harness.hpp"

namespace fade::repro {

struct Table1Cell {
    std::string method;
    double noise_std;
    LearnerSpec learner;
    double ref_mean; // reference lifetime MSE
    double ref_std;  // reference across-seed standard deviation
};

inline std::vector<Table1Cell> table1_cells() {
    return {
        {"sgd", 0.0, {"sgd", {{"alpha", 0.05}}}, 3.628, 0.021},
        {"sgd_wd", 0.0, {"sgd_wd", {{"alpha", 0.05}, {"lambda", 0.05}}}, 2.726, 0.008},
        {"idbd", 0.0, {"idbd", {{"theta_alpha", 0.005}, {"beta0", -4.6}}}, 1.486, 0.007},
        {"idbd_wd", 0.0,
         {"idbd_wd", {{"theta_alpha", 0.01}, {"beta0", -4.6}, {"lambda", 0.01}}},
         1.301, 0.006},
        {"fade", 0.0,
         {"fade", {{"alpha", 0.1}, {"theta_lambda", 0.01}, {"gamma0", -1.2}}},
         1.653, 0.009},
        {"fade_idbd", 0.0,
         {"fade_idbd",
          {{"theta_alpha", 0.01}, {"theta_lambda", 0.01}, {"beta0", -4.6}, {"gamma0", -2.3}}},
         1.246, 0.006},
        {"sgd", 1.0, {"sgd", {{"alpha", 0.01}}}, 5.119, 0.026},
        {"sgd_wd", 1.0, {"sgd_wd", {{"alpha", 0.05}, {"lambda", 0.05}}}, 4.087, 0.012},
        {"idbd", 1.0, {"idbd", {{"theta_alpha", 0.01}, {"beta0", -5.3}}}, 2.937, 0.011},
        {"idbd_wd", 1.0,
         {"idbd_wd", {{"theta_alpha", 0.01}, {"beta0", -4.6}, {"lambda", 0.01}}},
         2.718, 0.010},
        {"fade", 1.0,
         {"fade", {{"alpha", 0.05}, {"theta_lambda", 0.01}, {"gamma0", -1.2}}},
         3.044, 0.011},
        {"fade_idbd", 1.0,
         {"fade_idbd",
          {{"theta_alpha", 0.01}, {"theta_lambda", 0.01}, {"beta0", -4.6}, {"gamma0", -2.3}}},
         2.646, 0.009},
    };
}

// Reference coupled-variant results (best grid cell).
constexpr double coupled_ref_mean_noise0 = 1.270;
constexpr double coupled_ref_mean_noise1 = 2.670;

// Search grid for the coupled variant (no single selected setting).
inline GridSpec coupled_grid(double noise_std, long steps, int seeds) {
    GridSpec grid;
    grid.base.task.kind = TaskSpec::Kind::linear_tracking;
    grid.base.task.noise_std = noise_std;
    grid.base.learner.name = "coupled";
    grid.base.learner.hp = {
        {"theta_alpha", 0.01}, {"theta_lambda", 0.01}, {"beta0", -4.6}, {"gamma0", -2.3}};
    grid.base.steps = steps;
    grid.base.seed = 0;
    grid.base.metric_window = 1000;
    grid.axes = {
        {"theta_alpha", {0.1, 0.05, 0.01, 0.005}},
        {"theta_lambda", {0.1, 0.05, 0.01, 0.005}},
        {"beta0", {-0.7, -2.3, -3.0, -4.6, -5.3}},
        {"gamma0", {-0.7, -1.2, -2.3, -4.6}},
    };
    grid.seeds = seeds;
    return grid;
}

// Tied meta step sizes: keep theta_alpha == theta_lambda cells only.
inline GridResult coupled_grid_search_tied(double noise_std, long steps, int seeds, int jobs) {
    GridSpec grid = coupled_grid(noise_std, steps, seeds);
    // Collapse the two theta axes into one by enumerating tied values.
    GridSpec tied;
    tied.base = grid.base;
    tied.seeds = seeds;
    tied.axes = {grid.axes[2], grid.axes[3]}; // beta0, gamma0
    GridResult merged;
    merged.higher_is_better = false;
    merged.metric_name = "mse";
    for (double theta : grid.axes[0].values) {
        GridSpec cell = tied;
        cell.base.learner.hp["theta_alpha"] = theta;
        cell.base.learner.hp["theta_lambda"] = theta;
        GridResult part = grid_search(cell, jobs);
        for (auto& c : part.cells) {
            c.assignment["theta"] = theta;
            merged.cells.push_back(std::move(c));
        }
    }
    const auto rank_key = [](const GridCell& cell) {
        return std::isnan(cell.summary.mean) ? std::numeric_limits<double>::infinity()
                                             : cell.summary.mean;
    };
    std::stable_sort(merged.cells.begin(), merged.cells.end(),
                     [&](const GridCell& a, const GridCell& b) {
                         return rank_key(a) < rank_key(b);
                     });
    return merged;
}

struct MethodPreset {
    std::string method;
    LearnerSpec learner;
    double ref_value; // reference summary (final-window MSE or lifetime accuracy)
};

// Non-linear tracking (teacher-student) selected hyperparameters. Reference
// values are full-scale (2M steps, summary over the final 500K).
inline std::vector<MethodPreset> nonlinear_presets() {
    return {
        {"sgd", {"sgd", {{"alpha", 0.01}}}, 0.0168},
        {"sgd_wd", {"sgd_wd", {{"alpha", 0.01}, {"lambda", 1e-3}}}, 0.0167},
        {"adam", {"adam", {{"alpha", 0.001}}}, 0.0170},
        {"adamw", {"adamw", {{"alpha", 0.001}, {"lambda", 0.1}}}, 0.0138},
        {"fade_sgd",
         {"fade_sgd", {{"alpha", 0.01}, {"theta_lambda", 2.0}, {"gamma0", -9.2}}},
         0.0073},
        {"fade_adam",
         {"fade_adam", {{"alpha", 0.0001}, {"theta_lambda", 1.0}, {"gamma0", -9.2}}},
         0.0087},
    };
}

// Label-permuted EMNIST selected hyperparameters. Reference values are
// full-scale (5M steps) lifetime online accuracy.
inline std::vector<MethodPreset> emnist_presets() {
    return {
        {"sgd", {"sgd", {{"alpha", 0.01}}}, 0.258},
        {"sgd_wd", {"sgd_wd", {{"alpha", 0.01}, {"lambda", 1e-4}}}, 0.335},
        {"adam", {"adam", {{"alpha", 0.0005}}}, 0.119},
        {"adamw", {"adamw", {{"alpha", 0.0005}, {"lambda", 0.1}}}, 0.372},
        {"sgd_wclip", {"sgd_wclip", {{"alpha", 0.005}, {"kappa", 2.0}}}, 0.612},
        {"fade_sgd",
         {"fade_sgd", {{"alpha", 0.005}, {"theta_lambda", 0.1}, {"gamma0", -6.9}}},
         0.807},
        {"fade_adam",
         {"fade_adam", {{"alpha", 0.0001}, {"theta_lambda", 0.1}, {"gamma0", -6.9}}},
         0.750},
    };
}

} // namespace fade::repro
