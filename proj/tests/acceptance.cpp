// Acceptance suite: end-to-end checks of benchmark behavior against the
// pinned reference results, one pass/fail line per criterion.
//
//   acceptance [--criteria 1,2,...] [--jobs N] [--data-root DIR]
//
// Criteria 6 and 7 need the EMNIST Balanced train split; when it cannot be
// found the binary reports them as SKIP and exits 77 so the test runner
// records a skip rather than a pass.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fade/io.hpp"
#include "fade/oracle.hpp"
#include "fade/repro.hpp"

using namespace fade;

namespace {

struct Gate {
    int passed = 0, failed = 0, skipped = 0;

    void result(int criterion, const char* name, bool ok, const std::string& detail) {
        std::printf("criterion %2d [%s]: %s — %s\n", criterion, name, ok ? "PASS" : "FAIL",
                    detail.c_str());
        std::fflush(stdout);
        ok ? ++passed : ++failed;
    }
    void skip(int criterion, const char* name, const std::string& why) {
        std::printf("criterion %2d [%s]: SKIP — %s\n", criterion, name, why.c_str());
        std::fflush(stdout);
        ++skipped;
    }
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

int g_jobs = 2;

// ---------------------------------------------------------------------------
// Criteria 1-3: linear tracking.
// ---------------------------------------------------------------------------

struct LinearResults {
    std::map<std::pair<std::string, int>, SeedAggregate> cells; // (method, noise*10)
    std::vector<RunRecord> fade_noise0_records;
    bool ran = false;
};

LinearResults run_linear_cells() {
    LinearResults res;
    for (const auto& cell : repro::table1_cells()) {
        RunSpec spec;
        spec.task.kind = TaskSpec::Kind::linear_tracking;
        spec.task.noise_std = cell.noise_std;
        spec.learner = cell.learner;
        spec.steps = 200000;
        spec.seed = 0;
        spec.metric_window = 1000;
        std::vector<RunRecord> records;
        const auto agg = run_seeds(spec, 10, g_jobs, nullptr, &records);
        res.cells[{cell.method, static_cast<int>(cell.noise_std * 10)}] = agg;
        if (cell.method == "fade" && cell.noise_std == 0.0)
            res.fade_noise0_records = std::move(records);
    }
    res.ran = true;
    return res;
}

void criterion_1(Gate& gate, const LinearResults& res) {
    bool ok = true;
    std::string detail;
    for (const auto& cell : repro::table1_cells()) {
        const auto& agg = res.cells.at({cell.method, static_cast<int>(cell.noise_std * 10)});
        const double err = std::abs(agg.mean - cell.ref_mean);
        const double tol = 5.0 * cell.ref_std;
        if (err > tol) {
            ok = false;
            detail += fmt("%s@%.0f mean %.4f vs %.3f (tol %.3f); ", cell.method.c_str(),
                          cell.noise_std, agg.mean, cell.ref_mean, tol);
        }
    }
    // Method ordering must match the reference ordering at each noise level.
    for (int noise : {0, 10}) {
        std::vector<std::pair<double, std::string>> got, ref;
        for (const auto& cell : repro::table1_cells()) {
            if (static_cast<int>(cell.noise_std * 10) != noise) continue;
            got.push_back({res.cells.at({cell.method, noise}).mean, cell.method});
            ref.push_back({cell.ref_mean, cell.method});
        }
        std::sort(got.begin(), got.end());
        std::sort(ref.begin(), ref.end());
        for (std::size_t i = 0; i < got.size(); ++i)
            if (got[i].second != ref[i].second) {
                ok = false;
                detail += fmt("ordering@%.1f differs at rank %zu (%s vs %s); ", noise / 10.0, i,
                              got[i].second.c_str(), ref[i].second.c_str());
            }
    }
    if (ok) {
        const auto& best = res.cells.at({"fade_idbd", 0});
        detail = fmt("all 12 cells within 5 sigma of reference, ordering matches "
                     "(e.g. fade_idbd@0: %.4f vs 1.246)",
                     best.mean);
    }
    gate.result(1, "linear tracking summary", ok, detail);
}

void criterion_2(Gate& gate, const LinearResults& res) {
    const auto grid = repro::coupled_grid_search_tied(0.0, 200000, 10, g_jobs);
    const auto& best = grid.cells.front();
    const double fade_idbd_mean = res.cells.at({"fade_idbd", 0}).mean;
    const bool near_ref = std::abs(best.summary.mean - repro::coupled_ref_mean_noise0) <= 0.05;
    const bool worse_than_decoupled = best.summary.mean > fade_idbd_mean;
    gate.result(2, "coupled variant", near_ref && worse_than_decoupled,
                fmt("best coupled mse %.4f (reference 1.270, tol 0.05), decoupled %.4f, "
                    "theta=%.3g beta0=%.2g gamma0=%.2g",
                    best.summary.mean, fade_idbd_mean, best.assignment.at("theta"),
                    best.assignment.at("beta0"), best.assignment.at("gamma0")));
}

void criterion_3(Gate& gate, const LinearResults& res) {
    double relevant = 0.0, irrelevant = 0.0;
    for (const auto& rec : res.fade_noise0_records) {
        // group order: relevant, irrelevant
        relevant += rec.final_group_lambda.at(0);
        irrelevant += rec.final_group_lambda.at(1);
    }
    relevant /= res.fade_noise0_records.size();
    irrelevant /= res.fade_noise0_records.size();
    const bool ok = irrelevant >= 0.45 && irrelevant <= 1.35 && relevant >= 0.01 &&
                    relevant <= 0.04;
    gate.result(3, "decay-rate separation", ok,
                fmt("final mean lambda: irrelevant %.3f (want [0.45, 1.35]), relevant %.4f "
                    "(want [0.01, 0.04])",
                    irrelevant, relevant));
}

// ---------------------------------------------------------------------------
// Criteria 4-5: teacher-student tracking at reduced scale.
// ---------------------------------------------------------------------------

SeedAggregate run_teacher(const LearnerSpec& learner, int seeds,
                          std::vector<RunRecord>* records = nullptr) {
    RunSpec spec;
    spec.task.kind = TaskSpec::Kind::teacher_student;
    spec.learner = learner;
    spec.steps = 500000;
    spec.seed = 0;
    spec.metric_window = 10000;
    spec.summary_tail = 100000;
    return run_seeds(spec, seeds, g_jobs, nullptr, records);
}

void criterion_4(Gate& gate) {
    const auto presets = repro::nonlinear_presets();
    auto find = [&](const std::string& m) {
        for (const auto& p : presets)
            if (p.method == m) return p.learner;
        throw config_error("missing preset " + m);
    };
    std::vector<RunRecord> fade_records;
    const auto fade_sgd = run_teacher(find("fade_sgd"), 3, &fade_records);
    const auto fade_adam = run_teacher(find("fade_adam"), 3);
    const auto adamw = run_teacher(find("adamw"), 3);

    const bool ratio_ok = fade_sgd.mean < 0.65 * adamw.mean;
    const bool order_ok = fade_sgd.mean < fade_adam.mean && fade_adam.mean < adamw.mean;

    // Per-group decay ordering from the adaptive runs: fast > slow > stable.
    double fast = 0, slow = 0, stable = 0;
    for (const auto& rec : fade_records) {
        fast += rec.final_group_lambda.at(0);
        slow += rec.final_group_lambda.at(1);
        stable += rec.final_group_lambda.at(2);
    }
    const bool lambda_ok = fast > slow && slow > stable;

    gate.result(4, "nonlinear tracking", ratio_ok && order_ok && lambda_ok,
                fmt("final-100K mse: fade_sgd %.5f, fade_adam %.5f, adamw %.5f "
                    "(need fade_sgd < 0.65*adamw = %.5f); lambda fast/slow/stable "
                    "%.2e/%.2e/%.2e",
                    fade_sgd.mean, fade_adam.mean, adamw.mean, 0.65 * adamw.mean, fast / 3,
                    slow / 3, stable / 3));
}

void criterion_5(Gate& gate) {
    auto run_cfg = [&](double gamma0, double theta) {
        LearnerSpec learner{"fade_sgd",
                            {{"alpha", 0.01}, {"theta_lambda", theta}, {"gamma0", gamma0}}};
        return run_teacher(learner, 3).mean;
    };
    const double theta0_a = run_cfg(-2.3, 0.0);
    const double theta0_b = run_cfg(-9.2, 0.0);
    const double theta2_a = run_cfg(-2.3, 2.0);
    const double theta2_b = run_cfg(-9.2, 2.0);
    const double gap0 = std::abs(theta0_a - theta0_b);
    const double gap2 = std::abs(theta2_a - theta2_b);
    gate.result(5, "initialization-sensitivity narrowing", gap2 < 0.5 * gap0,
                fmt("mse gap across gamma0 {-2.3, -9.2}: theta=0 %.5f (%.5f vs %.5f), theta=2 "
                    "%.5f (%.5f vs %.5f); need theta2 gap < half",
                    gap0, theta0_a, theta0_b, gap2, theta2_a, theta2_b));
}

// ---------------------------------------------------------------------------
// Criteria 6-7: label-permuted EMNIST at reduced scale.
// ---------------------------------------------------------------------------

std::optional<EmnistDataset> try_load_emnist(const std::string& flag_root, std::string& why) {
    std::vector<std::string> roots;
    if (!flag_root.empty()) roots.push_back(flag_root);
    if (const char* env = std::getenv("FADE_DATA_ROOT")) roots.push_back(env);
    roots.push_back("data");
    roots.push_back("data/emnist");
    for (const auto& root : roots) {
        try {
            return load_emnist_from_root(root);
        } catch (const data_error&) {
            continue;
        }
    }
    why = "EMNIST Balanced train files not found (searched --data-root, FADE_DATA_ROOT, ./data)";
    return std::nullopt;
}

SeedAggregate run_emnist(const EmnistDataset& data, const LearnerSpec& learner, bool partial,
                         int seeds, std::vector<RunRecord>* records = nullptr) {
    RunSpec spec;
    spec.task.kind = TaskSpec::Kind::emnist;
    spec.task.partial = partial;
    spec.learner = learner;
    spec.steps = 500000; // 200 tasks
    spec.seed = 0;
    spec.metric_window = 2500;
    return run_seeds(spec, seeds, g_jobs, &data, records);
}

double tail_window_mean(const RunRecord& rec, std::size_t windows) {
    double acc = 0.0;
    for (std::size_t i = rec.window_metric.size() - windows; i < rec.window_metric.size(); ++i)
        acc += rec.window_metric[i];
    return acc / static_cast<double>(windows);
}

void criterion_6(Gate& gate, const EmnistDataset& data) {
    const auto presets = repro::emnist_presets();
    auto find = [&](const std::string& m) {
        for (const auto& p : presets)
            if (p.method == m) return p.learner;
        throw config_error("missing preset " + m);
    };

    // Full permutation: required accuracy ordering across the six methods.
    std::map<std::string, double> acc;
    std::vector<RunRecord> fade_records;
    for (const char* m : {"fade_sgd", "sgd_wclip", "adamw", "sgd_wd", "sgd", "adam"}) {
        std::vector<RunRecord>* recs = std::strcmp(m, "fade_sgd") == 0 ? &fade_records : nullptr;
        acc[m] = run_emnist(data, find(m), false, 3, recs).mean;
    }
    const bool order_ok = acc["fade_sgd"] > acc["sgd_wclip"] && acc["sgd_wclip"] > acc["adamw"] &&
                          acc["adamw"] > acc["sgd_wd"] && acc["sgd_wd"] > acc["sgd"] &&
                          acc["sgd"] > acc["adam"];
    double fade_tail = 0.0; // last 50 tasks of each seed's run
    for (const auto& rec : fade_records) fade_tail += tail_window_mean(rec, 50);
    fade_tail /= fade_records.size();
    const bool tail_ok = fade_tail > 0.70;

    // Partial permutation: adaptive decay beats every baseline and its own
    // fixed-decay counterpart.
    std::map<std::string, double> pacc;
    for (const char* m : {"fade_sgd", "sgd_wclip", "adamw", "sgd_wd", "sgd", "adam"})
        pacc[m] = run_emnist(data, find(m), true, 3).mean;
    LearnerSpec frozen = find("fade_sgd");
    frozen.hp["theta_lambda"] = 0.0;
    pacc["fade_sgd_theta0"] = run_emnist(data, frozen, true, 3).mean;
    const bool partial_ok = pacc["fade_sgd"] > pacc["sgd_wclip"] &&
                            pacc["fade_sgd"] > pacc["adamw"] &&
                            pacc["fade_sgd"] > pacc["sgd_wd"] && pacc["fade_sgd"] > pacc["sgd"] &&
                            pacc["fade_sgd"] > pacc["adam"] &&
                            pacc["fade_sgd"] > pacc["fade_sgd_theta0"];

    gate.result(
        6, "label-permuted EMNIST", order_ok && tail_ok && partial_ok,
        fmt("full: fade_sgd %.3f > wclip %.3f > adamw %.3f > sgd_wd %.3f > sgd %.3f > adam %.3f "
            "(ordering %s); fade_sgd last-50-task accuracy %.3f (> 0.70 %s); partial: fade_sgd "
            "%.3f vs max baseline %.3f, theta0 %.3f (%s)",
            acc["fade_sgd"], acc["sgd_wclip"], acc["adamw"], acc["sgd_wd"], acc["sgd"],
            acc["adam"], order_ok ? "ok" : "VIOLATED", fade_tail, tail_ok ? "ok" : "VIOLATED",
            pacc["fade_sgd"],
            std::max({pacc["sgd_wclip"], pacc["adamw"], pacc["sgd_wd"], pacc["sgd"],
                      pacc["adam"]}),
            pacc["fade_sgd_theta0"], partial_ok ? "ok" : "VIOLATED"));
}

void criterion_7(Gate& gate, const EmnistDataset& data) {
    auto run_one = [&](double theta) {
        LearnerSpec learner{"fade_adam",
                            {{"alpha", 0.0001}, {"theta_lambda", theta}, {"gamma0", -11.5}}};
        std::vector<RunRecord> records;
        run_emnist(data, learner, false, 1, &records);
        return tail_window_mean(records[0], 50); // last quarter = 125K steps = 50 windows
    };
    const double adaptive = run_one(1.0);
    const double frozen = run_one(0.0);
    gate.result(7, "poor-initialization recovery", adaptive - frozen >= 0.15,
                fmt("last-quarter accuracy: adaptive %.3f vs frozen %.3f (need gap >= 0.15, got "
                    "%.3f)",
                    adaptive, frozen, adaptive - frozen));
}

// ---------------------------------------------------------------------------
// Criteria 8-10: oracles and gradient checks.
// ---------------------------------------------------------------------------

void criterion_8(Gate& gate) {
    int valid = 0, under_tol = 0, invalid = 0;
    double worst = 0.0;
    std::uint64_t seed = 0;
    while (valid < 100 && seed < 2000) {
        oracle::SensitivityProbe probe;
        probe.seed = seed++;
        probe.horizon = 30 + static_cast<int>(seed % 40);
        probe.alpha = 0.05;
        probe.gamma0 = -2.3;
        probe.eps = 1e-5;
        const auto rep = oracle::finite_diff_sensitivity(probe);
        if (!rep.valid) {
            ++invalid; // bracket not strictly positive: probe inapplicable
            continue;
        }
        ++valid;
        worst = std::max(worst, rep.rel_err);
        if (rep.rel_err < 1e-6) ++under_tol;
    }
    gate.result(8, "sensitivity oracle", valid == 100 && under_tol == 100,
                fmt("100 valid probes (%d rejected for inactive-bracket precondition), worst "
                    "rel_err %.2e (tol 1e-6)",
                    invalid, worst));
}

void criterion_9(Gate& gate) {
    bool ok = true;
    std::string detail;

    // Reduction identities over 1e4-step random streams, bitwise.
    {
        MetaHyper hp;
        hp.alpha = 0.06;
        hp.theta_lambda = 0.0;
        hp.gamma0 = -1.8;
        const int d = 20;
        auto params = make_fade_params(d, hp);
        std::vector<double> w(d, 0.0), grad(d), x(d);
        const double lambda = std::exp(hp.gamma0);
        Rng rng(424242);
        for (int t = 0; t < 10000 && ok; ++t) {
            for (auto& xi : x) xi = rng.gaussian();
            const double y_star = rng.gaussian();
            double y = 0.0;
            for (int i = 0; i < d; ++i) y += w[i] * x[i];
            const double delta = y_star - y;
            for (int i = 0; i < d; ++i) grad[i] = -(delta * x[i]);
            sgd_step(w, grad, hp.alpha, lambda);
            fade_step(params, x, y_star, hp);
            for (int i = 0; i < d; ++i)
                if (params[i].w != w[i]) ok = false;
        }
        if (!ok) detail += "fade(theta=0) != sgd+decay; ";
    }
    {
        MetaHyper hp;
        hp.theta_alpha = 0.0;
        hp.theta_lambda = 0.0;
        hp.beta0 = -4.6;
        hp.gamma0 = -2.3;
        const int d = 20;
        auto combined = make_fade_idbd_params(d, hp);
        auto idbd = make_idbd_params(d, hp);
        const double lambda = std::exp(hp.gamma0);
        Rng rng(17);
        std::vector<double> x(d);
        for (int t = 0; t < 10000 && ok; ++t) {
            for (auto& xi : x) xi = rng.gaussian();
            const double y_star = rng.gaussian();
            fade_idbd_step(combined, x, y_star, hp);
            idbd_wd_step(idbd, x, y_star, hp, lambda);
            for (int i = 0; i < d; ++i)
                if (combined[i].w != idbd[i].w || combined[i].h != idbd[i].h) ok = false;
        }
        if (!ok) detail += "fade_idbd(theta=0) != idbd_wd; ";
    }
    {
        MetaHyper hp;
        hp.theta_alpha = 0.01;
        hp.beta0 = -3.0;
        const int d = 20;
        auto a = make_idbd_params(d, hp);
        auto b = make_idbd_params(d, hp);
        Rng rng(29);
        std::vector<double> x(d);
        for (int t = 0; t < 10000 && ok; ++t) {
            for (auto& xi : x) xi = rng.gaussian();
            const double y_star = rng.gaussian();
            idbd_wd_step(a, x, y_star, hp, 0.0);
            idbd_step(b, x, y_star, hp);
            for (int i = 0; i < d; ++i)
                if (a[i].w != b[i].w || a[i].h != b[i].h || a[i].beta != b[i].beta) ok = false;
        }
        if (!ok) detail += "idbd_wd(0) != idbd; ";
    }

    // Dual-interpreter replay for the four published update rules.
    MetaHyper hp;
    hp.alpha = 0.05;
    hp.theta_alpha = 0.01;
    hp.theta_lambda = 0.01;
    hp.beta0 = -4.6;
    hp.gamma0 = -2.3;
    using oracle::Rule;
    for (auto [rule, name] :
         {std::pair{Rule::fade, "fade"}, {Rule::idbd, "idbd"}, {Rule::idbd_wd, "idbd_wd"},
          {Rule::fade_idbd, "fade_idbd"}, {Rule::coupled, "coupled"}}) {
        const auto rep = oracle::replay_trace_check(rule, 20, 10000, hp, 7000 + int(rule), 0.01);
        if (!rep.bitwise_equal) {
            ok = false;
            detail += fmt("replay %s diverged; ", name);
        }
    }
    if (ok) detail = "theta/lambda-zero reductions and 5 interpreter replays bitwise over 1e4 steps";
    gate.result(9, "reduction identities", ok, detail);
}

void criterion_10(Gate& gate) {
    Rng cfg_rng(515);
    int checked = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 60 && checked < 20; ++trial) {
        const int in = 2 + static_cast<int>(cfg_rng.below(4));
        const int hidden = 3 + static_cast<int>(cfg_rng.below(5));
        const int out = 2 + static_cast<int>(cfg_rng.below(4));
        const auto act = (trial % 2 == 0) ? Activation::relu : Activation::leaky_relu;
        const bool ce = (trial % 4 >= 2);

        auto net = mlp_init({in, hidden, out}, act, 9000 + trial);
        Eigen::VectorXd x(in), target(out);
        for (int i = 0; i < in; ++i) x[i] = cfg_rng.gaussian();
        for (int k = 0; k < out; ++k) target[k] = cfg_rng.gaussian();
        const int label = static_cast<int>(cfg_rng.below(out));

        mlp_forward(net, x);
        bool near_kink = false;
        for (Eigen::Index i = 0; i < net.preacts[0].size(); ++i)
            if (std::abs(net.preacts[0][i]) < 1e-3) near_kink = true;
        if (near_kink) continue;
        ++checked;

        const auto& y = mlp_forward(net, x);
        Eigen::VectorXd dldz;
        if (ce) {
            Eigen::VectorXd p;
            softmax(y, p);
            dldz = p;
            dldz[label] -= 1.0;
        } else {
            dldz = y - target;
        }
        Gradients grads;
        resize_gradients(grads, net);
        mlp_backward(net, dldz, grads);

        std::vector<double> flat;
        for (const auto& layer : net.layers) {
            flat.insert(flat.end(), layer.W.data(), layer.W.data() + layer.W.size());
            flat.insert(flat.end(), layer.b.data(), layer.b.data() + layer.b.size());
        }
        auto loss_fn = [&](std::span<const double> theta) {
            MlpNet probe = net;
            std::size_t off = 0;
            for (auto& layer : probe.layers) {
                std::copy(theta.begin() + off, theta.begin() + off + layer.W.size(),
                          layer.W.data());
                off += layer.W.size();
                std::copy(theta.begin() + off, theta.begin() + off + layer.b.size(),
                          layer.b.data());
                off += layer.b.size();
            }
            const auto& yy = mlp_forward(probe, x);
            if (ce) {
                Eigen::VectorXd p;
                softmax(yy, p);
                return -std::log(p[label]);
            }
            return 0.5 * (target - yy).squaredNorm();
        };
        const auto num = oracle::numerical_gradient(loss_fn, flat, 1e-6);

        std::vector<double> analytic;
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            analytic.insert(analytic.end(), grads.dW[l].data(),
                            grads.dW[l].data() + grads.dW[l].size());
            analytic.insert(analytic.end(), grads.db[l].data(),
                            grads.db[l].data() + grads.db[l].size());
        }
        // eps = 1e-6 central differences carry ~1e-10 absolute noise, so the
        // relative error is floored at the 1e-3 gradient scale (equivalent to
        // atol 1e-9 + rtol 1e-6).
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double scale = std::max({std::abs(analytic[i]), std::abs(num[i]), 1e-3});
            worst = std::max(worst, std::abs(analytic[i] - num[i]) / scale);
        }
    }
    gate.result(10, "gradient checks", checked == 20 && worst < 1e-6,
                fmt("%d random configurations (relu/leaky, mse/cross-entropy heads), worst "
                    "relative error %.2e (tol 1e-6)",
                    checked, worst));
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string data_root;
    g_jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (g_jobs < 1) g_jobs = 1;

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "missing value for %s\n", arg.c_str());
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--criteria") {
            wanted.clear();
            const std::string list = next();
            std::size_t pos = 0;
            while (pos < list.size()) {
                const std::size_t comma = list.find(',', pos);
                wanted.insert(std::stoi(list.substr(pos, comma - pos)));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        } else if (arg == "--jobs") {
            g_jobs = std::stoi(next());
        } else if (arg == "--data-root") {
            data_root = next();
        } else {
            std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
            return 2;
        }
    }

    Gate gate;
    try {
        LinearResults linear;
        if (wanted.count(1) || wanted.count(2) || wanted.count(3)) linear = run_linear_cells();
        if (wanted.count(1)) criterion_1(gate, linear);
        if (wanted.count(2)) criterion_2(gate, linear);
        if (wanted.count(3)) criterion_3(gate, linear);
        if (wanted.count(4)) criterion_4(gate);
        if (wanted.count(5)) criterion_5(gate);
        if (wanted.count(6) || wanted.count(7)) {
            std::string why;
            const auto data = try_load_emnist(data_root, why);
            if (!data) {
                if (wanted.count(6)) gate.skip(6, "label-permuted EMNIST", why);
                if (wanted.count(7)) gate.skip(7, "poor-initialization recovery", why);
            } else {
                std::printf("loaded EMNIST Balanced train split: %d images, %d classes\n",
                            data->size(), data->num_classes);
                if (wanted.count(6)) criterion_6(gate, *data);
                if (wanted.count(7)) criterion_7(gate, *data);
            }
        }
        if (wanted.count(8)) criterion_8(gate);
        if (wanted.count(9)) criterion_9(gate);
        if (wanted.count(10)) criterion_10(gate);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
        return 1;
    }

    std::printf("acceptance: %d passed, %d failed, %d skipped\n", gate.passed, gate.failed,
                gate.skipped);
    if (gate.failed > 0) return 1;
    if (gate.skipped > 0) return 77;
    return 0;
}
