#pragma once

// Independent brute-force checkers used to validate the update rules and
// gradients: a finite-difference probe for the decay sensitivity trace, a
// generic central-difference gradient, and literal line-by-line interpreters
// of the published pseudocode that replay recorded streams for bitwise
// comparison against the production step functions. The interpreters share
// nothing with meta_optim.hpp beyond the parameter structs; keeping them as
// separate transcriptions is the point of the check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fade/meta_optim.hpp"
#include "fade/rng.hpp"

namespace fade::oracle {

// ---------------------------------------------------------------------------
// Finite-difference sensitivity probe (d = 1, frozen gamma).
// ---------------------------------------------------------------------------

struct SensitivityProbe {
    std::uint64_t seed = 0;
    int horizon = 50;       // steps T
    double eps = 1e-5;      // central-difference perturbation, in [1e-7, 1e-4]
    double alpha = 0.05;
    double gamma0 = -2.3;
};

struct SensitivityReport {
    bool valid = false;       // bracket stayed strictly positive along the run
    double g_trace = 0.0;     // running trace at step T
    double g_exact = 0.0;     // central difference of w_T wrt gamma
    double rel_err = 0.0;
    double min_bracket = 0.0; // smallest pre-clamp bracket seen
};

namespace detail {

struct ProbeStream {
    std::vector<double> x;
    double y_star = 0.0;
};

// Constant random target, i.i.d. standard normal inputs.
inline ProbeStream make_stream(const SensitivityProbe& probe) {
    Rng rng(probe.seed);
    ProbeStream s;
    s.y_star = rng.uniform(0.5, 2.0);
    s.x.resize(static_cast<std::size_t>(probe.horizon));
    for (auto& xi : s.x) xi = rng.gaussian();
    return s;
}

// Full re-simulation of the fixed-decay weight recursion at a given gamma.
inline double simulate_weight(const ProbeStream& s, double gamma, double alpha) {
    const double lambda = std::exp(gamma);
    double w = 0.0;
    for (double xi : s.x) {
        const double delta = s.y_star - w * xi;
        w = (1.0 - lambda) * w + alpha * delta * xi;
    }
    return w;
}

} // namespace detail

// Runs the trace recursion with frozen gamma (theta_lambda = 0) and compares
// the trace at step T against a central difference of two re-simulated
// trajectories. A probe in which the bracket ever goes non-positive is
// reported invalid rather than failed: there the recursion is clamped and the
// trace is no longer the exact derivative.
inline SensitivityReport finite_diff_sensitivity(const SensitivityProbe& probe) {
    const auto stream = detail::make_stream(probe);
    SensitivityReport rep;

    const double lambda = std::exp(probe.gamma0);
    double w = 0.0, g = 0.0;
    rep.min_bracket = 1.0 - lambda;
    for (double xi : stream.x) {
        const double delta = stream.y_star - w * xi;
        const double bracket = 1.0 - lambda - probe.alpha * xi * xi;
        rep.min_bracket = std::min(rep.min_bracket, bracket);
        g = g * std::max(bracket, 0.0) - lambda * w;
        w = (1.0 - lambda) * w + probe.alpha * delta * xi;
    }
    rep.g_trace = g;
    rep.valid = rep.min_bracket > 0.0;

    const double w_plus = detail::simulate_weight(stream, probe.gamma0 + probe.eps, probe.alpha);
    const double w_minus = detail::simulate_weight(stream, probe.gamma0 - probe.eps, probe.alpha);
    rep.g_exact = (w_plus - w_minus) / (2.0 * probe.eps);

    const double scale = std::max(std::abs(rep.g_exact), 1e-12);
    rep.rel_err = std::abs(rep.g_trace - rep.g_exact) / scale;
    return rep;
}

// ---------------------------------------------------------------------------
// Central-difference gradient.
// ---------------------------------------------------------------------------

inline std::vector<double> numerical_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> point,
    double eps) {
    std::vector<double> p(point.begin(), point.end());
    std::vector<double> grad(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + eps;
        const double f_plus = f(p);
        p[i] = saved - eps;
        const double f_minus = f(p);
        p[i] = saved;
        grad[i] = (f_plus - f_minus) / (2.0 * eps);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Pseudocode interpreters. Plain vector state, one function per algorithm,
// each a literal transcription of the published update lines.
// ---------------------------------------------------------------------------

struct ReplayState {
    std::vector<double> w, gamma, lambda, g; // decay adaptation
    std::vector<double> beta, alpha, h;      // step-size adaptation
};

inline ReplayState make_replay_state(std::size_t d, const MetaHyper& hp) {
    ReplayState s;
    s.w.assign(d, 0.0);
    s.gamma.assign(d, hp.gamma0);
    s.lambda.assign(d, std::exp(hp.gamma0));
    s.g.assign(d, 0.0);
    s.beta.assign(d, hp.beta0);
    s.alpha.assign(d, std::exp(hp.beta0));
    s.h.assign(d, 0.0);
    return s;
}

inline double replay_predict(const ReplayState& s, std::span<const double> x) {
    double y = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) y += s.w[i] * x[i];
    return y;
}

inline void replay_fade(ReplayState& s, std::span<const double> x, double y_star,
                        const MetaHyper& hp) {
    const double delta = y_star - replay_predict(s, x);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.gamma[i] = s.gamma[i] + hp.theta_lambda * delta * x[i] * s.g[i];
        s.lambda[i] = std::exp(s.gamma[i]);
        s.g[i] = s.g[i] * std::max(1.0 - s.lambda[i] - hp.alpha * x[i] * x[i], 0.0) -
                 s.lambda[i] * s.w[i];
        s.w[i] = (1.0 - s.lambda[i]) * s.w[i] + hp.alpha * (delta * x[i]);
    }
}

inline void replay_idbd(ReplayState& s, std::span<const double> x, double y_star,
                        const MetaHyper& hp) {
    const double delta = y_star - replay_predict(s, x);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.beta[i] = s.beta[i] + hp.theta_alpha * delta * x[i] * s.h[i];
        s.alpha[i] = std::exp(s.beta[i]);
        s.w[i] = s.w[i] + s.alpha[i] * (delta * x[i]);
        s.h[i] = s.h[i] * std::max(1.0 - s.alpha[i] * x[i] * x[i], 0.0) +
                 s.alpha[i] * (delta * x[i]);
    }
}

inline void replay_idbd_wd(ReplayState& s, std::span<const double> x, double y_star,
                           const MetaHyper& hp, double lambda_fixed) {
    const double delta = y_star - replay_predict(s, x);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.beta[i] = s.beta[i] + hp.theta_alpha * delta * x[i] * s.h[i];
        s.alpha[i] = std::exp(s.beta[i]);
        s.w[i] = (1.0 - lambda_fixed) * s.w[i] + s.alpha[i] * (delta * x[i]);
        s.h[i] = s.h[i] * std::max(1.0 - lambda_fixed - s.alpha[i] * x[i] * x[i], 0.0) +
                 s.alpha[i] * (delta * x[i]);
    }
}

inline void replay_fade_idbd(ReplayState& s, std::span<const double> x, double y_star,
                             const MetaHyper& hp) {
    const double delta = y_star - replay_predict(s, x);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.beta[i] = s.beta[i] + hp.theta_alpha * delta * x[i] * s.h[i];
        s.alpha[i] = std::exp(s.beta[i]);
        s.gamma[i] = s.gamma[i] + hp.theta_lambda * delta * x[i] * s.g[i];
        s.lambda[i] = std::exp(s.gamma[i]);
        s.h[i] = s.h[i] * std::max(1.0 - s.lambda[i] - s.alpha[i] * x[i] * x[i], 0.0) +
                 s.alpha[i] * (delta * x[i]);
        s.g[i] = s.g[i] * std::max(1.0 - s.lambda[i] - s.alpha[i] * x[i] * x[i], 0.0) -
                 s.lambda[i] * s.w[i];
        s.w[i] = (1.0 - s.lambda[i]) * s.w[i] + s.alpha[i] * (delta * x[i]);
    }
}

inline void replay_coupled(ReplayState& s, std::span<const double> x, double y_star,
                           const MetaHyper& hp) {
    const double delta = y_star - replay_predict(s, x);
    for (std::size_t i = 0; i < s.w.size(); ++i) {
        s.beta[i] = s.beta[i] + hp.theta_alpha * delta * x[i] * s.h[i];
        s.alpha[i] = std::exp(s.beta[i]);
        s.gamma[i] = s.gamma[i] + hp.theta_lambda * delta * x[i] * s.g[i];
        s.lambda[i] = std::exp(s.gamma[i]);
        const double al = s.alpha[i] * s.lambda[i];
        s.g[i] = s.g[i] * std::max(1.0 - al - s.alpha[i] * x[i] * x[i], 0.0) - al * s.w[i];
        s.h[i] = s.h[i] * std::max(1.0 - al - s.alpha[i] * x[i] * x[i], 0.0) +
                 s.alpha[i] * (delta * x[i]) - al * s.w[i];
        s.w[i] = (1.0 - al) * s.w[i] + s.alpha[i] * (delta * x[i]);
    }
}

// ---------------------------------------------------------------------------
// Replay check: production step function vs interpreter, bitwise.
// ---------------------------------------------------------------------------

enum class Rule { fade, idbd, idbd_wd, fade_idbd, coupled };

struct ReplayReport {
    bool bitwise_equal = true;
    long first_divergence_step = -1;
    std::string detail;
};

// Runs both implementations over the same random stream and asserts bitwise
// state equality at steps 1, 2 and T.
inline ReplayReport replay_trace_check(Rule rule, std::size_t d, long horizon,
                                       const MetaHyper& hp, std::uint64_t seed,
                                       double lambda_fixed = 0.0) {
    Rng rng(seed);
    auto fade_params = make_fade_params(d, hp);
    auto idbd_params = make_idbd_params(d, hp);
    auto both_params = make_fade_idbd_params(d, hp);
    ReplayState replay = make_replay_state(d, hp);

    std::vector<double> x(d);
    ReplayReport rep;
    auto states_equal = [&]() {
        for (std::size_t i = 0; i < d; ++i) {
            switch (rule) {
                case Rule::fade: {
                    const auto& p = fade_params[i];
                    if (p.w != replay.w[i] || p.gamma != replay.gamma[i] ||
                        p.lambda != replay.lambda[i] || p.g != replay.g[i])
                        return false;
                    break;
                }
                case Rule::idbd:
                case Rule::idbd_wd: {
                    const auto& p = idbd_params[i];
                    if (p.w != replay.w[i] || p.beta != replay.beta[i] ||
                        p.alpha != replay.alpha[i] || p.h != replay.h[i])
                        return false;
                    break;
                }
                default: {
                    const auto& p = both_params[i];
                    if (p.w != replay.w[i] || p.gamma != replay.gamma[i] ||
                        p.lambda != replay.lambda[i] || p.g != replay.g[i] ||
                        p.beta != replay.beta[i] || p.alpha != replay.alpha[i] ||
                        p.h != replay.h[i])
                        return false;
                    break;
                }
            }
        }
        return true;
    };

    for (long t = 0; t < horizon; ++t) {
        for (auto& xi : x) xi = rng.gaussian();
        const double y_star = rng.gaussian();
        switch (rule) {
            case Rule::fade:
                fade_step(fade_params, x, y_star, hp);
                replay_fade(replay, x, y_star, hp);
                break;
            case Rule::idbd:
                idbd_step(idbd_params, x, y_star, hp);
                replay_idbd(replay, x, y_star, hp);
                break;
            case Rule::idbd_wd:
                idbd_wd_step(idbd_params, x, y_star, hp, lambda_fixed);
                replay_idbd_wd(replay, x, y_star, hp, lambda_fixed);
                break;
            case Rule::fade_idbd:
                fade_idbd_step(both_params, x, y_star, hp);
                replay_fade_idbd(replay, x, y_star, hp);
                break;
            case Rule::coupled:
                coupled_step(both_params, x, y_star, hp);
                replay_coupled(replay, x, y_star, hp);
                break;
        }
        if ((t == 0 || t == 1 || t == horizon - 1) && !states_equal()) {
            rep.bitwise_equal = false;
            rep.first_divergence_step = t + 1;
            rep.detail = "state mismatch after step " + std::to_string(t + 1);
            return rep;
        }
    }
    return rep;
}

} // namespace fade::oracle
