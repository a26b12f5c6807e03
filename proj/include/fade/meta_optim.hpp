#pragma once

// Online meta-gradient update rules for linear regression: FADE (per-parameter
// weight decay adapted through a sensitivity trace g = dw/dgamma), IDBD
// (per-parameter step size through h = dw/dbeta), their combination, and the
// coupled variant where the decay term is scaled by the per-parameter step
// size. Each step function executes its update lines in the documented order;
// the g/h trace updates always consume the pre-update weight, and the
// bracketed trace-decay factor is clamped at zero.
//
// All rules are allocation-free single passes over the parameter array and
// keep Theta(d) state: FADE carries two extra scalars per weight (gamma and
// g; lambda is a cached exp(gamma), recomputed every step so it cannot
// drift).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fade/errors.hpp"

namespace fade {

struct MetaHyper {
    double alpha = 0.0;        // scalar base step size (FADE without IDBD)
    double theta_alpha = 0.0;  // meta step size for beta (IDBD family)
    double theta_lambda = 0.0; // meta step size for gamma (FADE family)
    double gamma0 = 0.0;       // initial log decay rate
    double beta0 = 0.0;        // initial log step size
    // Optional safety clamp gamma <= 0 (lambda <= 1). Off by default: the
    // update rules as derived carry no clamp.
    bool clamp_gamma = false;
};

struct FadeParam {
    double w = 0.0;      // weight
    double gamma = 0.0;  // log decay rate
    double lambda = 0.0; // exp(gamma), recomputed after every update
    double g = 0.0;      // sensitivity trace dw/dgamma
};
static_assert(sizeof(FadeParam) == 4 * sizeof(double));

struct IdbdParam {
    double w = 0.0;
    double beta = 0.0;  // log step size
    double alpha = 0.0; // exp(beta), recomputed after every update
    double h = 0.0;     // sensitivity trace dw/dbeta
};
static_assert(sizeof(IdbdParam) == 4 * sizeof(double));

struct FadeIdbdParam {
    double w = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    double g = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    double h = 0.0;
};
static_assert(sizeof(FadeIdbdParam) == 7 * sizeof(double));

struct StepOutcome {
    double prediction = 0.0; // <w_pre, x>
    double error = 0.0;      // y* - prediction
};

inline std::vector<FadeParam> make_fade_params(std::size_t d, const MetaHyper& hp) {
    return std::vector<FadeParam>(d, FadeParam{0.0, hp.gamma0, std::exp(hp.gamma0), 0.0});
}

inline std::vector<IdbdParam> make_idbd_params(std::size_t d, const MetaHyper& hp) {
    return std::vector<IdbdParam>(d, IdbdParam{0.0, hp.beta0, std::exp(hp.beta0), 0.0});
}

inline std::vector<FadeIdbdParam> make_fade_idbd_params(std::size_t d, const MetaHyper& hp) {
    return std::vector<FadeIdbdParam>(
        d, FadeIdbdParam{0.0, hp.gamma0, std::exp(hp.gamma0), 0.0, hp.beta0, std::exp(hp.beta0), 0.0});
}

namespace detail {

inline void require_same_size(std::size_t params, std::size_t inputs, const char* who) {
    if (params != inputs)
        throw config_error(std::string(who) + ": parameter/input length mismatch (" +
                           std::to_string(params) + " vs " + std::to_string(inputs) + ")");
}

inline void require_finite_input(std::span<const double> x, double y_star, const char* who) {
    if (!std::isfinite(y_star)) throw numeric_error(std::string(who) + ": non-finite target");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]))
            throw numeric_error(std::string(who) + ": non-finite input at parameter " +
                                std::to_string(i));
}

template <typename Param>
inline void require_finite_state(std::span<const Param> params, const char* who) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        bool ok = std::isfinite(p.w);
        if constexpr (requires { p.g; }) ok = ok && std::isfinite(p.g) && std::isfinite(p.gamma);
        if constexpr (requires { p.h; }) ok = ok && std::isfinite(p.h) && std::isfinite(p.beta);
        if (!ok)
            throw numeric_error(std::string(who) + ": non-finite state at parameter " +
                                std::to_string(i));
    }
}

template <typename Param>
inline double predict(std::span<const Param> params, std::span<const double> x) {
    double y = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) y += params[i].w * x[i];
    return y;
}

} // namespace detail

// FADE: adapt decay rate, update trace from the pre-update weight, then decay
// and correct the weight.
inline StepOutcome fade_step(std::span<FadeParam> params, std::span<const double> x,
                             double y_star, const MetaHyper& hp) {
    detail::require_same_size(params.size(), x.size(), "fade_step");
    detail::require_finite_input(x, y_star, "fade_step");
    detail::require_finite_state(std::span<const FadeParam>(params), "fade_step");

    const double y = detail::predict(std::span<const FadeParam>(params), x);
    const double delta = y_star - y;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const double xi = x[i];
        p.gamma += hp.theta_lambda * delta * xi * p.g;
        if (hp.clamp_gamma && p.gamma > 0.0) p.gamma = 0.0;
        p.lambda = std::exp(p.gamma);
        const double bracket = std::max(1.0 - p.lambda - hp.alpha * xi * xi, 0.0);
        p.g = p.g * bracket - p.lambda * p.w;
        p.w = (1.0 - p.lambda) * p.w + hp.alpha * (delta * xi);
    }
    return {y, delta};
}

// IDBD: adapt step size, update the weight, then the trace with the new step
// size.
inline StepOutcome idbd_step(std::span<IdbdParam> params, std::span<const double> x,
                             double y_star, const MetaHyper& hp) {
    detail::require_same_size(params.size(), x.size(), "idbd_step");
    detail::require_finite_input(x, y_star, "idbd_step");
    detail::require_finite_state(std::span<const IdbdParam>(params), "idbd_step");

    const double y = detail::predict(std::span<const IdbdParam>(params), x);
    const double delta = y_star - y;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const double xi = x[i];
        p.beta += hp.theta_alpha * delta * xi * p.h;
        p.alpha = std::exp(p.beta);
        p.w = p.w + p.alpha * (delta * xi);
        const double bracket = std::max(1.0 - p.alpha * xi * xi, 0.0);
        p.h = p.h * bracket + p.alpha * (delta * xi);
    }
    return {y, delta};
}

// IDBD with a fixed decay rate folded into the weight update and the trace
// bracket. lambda_fixed = 0 recovers idbd_step exactly.
inline StepOutcome idbd_wd_step(std::span<IdbdParam> params, std::span<const double> x,
                                double y_star, const MetaHyper& hp, double lambda_fixed) {
    detail::require_same_size(params.size(), x.size(), "idbd_wd_step");
    detail::require_finite_input(x, y_star, "idbd_wd_step");
    detail::require_finite_state(std::span<const IdbdParam>(params), "idbd_wd_step");

    const double y = detail::predict(std::span<const IdbdParam>(params), x);
    const double delta = y_star - y;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const double xi = x[i];
        p.beta += hp.theta_alpha * delta * xi * p.h;
        p.alpha = std::exp(p.beta);
        p.w = (1.0 - lambda_fixed) * p.w + p.alpha * (delta * xi);
        const double bracket = std::max(1.0 - lambda_fixed - p.alpha * xi * xi, 0.0);
        p.h = p.h * bracket + p.alpha * (delta * xi);
    }
    return {y, delta};
}

// FADE + IDBD: both meta parameters adapt from their old traces; the traces
// share one bracket and consume the pre-update weight; the weight moves last.
inline StepOutcome fade_idbd_step(std::span<FadeIdbdParam> params, std::span<const double> x,
                                  double y_star, const MetaHyper& hp) {
    detail::require_same_size(params.size(), x.size(), "fade_idbd_step");
    detail::require_finite_input(x, y_star, "fade_idbd_step");
    detail::require_finite_state(std::span<const FadeIdbdParam>(params), "fade_idbd_step");

    const double y = detail::predict(std::span<const FadeIdbdParam>(params), x);
    const double delta = y_star - y;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const double xi = x[i];
        p.beta += hp.theta_alpha * delta * xi * p.h;
        p.alpha = std::exp(p.beta);
        p.gamma += hp.theta_lambda * delta * xi * p.g;
        if (hp.clamp_gamma && p.gamma > 0.0) p.gamma = 0.0;
        p.lambda = std::exp(p.gamma);
        const double bracket = std::max(1.0 - p.lambda - p.alpha * xi * xi, 0.0);
        p.h = p.h * bracket + p.alpha * (delta * xi);
        p.g = p.g * bracket - p.lambda * p.w;
        p.w = (1.0 - p.lambda) * p.w + p.alpha * (delta * xi);
    }
    return {y, delta};
}

// Coupled variant: the decay term is alpha*lambda (decay folded into the
// regularized loss), which also shows up in both trace brackets and adds an
// extra -alpha*lambda*w term to the h trace.
inline StepOutcome coupled_step(std::span<FadeIdbdParam> params, std::span<const double> x,
                                double y_star, const MetaHyper& hp) {
    detail::require_same_size(params.size(), x.size(), "coupled_step");
    detail::require_finite_input(x, y_star, "coupled_step");
    detail::require_finite_state(std::span<const FadeIdbdParam>(params), "coupled_step");

    const double y = detail::predict(std::span<const FadeIdbdParam>(params), x);
    const double delta = y_star - y;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const double xi = x[i];
        p.beta += hp.theta_alpha * delta * xi * p.h;
        p.alpha = std::exp(p.beta);
        p.gamma += hp.theta_lambda * delta * xi * p.g;
        if (hp.clamp_gamma && p.gamma > 0.0) p.gamma = 0.0;
        p.lambda = std::exp(p.gamma);
        const double decay = p.alpha * p.lambda;
        const double bracket = std::max(1.0 - decay - p.alpha * xi * xi, 0.0);
        p.g = p.g * bracket - decay * p.w;
        p.h = p.h * bracket + p.alpha * (delta * xi) - decay * p.w;
        p.w = (1.0 - decay) * p.w + p.alpha * (delta * xi);
    }
    return {y, delta};
}

} // namespace fade
