#pragma once

// Reference online optimizers: SGD with decoupled weight decay, Adam with an
// optional decoupled decay factor, and per-layer weight clipping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fade/errors.hpp"

namespace fade {

// w <- (1 - lambda) w - alpha * grad. lambda = 0 is plain SGD; on a squared
// error this is the delta rule.
inline void sgd_step(std::span<double> w, std::span<const double> grad, double alpha,
                     double lambda) {
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = (1.0 - lambda) * w[i] - alpha * grad[i];
}

struct AdamConsts {
    double b1 = 0.9;
    double b2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    // Running b1^t, b2^t for bias correction.
    double b1_pow = 1.0, b2_pow = 1.0;
    AdamConsts consts;

    explicit AdamState(std::size_t n, AdamConsts c = {}) : m(n, 0.0), v(n, 0.0), consts(c) {}
};

// One Adam step with a decoupled multiplicative decay applied to the weight
// before the Adam delta:
//   w <- (1 - decay) w - alpha * m_hat / (sqrt(v_hat) + eps).
// `decay` is the per-step shrink factor itself; the caller picks the
// convention (0 for plain Adam, alpha-scaled weight decay for the AdamW
// baseline, an adaptive per-parameter rate for decay-adapted heads).
inline void adam_step(std::span<double> w, std::span<const double> grad, AdamState& st,
                      double alpha, double decay) {
    st.t += 1;
    st.b1_pow *= st.consts.b1;
    st.b2_pow *= st.consts.b2;
    const double c1 = 1.0 - st.b1_pow;
    const double c2 = 1.0 - st.b2_pow;
    for (std::size_t i = 0; i < w.size(); ++i) {
        st.m[i] = st.consts.b1 * st.m[i] + (1.0 - st.consts.b1) * grad[i];
        st.v[i] = st.consts.b2 * st.v[i] + (1.0 - st.consts.b2) * grad[i] * grad[i];
        const double m_hat = st.m[i] / c1;
        const double v_hat = st.v[i] / c2;
        w[i] = (1.0 - decay) * w[i] - alpha * m_hat / (std::sqrt(v_hat) + st.consts.eps);
    }
}

struct ClipSpec {
    double kappa = 1.0; // clipping multiplier
    double bound = 1.0; // layer init scale, recorded at construction
};

// Clamp every weight to [-kappa * bound, +kappa * bound]. Idempotent.
inline void weight_clip(std::span<double> w, const ClipSpec& spec) {
    const double limit = spec.kappa * spec.bound;
    for (double& wi : w) wi = std::clamp(wi, -limit, limit);
}

} // namespace fade
