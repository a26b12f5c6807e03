#pragma once

// Adaptive-decay rule for a linear output layer, in matrix form: one decay
// meta-parameter and one sensitivity trace per head entry, with the bias of
// each output unit treated as one more adapted parameter whose input is the
// constant 1. Supports a squared-error head (per-output error drives each row
// independently) and a cross-entropy head (softmax gradient; the trace
// bracket picks up the p(1-p) curvature factor). The gradient step is either
// the plain delta rule or Adam, in which case the trace bracket uses Adam's
// effective per-entry step size and the weight moves by the Adam delta while
// the decay stays a direct multiplicative factor.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "fade/baselines.hpp"
#include "fade/errors.hpp"

namespace fade {

// Logits/prediction of a linear head computed coefficient-wise (bias added
// last), matching the accumulation order of the vector update rules.
inline void head_predict(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    const Eigen::Index C = W.rows(), d = W.cols();
    out.resize(C);
    for (Eigen::Index k = 0; k < C; ++k) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) acc += W(k, j) * x[j];
        out[k] = acc + b[k] * 1.0;
    }
}

// Numerically stable softmax (max-logit subtraction).
inline void softmax(const Eigen::VectorXd& z, Eigen::VectorXd& p) {
    const double zmax = z.maxCoeff();
    p.resize(z.size());
    double sum = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - zmax);
        sum += p[k];
    }
    p /= sum;
}

class FadeHead {
public:
    enum class Loss { squared_error, cross_entropy };
    enum class Base { sgd, adam };

    FadeHead(int outputs, int features, Loss loss, Base base, double alpha, double theta_lambda,
             double gamma0, bool clamp_gamma = false, AdamConsts consts = {})
        : loss_(loss), base_(base), alpha_(alpha), theta_lambda_(theta_lambda),
          clamp_gamma_(clamp_gamma), consts_(consts) {
        gamma_ = Eigen::MatrixXd::Constant(outputs, features + 1, gamma0);
        lambda_ = Eigen::MatrixXd::Constant(outputs, features + 1, std::exp(gamma0));
        g_ = Eigen::MatrixXd::Zero(outputs, features + 1);
        if (base_ == Base::adam) {
            m_ = Eigen::MatrixXd::Zero(outputs, features + 1);
            v_ = Eigen::MatrixXd::Zero(outputs, features + 1);
        }
    }

    // One online update of the head parameters, in place. `delta` is the
    // per-output error that multiplies the features in the weight update
    // (y* - y for squared error, indicator - p for cross-entropy); `probs`
    // must be the softmax output for the cross-entropy head and may be null
    // otherwise. The prediction that produced `delta` must come from the
    // current (pre-update) W and b.
    void update(Eigen::MatrixXd& W, Eigen::VectorXd& b, const Eigen::VectorXd& x,
                const Eigen::VectorXd& delta, const Eigen::VectorXd* probs) {
        const Eigen::Index C = W.rows(), d = W.cols();
        if (gamma_.rows() != C || gamma_.cols() != d + 1)
            throw config_error("FadeHead: head shape does not match meta state");
        if (loss_ == Loss::cross_entropy && probs == nullptr)
            throw config_error("FadeHead: cross-entropy update needs probabilities");

        double c1 = 1.0, c2 = 1.0;
        if (base_ == Base::adam) {
            t_ += 1;
            b1_pow_ *= consts_.b1;
            b2_pow_ *= consts_.b2;
            c1 = 1.0 - b1_pow_;
            c2 = 1.0 - b2_pow_;
        }

        for (Eigen::Index k = 0; k < C; ++k) {
            const double dk = delta[k];
            const double pf =
                (loss_ == Loss::cross_entropy) ? (*probs)[k] * (1.0 - (*probs)[k]) : 1.0;
            for (Eigen::Index j = 0; j <= d; ++j) {
                const double xj = (j < d) ? x[j] : 1.0;
                double& wkj = (j < d) ? W(k, j) : b(k);
                double a_eff = alpha_;
                double adam_delta = 0.0;
                if (base_ == Base::adam) {
                    const double grad = -(dk * xj);
                    m_(k, j) = consts_.b1 * m_(k, j) + (1.0 - consts_.b1) * grad;
                    v_(k, j) = consts_.b2 * v_(k, j) + (1.0 - consts_.b2) * grad * grad;
                    const double m_hat = m_(k, j) / c1;
                    const double v_hat = v_(k, j) / c2;
                    const double denom = std::sqrt(v_hat) + consts_.eps;
                    a_eff = alpha_ / denom;
                    adam_delta = -(alpha_ * m_hat / denom);
                }
                double& gamma = gamma_(k, j);
                double& g = g_(k, j);
                gamma += theta_lambda_ * dk * xj * g;
                if (clamp_gamma_ && gamma > 0.0) gamma = 0.0;
                const double lam = std::exp(gamma);
                lambda_(k, j) = lam;
                const double curve = (loss_ == Loss::cross_entropy) ? a_eff * pf * xj * xj
                                                                    : a_eff * xj * xj;
                const double bracket = std::max(1.0 - lam - curve, 0.0);
                g = g * bracket - lam * wkj;
                if (base_ == Base::adam)
                    wkj = (1.0 - lam) * wkj + adam_delta;
                else
                    wkj = (1.0 - lam) * wkj + alpha_ * (dk * xj);
            }
        }
    }

    const Eigen::MatrixXd& lambda() const { return lambda_; }
    const Eigen::MatrixXd& gamma() const { return gamma_; }
    const Eigen::MatrixXd& trace() const { return g_; }
    Loss loss() const { return loss_; }

    // Mean decay rate over whole head rows (bias included).
    template <typename RowIndices>
    double lambda_row_mean(const RowIndices& rows) const {
        double sum = 0.0;
        long n = 0;
        for (int k : rows) {
            sum += lambda_.row(k).sum();
            n += lambda_.cols();
        }
        return n > 0 ? sum / static_cast<double>(n) : 0.0;
    }

private:
    Loss loss_;
    Base base_;
    double alpha_;
    double theta_lambda_;
    bool clamp_gamma_;
    AdamConsts consts_;
    Eigen::MatrixXd gamma_, lambda_, g_;
    Eigen::MatrixXd m_, v_;
    long t_ = 0;
    double b1_pow_ = 1.0, b2_pow_ = 1.0;
};

} // namespace fade
