#pragma once

// Task-facing learners. The harness drives two calls per interaction:
// predict(x), which must not touch the target, then update(sample). Scoring
// happens in the harness between the two, so a learner cannot score a sample
// it has already absorbed. Linear learners wrap the per-parameter update
// rules directly; network learners compose a backbone optimizer with either
// a plain head or the adaptive-decay head.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fade/baselines.hpp"
#include "fade/errors.hpp"
#include "fade/fade_head.hpp"
#include "fade/meta_optim.hpp"
#include "fade/net.hpp"
#include "fade/tasks.hpp"

namespace fade {

class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    // Prediction for the incoming input: regression output or logits. Must
    // not depend on the sample's target.
    virtual const Eigen::VectorXd& predict(const Eigen::VectorXd& x) = 0;

    // One learning update from the full sample. Always called right after
    // predict() on the same input.
    virtual void update(const StreamSample& sample) = 0;

    virtual bool adaptive_decay() const { return false; }

    // Mean decay rate over a parameter group: weight indices for linear
    // learners, head rows for network learners.
    virtual double lambda_group_mean(const std::vector<int>&) const {
        throw config_error("learner has no adaptive decay state");
    }

    // Human-readable state snapshot for fault reports.
    virtual std::string state_dump() const = 0;
};

namespace detail {

inline std::string dump_values(const char* name, std::span<const double> v) {
    std::string out = std::string("  ") + name + " = [";
    char buf[32];
    const std::size_t limit = v.size() <= 24 ? v.size() : 24;
    for (std::size_t i = 0; i < limit; ++i) {
        std::snprintf(buf, sizeof(buf), "%.8g", v[i]);
        out += buf;
        if (i + 1 < v.size()) out += ", ";
    }
    if (limit < v.size()) out += "... (" + std::to_string(v.size()) + " values)";
    out += "]\n";
    return out;
}

inline double manual_dot(std::span<const double> w, std::span<const double> x) {
    double y = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) y += w[i] * x[i];
    return y;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Linear learners (scalar-target regression).
// ---------------------------------------------------------------------------

// Delta rule with decoupled decay; lambda = 0 is plain SGD.
class LinearSgdLearner final : public OnlineLearner {
public:
    LinearSgdLearner(int dim, double alpha, double lambda)
        : w_(dim, 0.0), grad_(dim, 0.0), alpha_(alpha), lambda_(lambda) {
        pred_.resize(1);
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        pred_[0] = detail::manual_dot(w_, {x.data(), w_.size()});
        return pred_;
    }

    void update(const StreamSample& s) override {
        const std::span<const double> x(s.x.data(), w_.size());
        const double delta = s.y[0] - detail::manual_dot(w_, x);
        if (!std::isfinite(delta)) throw numeric_error("LinearSgdLearner: non-finite error");
        for (std::size_t i = 0; i < w_.size(); ++i) grad_[i] = -(delta * x[i]);
        sgd_step(w_, grad_, alpha_, lambda_);
    }

    std::span<const double> weights() const { return w_; }
    std::string state_dump() const override { return detail::dump_values("w", w_); }

private:
    std::vector<double> w_, grad_;
    double alpha_, lambda_;
    Eigen::VectorXd pred_;
};

class LinearFadeLearner final : public OnlineLearner {
public:
    LinearFadeLearner(int dim, const MetaHyper& hp) : hp_(hp), params_(make_fade_params(dim, hp)) {
        pred_.resize(1);
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        double y = 0.0;
        for (std::size_t i = 0; i < params_.size(); ++i) y += params_[i].w * x[i];
        pred_[0] = y;
        return pred_;
    }

    void update(const StreamSample& s) override {
        fade_step(params_, std::span<const double>(s.x.data(), params_.size()), s.y[0], hp_);
    }

    bool adaptive_decay() const override { return true; }
    double lambda_group_mean(const std::vector<int>& idx) const override {
        double sum = 0.0;
        for (int i : idx) sum += params_[i].lambda;
        return sum / static_cast<double>(idx.size());
    }
    const std::vector<FadeParam>& params() const { return params_; }
    std::string state_dump() const override {
        std::string out;
        std::vector<double> w, lam;
        for (const auto& p : params_) {
            w.push_back(p.w);
            lam.push_back(p.lambda);
        }
        out += detail::dump_values("w", w);
        out += detail::dump_values("lambda", lam);
        return out;
    }

private:
    MetaHyper hp_;
    std::vector<FadeParam> params_;
    Eigen::VectorXd pred_;
};

class LinearIdbdLearner final : public OnlineLearner {
public:
    // with_decay: use the fixed-decay variant (decay taken from `lambda`).
    LinearIdbdLearner(int dim, const MetaHyper& hp, bool with_decay, double lambda)
        : hp_(hp), lambda_(lambda), with_decay_(with_decay), params_(make_idbd_params(dim, hp)) {
        pred_.resize(1);
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        double y = 0.0;
        for (std::size_t i = 0; i < params_.size(); ++i) y += params_[i].w * x[i];
        pred_[0] = y;
        return pred_;
    }

    void update(const StreamSample& s) override {
        const std::span<const double> x(s.x.data(), params_.size());
        if (with_decay_)
            idbd_wd_step(params_, x, s.y[0], hp_, lambda_);
        else
            idbd_step(params_, x, s.y[0], hp_);
    }

    const std::vector<IdbdParam>& params() const { return params_; }
    std::string state_dump() const override {
        std::string out;
        std::vector<double> w, a;
        for (const auto& p : params_) {
            w.push_back(p.w);
            a.push_back(p.alpha);
        }
        out += detail::dump_values("w", w);
        out += detail::dump_values("alpha", a);
        return out;
    }

private:
    MetaHyper hp_;
    double lambda_;
    bool with_decay_;
    std::vector<IdbdParam> params_;
    Eigen::VectorXd pred_;
};

class LinearFadeIdbdLearner final : public OnlineLearner {
public:
    LinearFadeIdbdLearner(int dim, const MetaHyper& hp, bool coupled)
        : hp_(hp), coupled_(coupled), params_(make_fade_idbd_params(dim, hp)) {
        pred_.resize(1);
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        double y = 0.0;
        for (std::size_t i = 0; i < params_.size(); ++i) y += params_[i].w * x[i];
        pred_[0] = y;
        return pred_;
    }

    void update(const StreamSample& s) override {
        const std::span<const double> x(s.x.data(), params_.size());
        if (coupled_)
            coupled_step(params_, x, s.y[0], hp_);
        else
            fade_idbd_step(params_, x, s.y[0], hp_);
    }

    bool adaptive_decay() const override { return true; }
    double lambda_group_mean(const std::vector<int>& idx) const override {
        double sum = 0.0;
        for (int i : idx) sum += params_[i].lambda;
        return sum / static_cast<double>(idx.size());
    }
    const std::vector<FadeIdbdParam>& params() const { return params_; }
    std::string state_dump() const override {
        std::string out;
        std::vector<double> w, lam, a;
        for (const auto& p : params_) {
            w.push_back(p.w);
            lam.push_back(p.lambda);
            a.push_back(p.alpha);
        }
        out += detail::dump_values("w", w);
        out += detail::dump_values("lambda", lam);
        out += detail::dump_values("alpha", a);
        return out;
    }

private:
    MetaHyper hp_;
    bool coupled_;
    std::vector<FadeIdbdParam> params_;
    Eigen::VectorXd pred_;
};

// ---------------------------------------------------------------------------
// Network learners.
// ---------------------------------------------------------------------------

enum class NetLoss { mse, cross_entropy };

// The MSE metric is the mean over output dimensions of the squared per-output
// error; the training gradient is that of 1/2 sum_k delta_k^2.
struct NetBaselineConfig {
    std::vector<int> shape;
    Activation activation = Activation::relu;
    NetLoss loss = NetLoss::mse;
    bool use_adam = false;
    double alpha = 0.01;
    double decay = 0.0; // per-step multiplicative shrink factor
    bool clip = false;  // weight clipping after every step
    double kappa = 1.0;
    AdamConsts adam_consts{};
};

class NetBaselineLearner final : public OnlineLearner {
public:
    NetBaselineLearner(const NetBaselineConfig& cfg, std::uint64_t init_seed)
        : cfg_(cfg), net_(mlp_init(cfg.shape, cfg.activation, init_seed)) {
        resize_gradients(grads_, net_);
        if (cfg_.use_adam) {
            for (const auto& layer : net_.layers) {
                adam_w_.emplace_back(static_cast<std::size_t>(layer.W.size()), cfg_.adam_consts);
                adam_b_.emplace_back(static_cast<std::size_t>(layer.b.size()), cfg_.adam_consts);
            }
        }
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        has_prediction_ = true;
        return mlp_forward(net_, x);
    }

    void update(const StreamSample& s) override {
        if (!has_prediction_) throw config_error("update() without a preceding predict()");
        has_prediction_ = false;
        const Eigen::VectorXd& y = net_.output;
        if (cfg_.loss == NetLoss::mse) {
            dldz_ = y - s.y;
        } else {
            if (s.label < 0 || s.label >= y.size())
                throw data_error("label " + std::to_string(s.label) + " out of range");
            softmax(y, probs_);
            dldz_ = probs_;
            dldz_[s.label] -= 1.0;
        }
        if (!dldz_.allFinite()) throw numeric_error("non-finite loss gradient");
        mlp_backward_dz(net_, dldz_, grads_);
        for (std::size_t l = 0; l < net_.layers.size(); ++l) {
            Layer& layer = net_.layers[l];
            const Eigen::VectorXd& dz = grads_.dz[l];
            const Eigen::VectorXd& in = net_.inputs[l];
            if (cfg_.use_adam) {
                adam_rank1(layer.W, dz, in, adam_w_[l]);
                adam_vector(layer.b, dz, adam_b_[l]);
            } else {
                sgd_rank1(layer.W, dz, in);
                sgd_vector(layer.b, dz);
            }
            if (cfg_.clip) {
                const ClipSpec spec{cfg_.kappa, layer.init_bound};
                weight_clip({layer.W.data(), static_cast<std::size_t>(layer.W.size())}, spec);
                weight_clip({layer.b.data(), static_cast<std::size_t>(layer.b.size())}, spec);
            }
        }
    }

    const MlpNet& net() const { return net_; }
    MlpNet& mutable_net() { return net_; }
    std::string state_dump() const override { return describe_net(net_); }

    static std::string describe_net(const MlpNet& net) {
        std::string out;
        char buf[160];
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            const auto& W = net.layers[l].W;
            long bad = 0;
            for (Eigen::Index i = 0; i < W.size(); ++i)
                if (!std::isfinite(W.data()[i])) ++bad;
            std::snprintf(buf, sizeof(buf), "  layer %zu: %ldx%ld, |W|max=%.6g, non-finite=%ld\n",
                          l, long(W.rows()), long(W.cols()),
                          bad ? std::numeric_limits<double>::quiet_NaN() : W.cwiseAbs().maxCoeff(),
                          bad);
            out += buf;
        }
        return out;
    }

private:
    // Fused rank-1 updates: the gradient of a dense layer is dz * in^T, so
    // the optimizer steps run in one pass without materializing it.
    void sgd_rank1(Eigen::MatrixXd& W, const Eigen::VectorXd& dz, const Eigen::VectorXd& in) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            const double xj = in[j];
            double* col = W.col(j).data();
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                const double grad = dz[i] * xj;
                col[i] = (1.0 - cfg_.decay) * col[i] - cfg_.alpha * grad;
            }
        }
    }
    void sgd_vector(Eigen::VectorXd& b, const Eigen::VectorXd& dz) {
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b[i] = (1.0 - cfg_.decay) * b[i] - cfg_.alpha * dz[i];
    }
    void adam_rank1(Eigen::MatrixXd& W, const Eigen::VectorXd& dz, const Eigen::VectorXd& in,
                    AdamState& st) {
        st.t += 1;
        st.b1_pow *= st.consts.b1;
        st.b2_pow *= st.consts.b2;
        const double c1 = 1.0 - st.b1_pow;
        const double c2 = 1.0 - st.b2_pow;
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            const double xj = in[j];
            double* col = W.col(j).data();
            double* m = st.m.data() + j * W.rows();
            double* v = st.v.data() + j * W.rows();
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                const double grad = dz[i] * xj;
                m[i] = st.consts.b1 * m[i] + (1.0 - st.consts.b1) * grad;
                v[i] = st.consts.b2 * v[i] + (1.0 - st.consts.b2) * grad * grad;
                const double m_hat = m[i] / c1;
                const double v_hat = v[i] / c2;
                col[i] = (1.0 - cfg_.decay) * col[i] -
                         cfg_.alpha * m_hat / (std::sqrt(v_hat) + st.consts.eps);
            }
        }
    }
    void adam_vector(Eigen::VectorXd& b, const Eigen::VectorXd& dz, AdamState& st) {
        adam_step({b.data(), static_cast<std::size_t>(b.size())},
                  {dz.data(), static_cast<std::size_t>(dz.size())}, st, cfg_.alpha, cfg_.decay);
    }

    NetBaselineConfig cfg_;
    MlpNet net_;
    Gradients grads_;
    std::vector<AdamState> adam_w_, adam_b_;
    Eigen::VectorXd dldz_, probs_;
    bool has_prediction_ = false;
};

struct NetFadeConfig {
    std::vector<int> shape;
    Activation activation = Activation::relu;
    NetLoss loss = NetLoss::mse;
    bool adam_base = false; // Adam on hidden layers and behind the head
    double alpha = 0.01;
    double theta_lambda = 0.0;
    double gamma0 = -6.9;
    bool clamp_gamma = false;
    bool freeze_hidden = false; // train the head on fixed features
    AdamConsts adam_consts{};
};

// Composed online step: forward, backpropagate through the pre-update head
// for the hidden gradients, update the head by the adaptive-decay rule on the
// cached head features, then update hidden layers with the backbone
// optimizer.
class NetFadeLearner final : public OnlineLearner {
public:
    NetFadeLearner(const NetFadeConfig& cfg, std::uint64_t init_seed)
        : cfg_(cfg), net_(mlp_init(cfg.shape, cfg.activation, init_seed)),
          head_(net_.out_dim(), static_cast<int>(net_.head().W.cols()),
                cfg.loss == NetLoss::cross_entropy ? FadeHead::Loss::cross_entropy
                                                   : FadeHead::Loss::squared_error,
                cfg.adam_base ? FadeHead::Base::adam : FadeHead::Base::sgd, cfg.alpha,
                cfg.theta_lambda, cfg.gamma0, cfg.clamp_gamma, cfg.adam_consts) {
        resize_gradients(grads_, net_);
        if (cfg_.adam_base && !cfg_.freeze_hidden) {
            for (std::size_t l = 0; l + 1 < net_.layers.size(); ++l) {
                const auto& layer = net_.layers[l];
                adam_w_.emplace_back(static_cast<std::size_t>(layer.W.size()), cfg_.adam_consts);
                adam_b_.emplace_back(static_cast<std::size_t>(layer.b.size()), cfg_.adam_consts);
            }
        }
    }

    const Eigen::VectorXd& predict(const Eigen::VectorXd& x) override {
        has_prediction_ = true;
        return mlp_forward(net_, x);
    }

    void update(const StreamSample& s) override {
        if (!has_prediction_) throw config_error("update() without a preceding predict()");
        has_prediction_ = false;
        const Eigen::VectorXd& y = net_.output;
        const Eigen::VectorXd* probs = nullptr;
        if (cfg_.loss == NetLoss::mse) {
            delta_ = s.y - y;
            dldz_ = -delta_;
        } else {
            if (s.label < 0 || s.label >= y.size())
                throw data_error("label " + std::to_string(s.label) + " out of range");
            softmax(y, probs_);
            delta_ = -probs_;
            delta_[s.label] += 1.0;
            dldz_ = -delta_;
            probs = &probs_;
        }
        if (!delta_.allFinite()) throw numeric_error("non-finite error vector");

        // Hidden gradients through the head as it was at prediction time.
        if (!cfg_.freeze_hidden) mlp_backward_dz(net_, dldz_, grads_);

        head_.update(net_.head().W, net_.head().b, net_.head_features(), delta_, probs);

        if (cfg_.freeze_hidden) return;
        for (std::size_t l = 0; l + 1 < net_.layers.size(); ++l) {
            Layer& layer = net_.layers[l];
            const Eigen::VectorXd& dz = grads_.dz[l];
            const Eigen::VectorXd& in = net_.inputs[l];
            if (cfg_.adam_base) {
                adam_rank1(layer.W, dz, in, adam_w_[l]);
                adam_step({layer.b.data(), static_cast<std::size_t>(layer.b.size())},
                          {dz.data(), static_cast<std::size_t>(dz.size())}, adam_b_[l],
                          cfg_.alpha, 0.0);
            } else {
                for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
                    const double xj = in[j];
                    double* col = layer.W.col(j).data();
                    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
                        col[i] = col[i] - cfg_.alpha * (dz[i] * xj);
                }
                for (Eigen::Index i = 0; i < layer.b.size(); ++i)
                    layer.b[i] = layer.b[i] - cfg_.alpha * dz[i];
            }
        }
    }

    void adam_rank1(Eigen::MatrixXd& W, const Eigen::VectorXd& dz, const Eigen::VectorXd& in,
                    AdamState& st) {
        st.t += 1;
        st.b1_pow *= st.consts.b1;
        st.b2_pow *= st.consts.b2;
        const double c1 = 1.0 - st.b1_pow;
        const double c2 = 1.0 - st.b2_pow;
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            const double xj = in[j];
            double* col = W.col(j).data();
            double* m = st.m.data() + j * W.rows();
            double* v = st.v.data() + j * W.rows();
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                const double grad = dz[i] * xj;
                m[i] = st.consts.b1 * m[i] + (1.0 - st.consts.b1) * grad;
                v[i] = st.consts.b2 * v[i] + (1.0 - st.consts.b2) * grad * grad;
                const double m_hat = m[i] / c1;
                const double v_hat = v[i] / c2;
                col[i] = col[i] - cfg_.alpha * m_hat / (std::sqrt(v_hat) + st.consts.eps);
            }
        }
    }

    bool adaptive_decay() const override { return true; }
    double lambda_group_mean(const std::vector<int>& rows) const override {
        return head_.lambda_row_mean(rows);
    }
    const MlpNet& net() const { return net_; }
    MlpNet& mutable_net() { return net_; }
    const FadeHead& head() const { return head_; }
    std::string state_dump() const override { return NetBaselineLearner::describe_net(net_); }

private:
    NetFadeConfig cfg_;
    MlpNet net_;
    FadeHead head_;
    Gradients grads_;
    std::vector<AdamState> adam_w_, adam_b_;
    Eigen::VectorXd delta_, dldz_, probs_;
    bool has_prediction_ = false;
};

} // namespace fade
