#pragma once

// Deterministic generators for the three non-stationary streams. Each task
// owns its random streams (structure and per-step draws are separate,
// documented roles of the run seed), so a stream is fully determined by
// (seed, task parameters) and identical no matter which learner consumes it.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fade/errors.hpp"
#include "fade/idx.hpp"
#include "fade/net.hpp"
#include "fade/rng.hpp"

namespace fade {

// One (input, target) pair. `y` carries regression targets; `label` is used
// by classification streams.
struct StreamSample {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    int label = -1;
};

// ---------------------------------------------------------------------------
// Linear tracking: d = 20, 5 relevant weights at +-1, one of them flips sign
// every 20 steps, Gaussian inputs, optional Gaussian target noise.
// ---------------------------------------------------------------------------
class LinearTrackingTask {
public:
    static constexpr int dim = 20;
    static constexpr int n_relevant = 5;
    static constexpr long flip_period = 20;

    LinearTrackingTask(std::uint64_t seed, double noise_std)
        : stream_rng_(derive_seed(seed, seed_role_stream)), noise_std_(noise_std) {
        Rng init_rng(derive_seed(seed, seed_role_task_init));
        w_star_ = Eigen::VectorXd::Zero(dim);
        // Partial Fisher-Yates for the relevant index set.
        std::array<int, dim> idx;
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n_relevant; ++i) {
            const int j = i + static_cast<int>(init_rng.below(dim - i));
            std::swap(idx[i], idx[j]);
        }
        relevant_.assign(idx.begin(), idx.begin() + n_relevant);
        std::sort(relevant_.begin(), relevant_.end());
        for (int r : relevant_) w_star_[r] = init_rng.sign();
        sample_.x.resize(dim);
        sample_.y.resize(1);
    }

    const StreamSample& next() {
        if (t_ > 0 && t_ % flip_period == 0) {
            const int pick = relevant_[stream_rng_.below(n_relevant)];
            w_star_[pick] = -w_star_[pick];
        }
        for (int i = 0; i < dim; ++i) sample_.x[i] = stream_rng_.gaussian();
        double y = w_star_.dot(sample_.x);
        if (noise_std_ > 0.0) y += noise_std_ * stream_rng_.gaussian();
        sample_.y[0] = y;
        ++t_;
        return sample_;
    }

    const Eigen::VectorXd& w_star() const { return w_star_; }
    const std::vector<int>& relevant_indices() const { return relevant_; }
    long steps_emitted() const { return t_; }

private:
    Rng stream_rng_;
    double noise_std_;
    Eigen::VectorXd w_star_;
    std::vector<int> relevant_;
    long t_ = 0;
    StreamSample sample_;
};

// ---------------------------------------------------------------------------
// Teacher-student tracking: a fixed 32-256-20 ReLU teacher whose head rows
// split into stable / fast / slow groups; fast rows get an elementwise random
// sign flip every 500 steps, slow rows every 7500, stable rows never change.
// ---------------------------------------------------------------------------
class TeacherStudentTask {
public:
    static constexpr int in_dim = 32;
    static constexpr int hidden_dim = 256;
    static constexpr int out_dim = 20;
    static constexpr long fast_period = 500;
    static constexpr long slow_period = 7500; // 15 * fast_period

    explicit TeacherStudentTask(std::uint64_t seed)
        : stream_rng_(derive_seed(seed, seed_role_stream)),
          teacher_(mlp_init({in_dim, hidden_dim, out_dim}, Activation::relu,
                            derive_seed(seed, seed_role_task_init))) {
        for (int k = 0; k < 6; ++k) stable_.push_back(k);
        for (int k = 6; k < 13; ++k) fast_.push_back(k);
        for (int k = 13; k < out_dim; ++k) slow_.push_back(k);
        sample_.x.resize(in_dim);
        sample_.y.resize(out_dim);
    }

    const StreamSample& next() {
        if (t_ > 0) {
            if (t_ % fast_period == 0) perturb_rows(fast_);
            if (t_ % slow_period == 0) perturb_rows(slow_);
        }
        for (int i = 0; i < in_dim; ++i) sample_.x[i] = stream_rng_.gaussian();
        sample_.y = mlp_forward(teacher_, sample_.x);
        ++t_;
        return sample_;
    }

    const MlpNet& teacher() const { return teacher_; }
    const std::vector<int>& stable_rows() const { return stable_; }
    const std::vector<int>& fast_rows() const { return fast_; }
    const std::vector<int>& slow_rows() const { return slow_; }

private:
    void perturb_rows(const std::vector<int>& rows) {
        Eigen::MatrixXd& W = teacher_.head().W;
        for (int k : rows)
            for (int j = 0; j < W.cols(); ++j) W(k, j) *= stream_rng_.sign();
    }

    Rng stream_rng_;
    MlpNet teacher_;
    std::vector<int> stable_, fast_, slow_;
    long t_ = 0;
    StreamSample sample_;
};

// ---------------------------------------------------------------------------
// Label-permuted image stream: images sampled uniformly with replacement, the
// label mapping re-randomized every `period` steps. In partial mode the first
// `stable_classes` classes keep their labels forever and only the rest
// permute among themselves.
// ---------------------------------------------------------------------------

// Uniform random bijection on [0, perm.size()), fixing the first
// `stable_prefix` entries as identity (partial mode). Unbiased Fisher-Yates.
inline void permutation_refresh(std::vector<int>& perm, Rng& rng, int stable_prefix = 0) {
    const int n = static_cast<int>(perm.size());
    for (int c = 0; c < stable_prefix; ++c) perm[c] = c;
    std::vector<int> pool;
    for (int c = stable_prefix; c < n; ++c) pool.push_back(c);
    for (int i = static_cast<int>(pool.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(pool[i], pool[j]);
    }
    for (int c = stable_prefix; c < n; ++c) perm[c] = pool[c - stable_prefix];
}

class EmnistStream {
public:
    static constexpr long default_period = 2500;
    static constexpr int default_stable_classes = 24;

    EmnistStream(const EmnistDataset* data, std::uint64_t seed, bool partial,
                 long period = default_period)
        : data_(data), rng_(derive_seed(seed, seed_role_stream)), period_(period),
          stable_prefix_(partial ? default_stable_classes : 0) {
        if (data_ == nullptr || data_->size() == 0) throw data_error("EmnistStream: empty dataset");
        perm_.resize(data_->num_classes);
        sample_.x.resize(data_->images.pixels_per_image());
        sample_.y.resize(0);
    }

    const StreamSample& next() {
        if (t_ % period_ == 0) permutation_refresh(perm_, rng_, stable_prefix_);
        const int i = static_cast<int>(rng_.below(static_cast<std::uint64_t>(data_->size())));
        data_->images.scaled_image(i, sample_.x.data());
        sample_.label = perm_[data_->labels.labels[i]];
        ++t_;
        return sample_;
    }

    const std::vector<int>& perm() const { return perm_; }
    long period() const { return period_; }
    int stable_prefix() const { return stable_prefix_; }

private:
    const EmnistDataset* data_;
    Rng rng_;
    long period_;
    int stable_prefix_;
    std::vector<int> perm_;
    long t_ = 0;
    StreamSample sample_;
};

} // namespace fade
