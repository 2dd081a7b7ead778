#pragma once

#include <cstddef>
#include <random>
#include <vector>
#include <Eigen/Dense>

#include "gridgame/errors.hpp"

namespace gridgame {

/// One environment interaction. Action type is the agent's own (a scalar for
/// the continuous attacker, an index for the discrete defender).
template <class ActionT>
struct Transition {
    Eigen::VectorXd obs;
    ActionT action{};
    double reward = 0.0;
    Eigen::VectorXd next_obs;
    bool done = false;
};

/// Ring buffer with uniform batch sampling (without replacement within a
/// batch).
template <class ActionT>
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
        if (capacity_ == 0) throw ValidationError("replay capacity must be positive");
    }

    void push(Transition<ActionT> t) {
        if (store_.size() < capacity_) {
            store_.push_back(std::move(t));
        } else {
            store_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Partial Fisher-Yates over an index vector; distinct indices per batch.
    std::vector<const Transition<ActionT>*> sample(std::size_t batch, std::mt19937_64& rng) const {
        if (batch == 0 || batch > store_.size())
            throw ValidationError("replay sample: batch " + std::to_string(batch) +
                                  " of " + std::to_string(store_.size()));
        std::vector<std::size_t> idx(store_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<const Transition<ActionT>*> out;
        out.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            std::uniform_int_distribution<std::size_t> u(i, idx.size() - 1);
            std::swap(idx[i], idx[u(rng)]);
            out.push_back(&store_[idx[i]]);
        }
        return out;
    }

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition<ActionT>> store_;
};

/// Running mean/variance observation normalizer (Welford). Updated during
/// training, frozen at evaluation.
class RunningNorm {
  public:
    explicit RunningNorm(int dim = 0)
        : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

    void update(const Eigen::VectorXd& x) {
        if (frozen_) return;
        if (mean_.size() == 0) {
            mean_ = Eigen::VectorXd::Zero(x.size());
            m2_ = Eigen::VectorXd::Zero(x.size());
        }
        ++n_;
        const Eigen::VectorXd d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += (d.array() * (x - mean_).array()).matrix();
    }

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
        if (n_ < 2) return x;
        const Eigen::ArrayXd var = m2_.array() / static_cast<double>(n_ - 1);
        return ((x - mean_).array() / (var + 1e-8).sqrt()).matrix();
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    long count() const { return n_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& m2() const { return m2_; }
    void restore(long n, Eigen::VectorXd mean, Eigen::VectorXd m2, bool frozen) {
        n_ = n;
        mean_ = std::move(mean);
        m2_ = std::move(m2);
        frozen_ = frozen;
    }

  private:
    long n_ = 0;
    Eigen::VectorXd mean_, m2_;
    bool frozen_ = false;
};

}  // namespace gridgame
