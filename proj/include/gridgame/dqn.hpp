#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

#include "gridgame/mlp.hpp"
#include "gridgame/payoff.hpp"
#include "gridgame/policy_io.hpp"
#include "gridgame/replay.hpp"

namespace gridgame {

struct DqnConfig {
    std::vector<int> hidden = {64, 64};
    double lr = 1e-3;
    double gamma = 0.99;
    std::size_t replay_capacity = 100000;
    std::size_t batch = 64;
    long target_sync_period = 250;  // updates between hard target copies
};

/// Q-learning defender over the discrete threshold grid (one output per
/// level). Epsilon-greedy behavior policy; argmax ties resolve to the lowest
/// index.
class DqnAgent {
  public:
    DqnAgent(int obs_dim, int n_actions, const DqnConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          n_actions_(n_actions),
          q_(make_net(obs_dim, n_actions, cfg, seed ^ 0xD1)),
          target_q_(q_),
          opt_(cfg.lr),
          norm_(obs_dim),
          buffer_(cfg.replay_capacity) {}

    RunningNorm& norm() { return norm_; }
    const RunningNorm& norm() const { return norm_; }
    ReplayBuffer<int>& buffer() { return buffer_; }
    int n_actions() const { return n_actions_; }

    int greedy(const Eigen::VectorXd& obs_raw) const {
        const Eigen::VectorXd qv = mlp_forward(q_, norm_.normalize(obs_raw));
        int best = 0;
        for (int a = 1; a < n_actions_; ++a)
            if (qv(a) > qv(best)) best = a;  // strict: ties keep the lowest index
        return best;
    }

    DefenseAction act(const Eigen::VectorXd& obs_raw, double epsilon,
                      std::mt19937_64& rng) const {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw ValidationError("epsilon outside [0, 1]");
        if (epsilon > 0.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng) < epsilon) {
                std::uniform_int_distribution<int> ua(0, n_actions_ - 1);
                return DefenseAction{ua(rng)};
            }
        }
        return DefenseAction{greedy(obs_raw)};
    }

    /// One batch update; returns the TD loss. Hard target sync on schedule.
    double update(std::mt19937_64& rng) {
        if (buffer_.size() < cfg_.batch) return 0.0;
        const auto batch = buffer_.sample(cfg_.batch, rng);
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        double loss = 0.0;
        MlpGrads g = MlpGrads::zeros_like(q_);
        for (const auto* tr : batch) {
            const Eigen::VectorXd x = norm_.normalize(tr->obs);
            double target = tr->reward;
            if (!tr->done) {
                const Eigen::VectorXd qn = mlp_forward(target_q_, norm_.normalize(tr->next_obs));
                target += cfg_.gamma * qn.maxCoeff();
            }
            MlpCache cache;
            const Eigen::VectorXd qv = mlp_forward(q_, x, &cache);
            const double err = qv(tr->action) - target;
            loss += err * err * inv_b;
            Eigen::VectorXd dl_dy = Eigen::VectorXd::Zero(n_actions_);
            dl_dy(tr->action) = 2.0 * err * inv_b;
            mlp_backward(q_, cache, dl_dy, g);
        }
        opt_.step(q_, g);
        if (++updates_ % cfg_.target_sync_period == 0) target_q_ = q_;
        return loss;
    }

    void sync_target() { target_q_ = q_; }

    void save(std::ostream& os) const {
        os << "gridgame-policy v1 dqn\n";
        write_norm(os, norm_);
        write_mlp(os, q_);
    }
    static DqnAgent load(std::istream& is, const DqnConfig& cfg = {}) {
        std::string a, b, c;
        if (!(is >> a >> b >> c) || a != "gridgame-policy" || b != "v1" || c != "dqn")
            throw ParseError("not a dqn policy file", 0);
        RunningNorm n = read_norm(is);
        Mlp q = read_mlp(is);
        DqnAgent agent(q.input_dim(), q.output_dim(), cfg, 0);
        agent.q_ = q;
        agent.target_q_ = agent.q_;
        agent.norm_ = std::move(n);
        return agent;
    }

    const Mlp& q_net() const { return q_; }
    Mlp& mutable_q() { return q_; }
    const Mlp& target_net() const { return target_q_; }

  private:
    static Mlp make_net(int in, int out, const DqnConfig& cfg, std::uint64_t seed) {
        std::vector<int> sizes;
        sizes.push_back(in);
        for (int h : cfg.hidden) sizes.push_back(h);
        sizes.push_back(out);
        return Mlp::make(sizes, seed);
    }

    DqnConfig cfg_;
    int n_actions_;
    Mlp q_, target_q_;
    Adam opt_;
    RunningNorm norm_;
    ReplayBuffer<int> buffer_;
    long updates_ = 0;
};

/// Linear epsilon decay: 1.0 -> floor over the first `decay_frac` of
/// training steps, floor afterwards.
inline double epsilon_at(long step, long total_steps, double floor = 0.05,
                         double decay_frac = 0.5) {
    const double horizon = decay_frac * static_cast<double>(total_steps);
    if (horizon <= 0 || step >= horizon) return floor;
    return 1.0 - (1.0 - floor) * (static_cast<double>(step) / horizon);
}

}  // namespace gridgame
