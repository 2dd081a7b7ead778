#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

#include "gridgame/mlp.hpp"
#include "gridgame/payoff.hpp"
#include "gridgame/policy_io.hpp"
#include "gridgame/replay.hpp"

namespace gridgame {

struct DdpgConfig {
    std::vector<int> hidden = {64, 64};
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double gamma = 0.99;
    double tau = 0.005;
    double noise_sigma = 0.4;  // exploration noise, degC
    std::size_t replay_capacity = 100000;
    std::size_t batch = 64;
};

struct DdpgLosses {
    double critic_loss = 0.0;
    double actor_objective = 0.0;  // mean Q under the current actor
};

/// Deterministic-policy-gradient attacker over the continuous falsified-
/// temperature action. The actor's linear output is squashed to [0, dT_max];
/// the critic sees the normalized observation plus the action rescaled to
/// [0, 1].
class DdpgAgent {
  public:
    DdpgAgent(int obs_dim, const DdpgConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          actor_(make_net(obs_dim, 1, cfg, seed ^ 0xA1)),
          critic_(make_net(obs_dim + 1, 1, cfg, seed ^ 0xC1)),
          target_actor_(actor_),
          target_critic_(critic_),
          actor_opt_(cfg.actor_lr),
          critic_opt_(cfg.critic_lr),
          norm_(obs_dim),
          buffer_(cfg.replay_capacity) {}

    RunningNorm& norm() { return norm_; }
    const RunningNorm& norm() const { return norm_; }
    ReplayBuffer<double>& buffer() { return buffer_; }
    const DdpgConfig& config() const { return cfg_; }

    /// Greedy action, optionally with clipped Gaussian exploration noise.
    AttackAction act(const Eigen::VectorXd& obs_raw, bool explore, std::mt19937_64& rng) const {
        const Eigen::VectorXd x = norm_.normalize(obs_raw);
        double a = squash(mlp_forward(actor_, x)(0));
        if (explore && cfg_.noise_sigma > 0.0) {
            std::normal_distribution<double> n(0.0, cfg_.noise_sigma);
            a += n(rng);
        }
        return clamp_attack(a);
    }

    /// One gradient step on a replay batch; returns the batch losses.
    DdpgLosses update(std::mt19937_64& rng) {
        DdpgLosses out;
        if (buffer_.size() < cfg_.batch) return out;
        const auto batch = buffer_.sample(cfg_.batch, rng);
        const double inv_b = 1.0 / static_cast<double>(batch.size());

        // Critic regression toward r + gamma (1-done) Q'(s', mu'(s')).
        MlpGrads cg = MlpGrads::zeros_like(critic_);
        for (const auto* tr : batch) {
            const Eigen::VectorXd x = norm_.normalize(tr->obs);
            const Eigen::VectorXd xn = norm_.normalize(tr->next_obs);
            double target = tr->reward;
            if (!tr->done) {
                const double an = squash(mlp_forward(target_actor_, xn)(0));
                target += cfg_.gamma * mlp_forward(target_critic_, critic_input(xn, an))(0);
            }
            MlpCache cache;
            const double q = mlp_forward(critic_, critic_input(x, tr->action), &cache)(0);
            const double err = q - target;
            out.critic_loss += err * err * inv_b;
            Eigen::VectorXd dl_dy(1);
            dl_dy(0) = 2.0 * err * inv_b;
            mlp_backward(critic_, cache, dl_dy, cg);
        }
        critic_opt_.step(critic_, cg);

        // Actor ascent on Q(s, mu(s)): chain dQ/da through the critic input.
        MlpGrads ag = MlpGrads::zeros_like(actor_);
        for (const auto* tr : batch) {
            const Eigen::VectorXd x = norm_.normalize(tr->obs);
            MlpCache acache;
            const double y = mlp_forward(actor_, x, &acache)(0);
            const double a = squash(y);
            MlpCache ccache;
            const double q = mlp_forward(critic_, critic_input(x, a), &ccache)(0);
            out.actor_objective += q * inv_b;
            Eigen::VectorXd dq(1);
            dq(0) = 1.0;
            MlpGrads scratch = MlpGrads::zeros_like(critic_);
            const Eigen::VectorXd dq_din = mlp_backward(critic_, ccache, dq, scratch);
            const double dq_da_scaled = dq_din(x.size());  // action slot
            // a_scaled = (tanh(y)+1)/2
            const double th = std::tanh(y);
            const double da_dy = 0.5 * (1.0 - th * th);
            Eigen::VectorXd dl_dy(1);
            dl_dy(0) = -dq_da_scaled * da_dy * inv_b;  // minimize -Q
            mlp_backward(actor_, acache, dl_dy, ag);
        }
        actor_opt_.step(actor_, ag);

        soft_update(target_actor_, actor_, cfg_.tau);
        soft_update(target_critic_, critic_, cfg_.tau);
        return out;
    }

    void save(std::ostream& os) const {
        os << "gridgame-policy v1 ddpg\n";
        write_norm(os, norm_);
        write_mlp(os, actor_);
        write_mlp(os, critic_);
    }
    static DdpgAgent load(std::istream& is, const DdpgConfig& cfg = {}) {
        std::string a, b, c;
        if (!(is >> a >> b >> c) || a != "gridgame-policy" || b != "v1" || c != "ddpg")
            throw ParseError("not a ddpg policy file", 0);
        RunningNorm n = read_norm(is);
        Mlp actor = read_mlp(is);
        Mlp critic = read_mlp(is);
        DdpgAgent agent(actor.input_dim(), cfg, 0);
        agent.actor_ = actor;
        agent.critic_ = critic;
        agent.target_actor_ = agent.actor_;
        agent.target_critic_ = agent.critic_;
        agent.norm_ = std::move(n);
        return agent;
    }

    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic() const { return target_critic_; }
    Mlp& mutable_critic() { return critic_; }
    void set_tau(double tau) { cfg_.tau = tau; }
    void set_noise(double sigma) { cfg_.noise_sigma = sigma; }

    static double squash(double y) { return (std::tanh(y) + 1.0) * 0.5 * kDeltaTMax; }

  private:
    static Mlp make_net(int in, int out, const DdpgConfig& cfg, std::uint64_t seed) {
        std::vector<int> sizes;
        sizes.push_back(in);
        for (int h : cfg.hidden) sizes.push_back(h);
        sizes.push_back(out);
        return Mlp::make(sizes, seed);
    }
    static Eigen::VectorXd critic_input(const Eigen::VectorXd& x, double action) {
        Eigen::VectorXd in(x.size() + 1);
        in.head(x.size()) = x;
        in(x.size()) = action / kDeltaTMax;
        return in;
    }

    DdpgConfig cfg_;
    Mlp actor_, critic_, target_actor_, target_critic_;
    Adam actor_opt_, critic_opt_;
    RunningNorm norm_;
    ReplayBuffer<double> buffer_;
};

}  // namespace gridgame
