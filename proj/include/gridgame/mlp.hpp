#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>
#include <Eigen/Dense>

#include "gridgame/errors.hpp"
#include "gridgame/rng.hpp"

namespace gridgame {

/// Fully-connected network, tanh hidden layers, linear output.
/// Plain doubles throughout; forward and backward are exact and deterministic.
struct Mlp {
    std::vector<Eigen::MatrixXd> w;  // w[l]: rows = layer_out, cols = layer_in
    std::vector<Eigen::VectorXd> b;

    int input_dim() const { return w.empty() ? 0 : static_cast<int>(w.front().cols()); }
    int output_dim() const { return w.empty() ? 0 : static_cast<int>(w.back().rows()); }
    std::size_t layer_count() const { return w.size(); }

    static Mlp make(const std::vector<int>& sizes, std::uint64_t seed) {
        if (sizes.size() < 2) throw ValidationError("mlp needs at least input and output sizes");
        Mlp net;
        std::mt19937_64 rng(detail::splitmix64(seed));
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const int in = sizes[l], out = sizes[l + 1];
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            std::uniform_real_distribution<double> u(-bound, bound);
            Eigen::MatrixXd wl(out, in);
            Eigen::VectorXd bl(out);
            for (int i = 0; i < out; ++i) {
                for (int j = 0; j < in; ++j) wl(i, j) = u(rng);
                bl(i) = u(rng);
            }
            net.w.push_back(std::move(wl));
            net.b.push_back(std::move(bl));
        }
        return net;
    }
};

/// Activations kept from a forward pass; acts[0] is the input, acts[l+1] the
/// output of layer l (post-tanh on hidden layers).
struct MlpCache {
    std::vector<Eigen::VectorXd> acts;
};

inline Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x,
                                   MlpCache* cache = nullptr) {
    if (x.size() != net.input_dim())
        throw DimensionError("mlp_forward: input size " + std::to_string(x.size()) +
                             " != " + std::to_string(net.input_dim()));
    Eigen::VectorXd a = x;
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(a);
    }
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        a = (net.w[l] * a + net.b[l]).eval();
        if (l + 1 < net.w.size()) a = a.array().tanh().matrix();
        if (cache) cache->acts.push_back(a);
    }
    return a;
}

struct MlpGrads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    static MlpGrads zeros_like(const Mlp& net) {
        MlpGrads g;
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            g.w.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
            g.b.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
        }
        return g;
    }
    void scale(double s) {
        for (auto& m : w) m *= s;
        for (auto& v : b) v *= s;
    }
};

/// Reverse pass: accumulates dL/dparams into `g` given dL/doutput, and
/// returns dL/dinput (used to chain the actor through the critic).
inline Eigen::VectorXd mlp_backward(const Mlp& net, const MlpCache& cache,
                                    const Eigen::VectorXd& dl_dy, MlpGrads& g) {
    if (cache.acts.size() != net.w.size() + 1)
        throw DimensionError("mlp_backward: cache does not match network depth");
    Eigen::VectorXd delta = dl_dy;
    for (std::size_t l = net.w.size(); l-- > 0;) {
        if (l + 1 < net.w.size()) {
            // chain through tanh: act stored post-activation
            const Eigen::ArrayXd a = cache.acts[l + 1].array();
            delta = (delta.array() * (1.0 - a * a)).matrix();
        }
        g.w[l] += delta * cache.acts[l].transpose();
        g.b[l] += delta;
        delta = (net.w[l].transpose() * delta).eval();
    }
    return delta;
}

/// Adam with bias correction; one instance per network.
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    MlpGrads m, v;

    explicit Adam(double learning_rate = 1e-3) : lr(learning_rate) {}

    void step(Mlp& net, const MlpGrads& g) {
        if (m.w.empty()) {
            m = MlpGrads::zeros_like(net);
            v = MlpGrads::zeros_like(net);
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            m.w[l] = beta1 * m.w[l] + (1.0 - beta1) * g.w[l];
            v.w[l] = (beta2 * v.w[l].array() + (1.0 - beta2) * g.w[l].array().square()).matrix();
            m.b[l] = beta1 * m.b[l] + (1.0 - beta1) * g.b[l];
            v.b[l] = (beta2 * v.b[l].array() + (1.0 - beta2) * g.b[l].array().square()).matrix();
            net.w[l].array() -=
                lr * (m.w[l].array() / bc1) / ((v.w[l].array() / bc2).sqrt() + eps);
            net.b[l].array() -=
                lr * (m.b[l].array() / bc1) / ((v.b[l].array() / bc2).sqrt() + eps);
        }
    }
};

/// theta_target <- tau * theta + (1 - tau) * theta_target
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
    for (std::size_t l = 0; l < online.w.size(); ++l) {
        target.w[l] = tau * online.w[l] + (1.0 - tau) * target.w[l];
        target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
    }
}

}  // namespace gridgame
