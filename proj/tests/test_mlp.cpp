#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gridgame/mlp.hpp"

using namespace gridgame;

namespace {

// Quadratic loss spec: L(y) = c.y + 0.5 * sum d_i y_i^2, dL/dy = c + d*y.
struct QuadLoss {
    Eigen::VectorXd c, d;
    double value(const Eigen::VectorXd& y) const {
        return c.dot(y) + 0.5 * (d.array() * y.array().square()).sum();
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& y) const {
        return c + (d.array() * y.array()).matrix();
    }
};

double loss_at(const Mlp& net, const Eigen::VectorXd& x, const QuadLoss& loss) {
    return loss.value(mlp_forward(net, x));
}

// Central finite differences over every parameter, h = 1e-5.
// Relative error metric: |analytic - fd| / max(1, |analytic|).
double max_grad_rel_error(Mlp net, const Eigen::VectorXd& x, const QuadLoss& loss) {
    MlpCache cache;
    const Eigen::VectorXd y = mlp_forward(net, x, &cache);
    MlpGrads g = MlpGrads::zeros_like(net);
    mlp_backward(net, cache, loss.grad(y), g);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        for (Eigen::Index i = 0; i < net.w[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < net.w[l].cols(); ++j) {
                const double saved = net.w[l](i, j);
                net.w[l](i, j) = saved + h;
                const double lp = loss_at(net, x, loss);
                net.w[l](i, j) = saved - h;
                const double lm = loss_at(net, x, loss);
                net.w[l](i, j) = saved;
                const double fd = (lp - lm) / (2.0 * h);
                const double a = g.w[l](i, j);
                worst = std::max(worst, std::abs(a - fd) / std::max(1.0, std::abs(a)));
            }
            const double saved = net.b[l](i);
            net.b[l](i) = saved + h;
            const double lp = loss_at(net, x, loss);
            net.b[l](i) = saved - h;
            const double lm = loss_at(net, x, loss);
            net.b[l](i) = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double a = g.b[l](i);
            worst = std::max(worst, std::abs(a - fd) / std::max(1.0, std::abs(a)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("zero weights forward to the output bias") {
    Mlp net = Mlp::make({3, 4, 2}, 7);
    for (auto& w : net.w) w.setZero();
    net.b[0].setZero();
    net.b[1] << 0.5, -1.5;
    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 3.0;
    const Eigen::VectorXd y = mlp_forward(net, x);
    CHECK(y(0) == 0.5);
    CHECK(y(1) == -1.5);
}

TEST_CASE("single tanh layer composes as configured") {
    Mlp net = Mlp::make({1, 1, 1}, 3);
    net.w[0](0, 0) = 1.0;
    net.b[0](0) = 0.0;
    net.w[1](0, 0) = 1.0;
    net.b[1](0) = 0.0;
    Eigen::VectorXd x(1);
    x << 0.7;
    CHECK(mlp_forward(net, x)(0) == Catch::Approx(std::tanh(0.7)).margin(1e-15));
}

TEST_CASE("fixed seed and input give bit-identical outputs") {
    Mlp a = Mlp::make({6, 64, 64, 1}, 12345);
    Mlp b = Mlp::make({6, 64, 64, 1}, 12345);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
    CHECK(mlp_forward(a, x)(0) == mlp_forward(b, x)(0));
    Mlp c = Mlp::make({6, 64, 64, 1}, 54321);
    CHECK(mlp_forward(a, x)(0) != mlp_forward(c, x)(0));
}

TEST_CASE("dimension mismatch throws") {
    Mlp net = Mlp::make({3, 4, 2}, 7);
    Eigen::VectorXd x(5);
    x.setZero();
    CHECK_THROWS_AS(mlp_forward(net, x), DimensionError);
}

TEST_CASE("gradients match central finite differences at 10 random points") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    // Shapes used by the actor, critic and Q networks.
    const std::vector<std::vector<int>> shapes = {{6, 64, 64, 1}, {7, 64, 64, 1}, {6, 64, 64, 11}};
    for (const auto& shape : shapes) {
        for (int point = 0; point < 10; ++point) {
            Mlp net = Mlp::make(shape, rng());
            Eigen::VectorXd x(shape.front());
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
            QuadLoss loss;
            loss.c = Eigen::VectorXd::NullaryExpr(shape.back(), [&](Eigen::Index) { return u(rng); });
            loss.d = Eigen::VectorXd::NullaryExpr(shape.back(), [&](Eigen::Index) { return u(rng); });
            CHECK(max_grad_rel_error(net, x, loss) < 1e-4);
        }
    }
}

TEST_CASE("constant loss gives zero gradients") {
    Mlp net = Mlp::make({4, 8, 2}, 5);
    Eigen::VectorXd x(4);
    x << 0.1, 0.2, 0.3, 0.4;
    MlpCache cache;
    mlp_forward(net, x, &cache);
    MlpGrads g = MlpGrads::zeros_like(net);
    mlp_backward(net, cache, Eigen::VectorXd::Zero(2), g);
    for (const auto& w : g.w) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& b : g.b) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear net with quadratic loss matches the closed-form gradient") {
    // Single linear layer y = Wx + b, L = 0.5 ||y||^2: dL/dW = y x^T, dL/db = y.
    Mlp net = Mlp::make({3, 2}, 11);
    Eigen::VectorXd x(3);
    x << 1.0, -0.5, 2.0;
    MlpCache cache;
    const Eigen::VectorXd y = mlp_forward(net, x, &cache);
    MlpGrads g = MlpGrads::zeros_like(net);
    mlp_backward(net, cache, y, g);
    const Eigen::MatrixXd expected_w = y * x.transpose();
    CHECK((g.w[0] - expected_w).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((g.b[0] - y).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("backward returns dL/dinput") {
    Mlp net = Mlp::make({2, 3, 1}, 21);
    Eigen::VectorXd x(2);
    x << 0.4, -0.7;
    MlpCache cache;
    mlp_forward(net, x, &cache);
    MlpGrads g = MlpGrads::zeros_like(net);
    Eigen::VectorXd one(1);
    one << 1.0;
    const Eigen::VectorXd dx = mlp_backward(net, cache, one, g);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fd = (mlp_forward(net, xp)(0) - mlp_forward(net, xm)(0)) / (2.0 * h);
        CHECK(dx(i) == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("adam descends a simple quadratic") {
    Mlp net = Mlp::make({1, 1}, 2);
    Adam opt(0.05);
    Eigen::VectorXd x(1);
    x << 1.0;
    for (int i = 0; i < 500; ++i) {
        MlpCache cache;
        const Eigen::VectorXd y = mlp_forward(net, x, &cache);
        MlpGrads g = MlpGrads::zeros_like(net);
        mlp_backward(net, cache, y, g);  // L = y^2/2, pulls y to 0
        opt.step(net, g);
    }
    CHECK(std::abs(mlp_forward(net, x)(0)) < 1e-3);
}
