#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "gridgame/admittance.hpp"
#include "gridgame/grid_case.hpp"

using namespace gridgame;

namespace {

GridCase two_bus(double r, double x, double load_mw = 0.0, double load_mvar = 0.0) {
    GridCase c;
    Bus b1;
    b1.id = 1;
    b1.kind = BusKind::slack;
    b1.v_setpoint = 1.0;
    Bus b2;
    b2.id = 2;
    b2.kind = BusKind::pq;
    b2.p_load = load_mw;
    b2.q_load = load_mvar;
    c.buses = {b1, b2};
    c.branches = {make_branch(1, 2, r, x, 0.0)};
    return c;
}

}  // namespace

TEST_CASE("single branch r=0 x=0.1 gives B=-10 off-diagonal") {
    Admittance adm = build_admittance(two_bus(0.0, 0.1));
    CHECK(adm.g(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(adm.b(0, 1) == Catch::Approx(10.0).epsilon(1e-12));  // -(-10): off-diag is -y
    CHECK(adm.b(0, 0) == Catch::Approx(-10.0).epsilon(1e-12));
    CHECK(std::abs(adm.y(0, 1)) == Catch::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("all branches out of service zero the off-diagonals") {
    GridCase c = ieee14_case();
    for (Branch& br : c.branches) br.in_service = false;
    Admittance adm = build_admittance(c);
    for (int i = 0; i < adm.size(); ++i)
        for (int j = 0; j < adm.size(); ++j)
            if (i != j) CHECK(std::abs(adm.y(i, j)) == 0.0);
}

TEST_CASE("14-bus table matches independent recomputation to 1e-12") {
    GridCase c = ieee14_case();
    Admittance adm = build_admittance(c);
    // Direct-formula oracle: accumulate per-branch stamps from r/x/b/tap.
    const int n = static_cast<int>(c.buses.size());
    Eigen::MatrixXcd oracle = Eigen::MatrixXcd::Zero(n, n);
    for (const Branch& br : c.branches) {
        if (!br.in_service) continue;
        int f = c.bus_index(br.from_bus), t = c.bus_index(br.to_bus);
        std::complex<double> y = 1.0 / std::complex<double>(br.r, br.x);
        std::complex<double> sh(0.0, br.b_shunt / 2.0);
        oracle(f, f) += y / (br.tap * br.tap) + sh;
        oracle(t, t) += y + sh;
        oracle(f, t) -= y / br.tap;
        oracle(t, f) -= y / br.tap;
    }
    for (int i = 0; i < n; ++i)
        oracle(i, i) += std::complex<double>(0.0, c.buses[static_cast<std::size_t>(i)].b_shunt);
    CHECK((adm.y - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("off-diagonal structure is symmetric even with taps") {
    GridCase c = ieee14_case();
    Admittance adm = build_admittance(c);
    for (int i = 0; i < adm.size(); ++i)
        for (int j = i + 1; j < adm.size(); ++j)
            CHECK(std::abs(adm.y(i, j) - adm.y(j, i)) < 1e-15);
}
