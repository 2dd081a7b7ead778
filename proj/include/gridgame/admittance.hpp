#pragma once

#include <complex>
#include <Eigen/Dense>

#include "gridgame/grid_case.hpp"

namespace gridgame {

/// Dense bus admittance table. G(i,j) + jB(i,j) in pu, indexed by bus
/// position in case.buses. Off-diagonals are symmetric for undirected lines
/// (fixed taps skew only the diagonals); out-of-service branches contribute
/// nothing.
struct Admittance {
    Eigen::MatrixXcd y;

    double g(int i, int j) const { return y(i, j).real(); }
    double b(int i, int j) const { return y(i, j).imag(); }
    int size() const { return static_cast<int>(y.rows()); }
};

inline Admittance build_admittance(const GridCase& c) {
    const int n = static_cast<int>(c.buses.size());
    Admittance adm;
    adm.y = Eigen::MatrixXcd::Zero(n, n);
    for (const Branch& br : c.branches) {
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from_bus);
        const int t = c.bus_index(br.to_bus);
        const std::complex<double> z(br.r, br.x);
        const std::complex<double> ys = 1.0 / z;
        const std::complex<double> ysh(0.0, br.b_shunt / 2.0);
        const double tap = br.tap;
        adm.y(f, f) += ys / (tap * tap) + ysh;
        adm.y(t, t) += ys + ysh;
        adm.y(f, t) += -ys / tap;
        adm.y(t, f) += -ys / tap;
    }
    for (int i = 0; i < n; ++i)
        adm.y(i, i) += std::complex<double>(0.0, c.buses[static_cast<std::size_t>(i)].b_shunt);
    return adm;
}

/// Series conductance/susceptance of one branch (the G_ij, B_ij of the line
/// itself, used by the stability index).
inline std::pair<double, double> branch_series_gb(const Branch& br) {
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    return {ys.real(), ys.imag()};
}

}  // namespace gridgame
