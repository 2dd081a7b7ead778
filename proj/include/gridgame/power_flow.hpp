#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>
#include <Eigen/Dense>

#include "gridgame/admittance.hpp"
#include "gridgame/grid_case.hpp"

namespace gridgame {

/// Directed per-branch flows; from-side and to-side, MW/MVAr.
/// p_from + p_to is the series loss of the branch (>= 0).
struct BranchFlow {
    double p_from = 0.0;
    double q_from = 0.0;
    double p_to = 0.0;
    double q_to = 0.0;
};

/// Solved operating point. De-energized buses carry v_mag = 0.
struct PowerFlowSolution {
    std::vector<double> v_mag;   // pu, aligned with case.buses
    std::vector<double> v_ang;   // rad
    std::vector<BranchFlow> flows;  // aligned with case.branches; zero if out of service
    std::vector<bool> energized;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;  // worst residual, pu
};

struct PowerFlowOptions {
    double tolerance = 1e-8;  // pu
    int max_iter = 30;
};

namespace detail {

// Net scheduled injection at bus i, pu: generation minus load.
inline void scheduled_injections(const GridCase& c, std::vector<double>& p,
                                 std::vector<double>& q) {
    const std::size_t n = c.buses.size();
    p.assign(n, 0.0);
    q.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = (c.buses[i].p_gen - c.buses[i].p_load) / c.s_base;
        q[i] = (-c.buses[i].q_load) / c.s_base;
    }
}

}  // namespace detail

/// Injection at bus i implied by voltages: P_i = V_i sum_j V_j (G cos + B sin).
inline void calculated_injections(const Admittance& adm, const std::vector<double>& v,
                                  const std::vector<double>& th, std::vector<double>& p_calc,
                                  std::vector<double>& q_calc) {
    const int n = adm.size();
    p_calc.assign(static_cast<std::size_t>(n), 0.0);
    q_calc.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double pi = 0.0, qi = 0.0;
        for (int j = 0; j < n; ++j) {
            const double g = adm.g(i, j), b = adm.b(i, j);
            if (g == 0.0 && b == 0.0) continue;
            const double d = th[static_cast<std::size_t>(i)] - th[static_cast<std::size_t>(j)];
            const double c = std::cos(d), s = std::sin(d);
            pi += v[static_cast<std::size_t>(j)] * (g * c + b * s);
            qi += v[static_cast<std::size_t>(j)] * (g * s - b * c);
        }
        p_calc[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] * pi;
        q_calc[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] * qi;
    }
}

/// Recomputes branch flows term-by-term from solved voltages.
inline void fill_branch_flows(const GridCase& c, const std::vector<double>& v,
                              const std::vector<double>& th, const std::vector<bool>& energized,
                              std::vector<BranchFlow>& flows) {
    flows.assign(c.branches.size(), BranchFlow{});
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        const Branch& br = c.branches[k];
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from_bus);
        const int t = c.bus_index(br.to_bus);
        if (!energized[static_cast<std::size_t>(f)] || !energized[static_cast<std::size_t>(t)])
            continue;
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> ysh(0.0, br.b_shunt / 2.0);
        const double tap = br.tap;
        const std::complex<double> vf = std::polar(v[static_cast<std::size_t>(f)],
                                                   th[static_cast<std::size_t>(f)]);
        const std::complex<double> vt = std::polar(v[static_cast<std::size_t>(t)],
                                                   th[static_cast<std::size_t>(t)]);
        // 2x2 branch admittance with from-side tap.
        const std::complex<double> yff = ys / (tap * tap) + ysh;
        const std::complex<double> yft = -ys / tap;
        const std::complex<double> ytf = -ys / tap;
        const std::complex<double> ytt = ys + ysh;
        const std::complex<double> sf = vf * std::conj(yff * vf + yft * vt);
        const std::complex<double> st = vt * std::conj(ytf * vf + ytt * vt);
        flows[k].p_from = sf.real() * c.s_base;
        flows[k].q_from = sf.imag() * c.s_base;
        flows[k].p_to = st.real() * c.s_base;
        flows[k].q_to = st.imag() * c.s_base;
    }
}

/// Full Newton-Raphson in polar form over the energized subnetwork.
/// Non-convergence is reported in the solution, not thrown: the caller
/// (blackout detection) treats it as a signal.
inline PowerFlowSolution solve_power_flow(const GridCase& c, bool flat_start = true,
                                          const PowerFlowSolution* warm = nullptr,
                                          const PowerFlowOptions& opt = {}) {
    const int n = static_cast<int>(c.buses.size());
    PowerFlowSolution sol;
    sol.energized = energized_from_slack(c);
    sol.v_mag.assign(static_cast<std::size_t>(n), 0.0);
    sol.v_ang.assign(static_cast<std::size_t>(n), 0.0);

    // Start point: setpoints for slack/pv, 1 pu for pq (flat), or warm values.
    const bool use_warm = !flat_start && warm != nullptr &&
                          warm->v_mag.size() == static_cast<std::size_t>(n) &&
                          warm->converged;
    for (int i = 0; i < n; ++i) {
        const Bus& b = c.buses[static_cast<std::size_t>(i)];
        if (!sol.energized[static_cast<std::size_t>(i)]) continue;
        if (use_warm && warm->energized[static_cast<std::size_t>(i)] &&
            warm->v_mag[static_cast<std::size_t>(i)] > 0.0) {
            sol.v_mag[static_cast<std::size_t>(i)] = warm->v_mag[static_cast<std::size_t>(i)];
            sol.v_ang[static_cast<std::size_t>(i)] = warm->v_ang[static_cast<std::size_t>(i)];
        } else {
            sol.v_mag[static_cast<std::size_t>(i)] =
                (b.kind == BusKind::pq) ? 1.0 : b.v_setpoint;
            sol.v_ang[static_cast<std::size_t>(i)] = 0.0;
        }
        if (b.kind != BusKind::pq) sol.v_mag[static_cast<std::size_t>(i)] = b.v_setpoint;
    }

    const Admittance adm = build_admittance(c);
    std::vector<double> p_spec, q_spec;
    detail::scheduled_injections(c, p_spec, q_spec);

    // Unknowns: theta at energized non-slack buses, V at energized pq buses.
    std::vector<int> ang_idx, mag_idx;
    for (int i = 0; i < n; ++i) {
        if (!sol.energized[static_cast<std::size_t>(i)]) continue;
        const BusKind k = c.buses[static_cast<std::size_t>(i)].kind;
        if (k != BusKind::slack) ang_idx.push_back(i);
        if (k == BusKind::pq) mag_idx.push_back(i);
    }
    const int na = static_cast<int>(ang_idx.size());
    const int nm = static_cast<int>(mag_idx.size());
    const int m = na + nm;

    std::vector<double> p_calc, q_calc;
    Eigen::VectorXd mis(m);
    Eigen::MatrixXd jac(m, m);

    auto compute_mismatch = [&]() {
        calculated_injections(adm, sol.v_mag, sol.v_ang, p_calc, q_calc);
        for (int a = 0; a < na; ++a) {
            const int i = ang_idx[static_cast<std::size_t>(a)];
            mis(a) = p_spec[static_cast<std::size_t>(i)] - p_calc[static_cast<std::size_t>(i)];
        }
        for (int b = 0; b < nm; ++b) {
            const int i = mag_idx[static_cast<std::size_t>(b)];
            mis(na + b) =
                q_spec[static_cast<std::size_t>(i)] - q_calc[static_cast<std::size_t>(i)];
        }
        return m == 0 ? 0.0 : mis.cwiseAbs().maxCoeff();
    };

    sol.max_mismatch = compute_mismatch();
    if (sol.max_mismatch <= opt.tolerance) {
        sol.converged = true;
        fill_branch_flows(c, sol.v_mag, sol.v_ang, sol.energized, sol.flows);
        return sol;
    }

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        // Jacobian blocks dP/dth dP/dV ; dQ/dth dQ/dV.
        jac.setZero();
        for (int a = 0; a < na; ++a) {
            const int i = ang_idx[static_cast<std::size_t>(a)];
            const double vi = sol.v_mag[static_cast<std::size_t>(i)];
            for (int b2 = 0; b2 < na; ++b2) {
                const int j = ang_idx[static_cast<std::size_t>(b2)];
                const double g = adm.g(i, j), bij = adm.b(i, j);
                if (i == j) {
                    jac(a, b2) = -q_calc[static_cast<std::size_t>(i)] -
                                 bij * vi * vi;
                } else {
                    const double d = sol.v_ang[static_cast<std::size_t>(i)] -
                                     sol.v_ang[static_cast<std::size_t>(j)];
                    jac(a, b2) = vi * sol.v_mag[static_cast<std::size_t>(j)] *
                                 (g * std::sin(d) - bij * std::cos(d));
                }
            }
            for (int b2 = 0; b2 < nm; ++b2) {
                const int j = mag_idx[static_cast<std::size_t>(b2)];
                const double g = adm.g(i, j), bij = adm.b(i, j);
                if (i == j) {
                    jac(a, na + b2) = p_calc[static_cast<std::size_t>(i)] / vi + g * vi;
                } else {
                    const double d = sol.v_ang[static_cast<std::size_t>(i)] -
                                     sol.v_ang[static_cast<std::size_t>(j)];
                    jac(a, na + b2) = vi * (g * std::cos(d) + bij * std::sin(d));
                }
            }
        }
        for (int a = 0; a < nm; ++a) {
            const int i = mag_idx[static_cast<std::size_t>(a)];
            const double vi = sol.v_mag[static_cast<std::size_t>(i)];
            for (int b2 = 0; b2 < na; ++b2) {
                const int j = ang_idx[static_cast<std::size_t>(b2)];
                const double g = adm.g(i, j), bij = adm.b(i, j);
                if (i == j) {
                    jac(na + a, b2) = p_calc[static_cast<std::size_t>(i)] - g * vi * vi;
                } else {
                    const double d = sol.v_ang[static_cast<std::size_t>(i)] -
                                     sol.v_ang[static_cast<std::size_t>(j)];
                    jac(na + a, b2) = -vi * sol.v_mag[static_cast<std::size_t>(j)] *
                                      (g * std::cos(d) + bij * std::sin(d));
                }
            }
            for (int b2 = 0; b2 < nm; ++b2) {
                const int j = mag_idx[static_cast<std::size_t>(b2)];
                const double g = adm.g(i, j), bij = adm.b(i, j);
                if (i == j) {
                    jac(na + a, na + b2) = q_calc[static_cast<std::size_t>(i)] / vi - bij * vi;
                } else {
                    const double d = sol.v_ang[static_cast<std::size_t>(i)] -
                                     sol.v_ang[static_cast<std::size_t>(j)];
                    jac(na + a, na + b2) = vi * (g * std::sin(d) - bij * std::cos(d));
                }
            }
        }

        Eigen::VectorXd dx = jac.partialPivLu().solve(mis);
        if (!dx.allFinite()) break;  // singular Jacobian: collapse signal
        for (int a = 0; a < na; ++a)
            sol.v_ang[static_cast<std::size_t>(ang_idx[static_cast<std::size_t>(a)])] += dx(a);
        for (int b2 = 0; b2 < nm; ++b2) {
            double& v = sol.v_mag[static_cast<std::size_t>(mag_idx[static_cast<std::size_t>(b2)])];
            v += dx(na + b2);
            if (v < 1e-3) v = 1e-3;  // keep magnitudes positive during iteration
        }

        sol.iterations = iter;
        sol.max_mismatch = compute_mismatch();
        if (!std::isfinite(sol.max_mismatch)) break;
        if (sol.max_mismatch <= opt.tolerance) {
            sol.converged = true;
            break;
        }
    }

    if (sol.converged)
        fill_branch_flows(c, sol.v_mag, sol.v_ang, sol.energized, sol.flows);
    return sol;
}

/// Total generation, load and series loss of a solved case, MW.
/// At a converged solution generation = load + losses.
struct PowerBalance {
    double generation_mw = 0.0;
    double load_mw = 0.0;
    double loss_mw = 0.0;
};

inline PowerBalance power_balance(const GridCase& c, const PowerFlowSolution& sol) {
    PowerBalance pb;
    std::vector<double> p_calc, q_calc;
    const Admittance adm = build_admittance(c);
    calculated_injections(adm, sol.v_mag, sol.v_ang, p_calc, q_calc);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        if (!sol.energized[i]) continue;
        const Bus& b = c.buses[i];
        pb.load_mw += b.p_load;
        if (b.kind == BusKind::slack)
            pb.generation_mw += p_calc[i] * c.s_base + b.p_load;
        else
            pb.generation_mw += b.p_gen;
    }
    for (std::size_t k = 0; k < c.branches.size(); ++k)
        pb.loss_mw += sol.flows[k].p_from + sol.flows[k].p_to;
    return pb;
}

}  // namespace gridgame
