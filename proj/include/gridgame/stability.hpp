#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gridgame/admittance.hpp"
#include "gridgame/power_flow.hpp"

namespace gridgame {

/// Per-line fast voltage stability index. load_bus is the receiving bus whose
/// reactive demand enters the formula; value >= 1 flags proximity to collapse.
struct FvsiEntry {
    int line = 0;      // index into case.branches
    int load_bus = 0;  // bus id
    double value = 0.0;
};

struct FvsiReport {
    std::vector<FvsiEntry> entries;
    std::optional<FvsiEntry> max_entry;
    double computed_at = 0.0;  // simulation time, s
};

/// FVSI of one line: |4 Z^2 Q_i (B^2 + G^2) / (V_i^2 B)|, all in pu.
/// G, B are the series admittance components of the line itself; Q_i is the
/// reactive demand at load_bus. The magnitude convention absorbs the sign of
/// B (negative for inductive lines in admittance convention) so the > 1
/// instability threshold applies directly.
inline double fvsi_line(const PowerFlowSolution& sol, const GridCase& c, int branch_index,
                        int load_bus_id) {
    const Branch& br = c.branches.at(static_cast<std::size_t>(branch_index));
    if (!br.in_service)
        throw ValidationError("fvsi_line: branch " + std::to_string(branch_index + 1) +
                              " is out of service");
    const auto [g, b] = branch_series_gb(br);
    if (b == 0.0)
        throw DegenerateLine("fvsi_line: zero series susceptance on branch " +
                             std::to_string(branch_index + 1));
    const int i = c.bus_index(load_bus_id);
    if (i < 0) throw ValidationError("fvsi_line: unknown bus " + std::to_string(load_bus_id));
    const double vi = sol.v_mag.at(static_cast<std::size_t>(i));
    if (vi <= 0.0)
        throw ValidationError("fvsi_line: bus " + std::to_string(load_bus_id) +
                              " is de-energized");
    const double qi = c.buses[static_cast<std::size_t>(i)].q_load / c.s_base;
    const double z2 = br.z_mag * br.z_mag;
    return std::abs(4.0 * z2 * qi * (b * b + g * g) / (vi * vi * b));
}

/// Receiving end of a branch under the solved flows (the end power flows
/// into); falls back to to_bus when the branch carries nothing.
inline int receiving_bus(const GridCase& c, const PowerFlowSolution& sol, int branch_index) {
    const Branch& br = c.branches.at(static_cast<std::size_t>(branch_index));
    const BranchFlow& fl = sol.flows.at(static_cast<std::size_t>(branch_index));
    return fl.p_from >= 0.0 ? br.to_bus : br.from_bus;
}

/// FVSI for every in-service energized line. Degenerate lines (B = 0) are
/// skipped; they cannot carry the index.
inline FvsiReport compute_fvsi_report(const PowerFlowSolution& sol, const GridCase& c,
                                      double t = 0.0) {
    FvsiReport rep;
    rep.computed_at = t;
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        const Branch& br = c.branches[k];
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from_bus), to = c.bus_index(br.to_bus);
        if (!sol.energized[static_cast<std::size_t>(f)] ||
            !sol.energized[static_cast<std::size_t>(to)])
            continue;
        const auto [g, b] = branch_series_gb(br);
        if (b == 0.0) continue;
        FvsiEntry e;
        e.line = static_cast<int>(k);
        e.load_bus = receiving_bus(c, sol, static_cast<int>(k));
        e.value = fvsi_line(sol, c, static_cast<int>(k), e.load_bus);
        rep.entries.push_back(e);
    }
    for (const FvsiEntry& e : rep.entries) {
        if (!rep.max_entry || e.value > rep.max_entry->value ||
            (e.value == rep.max_entry->value && e.load_bus < rep.max_entry->load_bus))
            rep.max_entry = e;
    }
    return rep;
}

struct UnstableBus {
    int bus = 0;      // load bus of the max-FVSI entry
    int partner = 0;  // other end of that line
    double value = 0.0;
};

/// Load bus of the highest-FVSI entry; ties broken toward the lowest bus id.
inline UnstableBus most_unstable_bus(const FvsiReport& rep, const GridCase& c) {
    if (rep.entries.empty()) throw ValidationError("most_unstable_bus: empty report");
    const FvsiEntry* best = &rep.entries.front();
    for (const FvsiEntry& e : rep.entries) {
        if (e.value > best->value || (e.value == best->value && e.load_bus < best->load_bus))
            best = &e;
    }
    const Branch& br = c.branches[static_cast<std::size_t>(best->line)];
    UnstableBus out;
    out.bus = best->load_bus;
    out.partner = br.from_bus == best->load_bus ? br.to_bus : br.from_bus;
    out.value = best->value;
    return out;
}

}  // namespace gridgame
