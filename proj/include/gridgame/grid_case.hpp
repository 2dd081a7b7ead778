#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "gridgame/errors.hpp"

namespace gridgame {

enum class BusKind { slack, pv, pq };

inline const char* to_string(BusKind k) {
    switch (k) {
        case BusKind::slack: return "slack";
        case BusKind::pv: return "pv";
        case BusKind::pq: return "pq";
    }
    return "?";
}

inline BusKind bus_kind_from(const std::string& s, std::size_t line) {
    if (s == "slack") return BusKind::slack;
    if (s == "pv") return BusKind::pv;
    if (s == "pq") return BusKind::pq;
    throw ParseError("unknown bus kind '" + s + "'", line);
}

/// Network node. Loads in MW/MVAr, voltages in per-unit on base_kv.
struct Bus {
    int id = 0;  // 1-based external id
    BusKind kind = BusKind::pq;
    double base_kv = 220.0;
    double p_load = 0.0;   // MW
    double q_load = 0.0;   // MVAr
    double p_gen = 0.0;    // MW, scheduled
    double v_setpoint = 1.0;  // pu, pv/slack only
    double b_shunt = 0.0;  // pu shunt susceptance at the bus
};

/// Transmission line or fixed-ratio transformer between two buses.
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;        // pu
    double x = 0.0;        // pu
    double b_shunt = 0.0;  // pu, total line charging
    double tap = 1.0;      // fixed off-nominal ratio, from side; 1 = line
    double z_mag = 0.0;    // |Z| = sqrt(r^2 + x^2), pu
    double rating_mva = 0.0;
    bool in_service = true;
};

/// Static network description: buses, branches, system bases.
struct GridCase {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    double s_base = 100.0;    // MVA
    double f_nominal = 60.0;  // Hz

    int bus_index(int id) const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == id) return static_cast<int>(i);
        return -1;
    }
    const Bus& bus(int id) const {
        int i = bus_index(id);
        if (i < 0) throw ValidationError("unknown bus id " + std::to_string(id));
        return buses[static_cast<std::size_t>(i)];
    }
    Bus& bus(int id) {
        int i = bus_index(id);
        if (i < 0) throw ValidationError("unknown bus id " + std::to_string(id));
        return buses[static_cast<std::size_t>(i)];
    }
    int slack_index() const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].kind == BusKind::slack) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace detail

/// Buses reachable from the slack over in-service branches. Index-aligned
/// with case.buses; false entries are de-energized after line trips.
inline std::vector<bool> energized_from_slack(const GridCase& c) {
    std::vector<bool> vis(c.buses.size(), false);
    int s = c.slack_index();
    if (s < 0) return vis;
    std::queue<int> q;
    vis[static_cast<std::size_t>(s)] = true;
    q.push(s);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        int uid = c.buses[static_cast<std::size_t>(u)].id;
        for (const Branch& br : c.branches) {
            if (!br.in_service) continue;
            int other = -1;
            if (br.from_bus == uid) other = c.bus_index(br.to_bus);
            else if (br.to_bus == uid) other = c.bus_index(br.from_bus);
            if (other >= 0 && !vis[static_cast<std::size_t>(other)]) {
                vis[static_cast<std::size_t>(other)] = true;
                q.push(other);
            }
        }
    }
    return vis;
}

/// Checks every structural invariant; throws ValidationError naming the first
/// violated one. Disconnection from the slack is only flagged when
/// require_connected is set (post-trip islanding is a legal state).
inline void validate_case(const GridCase& c, bool require_connected = true) {
    if (c.buses.empty()) throw ValidationError("case has no buses");
    if (c.s_base <= 0) throw ValidationError("s_base must be positive");
    int slack_count = 0;
    for (const Bus& b : c.buses) {
        if (b.kind == BusKind::slack) ++slack_count;
        if (b.base_kv <= 0)
            throw ValidationError("bus " + std::to_string(b.id) + ": base_kv must be positive");
        if (!detail::finite(b.p_load) || !detail::finite(b.q_load))
            throw ValidationError("bus " + std::to_string(b.id) + ": non-finite load");
    }
    if (slack_count != 1)
        throw ValidationError("exactly one slack bus required, found " +
                              std::to_string(slack_count));
    for (std::size_t i = 0; i < c.buses.size(); ++i)
        for (std::size_t j = i + 1; j < c.buses.size(); ++j)
            if (c.buses[i].id == c.buses[j].id)
                throw ValidationError("duplicate bus id " + std::to_string(c.buses[i].id));
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        const Branch& br = c.branches[k];
        std::string tag = "branch " + std::to_string(k + 1);
        if (br.from_bus == br.to_bus)
            throw ValidationError(tag + ": from_bus equals to_bus");
        if (c.bus_index(br.from_bus) < 0 || c.bus_index(br.to_bus) < 0)
            throw ValidationError(tag + ": endpoint references unknown bus");
        if (br.r == 0.0 && br.x == 0.0)
            throw ValidationError(tag + ": zero impedance");
        if (std::abs(br.z_mag - std::hypot(br.r, br.x)) > 1e-12)
            throw ValidationError(tag + ": z_mag inconsistent with r, x");
        if (br.tap <= 0) throw ValidationError(tag + ": tap must be positive");
    }
    if (require_connected) {
        auto vis = energized_from_slack(c);
        for (std::size_t i = 0; i < vis.size(); ++i)
            if (!vis[i])
                throw ValidationError("bus " + std::to_string(c.buses[i].id) +
                                      " disconnected from slack (islanded)");
    }
}

inline Branch make_branch(int from, int to, double r, double x, double b, double tap = 1.0,
                          double rating = 0.0) {
    Branch br;
    br.from_bus = from;
    br.to_bus = to;
    br.r = r;
    br.x = x;
    br.b_shunt = b;
    br.tap = tap;
    br.z_mag = std::hypot(r, x);
    br.rating_mva = rating;
    return br;
}

// ---------------------------------------------------------------------------
// Case-file I/O. Line-oriented text, '#' comments, sections [system], [bus],
// [branch]; whitespace-separated numeric columns. Column order is documented
// in the README and round-trip tested.
// ---------------------------------------------------------------------------

inline GridCase parse_case(const std::string& text) {
    GridCase c;
    enum class Section { none, system, bus, branch } section = Section::none;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    bool saw_any = false;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        saw_any = true;
        if (first == "[system]") { section = Section::system; continue; }
        if (first == "[bus]") { section = Section::bus; continue; }
        if (first == "[branch]") { section = Section::branch; continue; }
        if (first.front() == '[') throw ParseError("unknown section " + first, lineno);
        switch (section) {
            case Section::none:
                throw ParseError("data before any section header", lineno);
            case Section::system: {
                // key value
                double v;
                if (!(ls >> v)) throw ParseError("expected 'key value'", lineno);
                if (first == "s_base") c.s_base = v;
                else if (first == "f_nominal") c.f_nominal = v;
                else throw ParseError("unknown system key '" + first + "'", lineno);
                break;
            }
            case Section::bus: {
                Bus b;
                std::string kind;
                std::istringstream bs(line);
                if (!(bs >> b.id >> kind >> b.base_kv >> b.p_load >> b.q_load >> b.p_gen >>
                      b.v_setpoint >> b.b_shunt))
                    throw ParseError("bus row needs 8 columns: id kind base_kv p_load q_load "
                                     "p_gen v_setpoint b_shunt",
                                     lineno);
                b.kind = bus_kind_from(kind, lineno);
                c.buses.push_back(b);
                break;
            }
            case Section::branch: {
                Branch br;
                int svc = 1;
                std::istringstream rs(line);
                if (!(rs >> br.from_bus >> br.to_bus >> br.r >> br.x >> br.b_shunt >> br.tap >>
                      br.rating_mva >> svc))
                    throw ParseError("branch row needs 8 columns: from to r x b_shunt tap "
                                     "rating_mva in_service",
                                     lineno);
                br.in_service = svc != 0;
                br.z_mag = std::hypot(br.r, br.x);
                c.branches.push_back(br);
                break;
            }
        }
    }
    if (!saw_any) throw ParseError("empty case file", lineno == 0 ? 1 : lineno);
    validate_case(c);
    return c;
}

inline std::string serialize_case(const GridCase& c) {
    std::ostringstream out;
    char buf[256];
    out << "[system]\n";
    std::snprintf(buf, sizeof buf, "s_base %.10g\nf_nominal %.10g\n", c.s_base, c.f_nominal);
    out << buf;
    out << "[bus]\n# id kind base_kv p_load q_load p_gen v_setpoint b_shunt\n";
    for (const Bus& b : c.buses) {
        std::snprintf(buf, sizeof buf, "%d %s %.10g %.10g %.10g %.10g %.10g %.10g\n", b.id,
                      to_string(b.kind), b.base_kv, b.p_load, b.q_load, b.p_gen, b.v_setpoint,
                      b.b_shunt);
        out << buf;
    }
    out << "[branch]\n# from to r x b_shunt tap rating_mva in_service\n";
    for (const Branch& br : c.branches) {
        std::snprintf(buf, sizeof buf, "%d %d %.10g %.10g %.10g %.10g %.10g %d\n", br.from_bus,
                      br.to_bus, br.r, br.x, br.b_shunt, br.tap, br.rating_mva,
                      br.in_service ? 1 : 0);
        out << buf;
    }
    return out.str();
}

/// Standard IEEE 14-bus parameters (100 MVA base). Bus 3 is a plain load bus;
/// PV buses are 2, 6 and 8. All buses labeled 220 kV so the 176/286 kV relay
/// band is exactly 0.8/1.3 pu.
inline const std::string& embedded_ieee14_text() {
    static const std::string text = R"(# IEEE 14-bus test system
[system]
s_base 100
f_nominal 60
[bus]
# id kind base_kv p_load q_load p_gen v_setpoint b_shunt
1  slack 220   0.0   0.0 232.4 1.06  0
2  pv    220  21.7  12.7  40.0 1.045 0
3  pq    220  94.2  19.0   0.0 1.0   0
4  pq    220  47.8  -3.9   0.0 1.0   0
5  pq    220   7.6   1.6   0.0 1.0   0
6  pv    220  11.2   7.5   0.0 1.07  0
7  pq    220   0.0   0.0   0.0 1.0   0
8  pv    220   0.0   0.0   0.0 1.09  0
9  pq    220  29.5  16.6   0.0 1.0   0.19
10 pq    220   9.0   5.8   0.0 1.0   0
11 pq    220   3.5   1.8   0.0 1.0   0
12 pq    220   6.1   1.6   0.0 1.0   0
13 pq    220  13.5   5.8   0.0 1.0   0
14 pq    220  14.9   5.0   0.0 1.0   0
[branch]
# from to r x b_shunt tap rating_mva in_service
1  2  0.01938 0.05917 0.0528 1     0 1
1  5  0.05403 0.22304 0.0492 1     0 1
2  3  0.04699 0.19797 0.0438 1     0 1
2  4  0.05811 0.17632 0.0340 1     0 1
2  5  0.05695 0.17388 0.0346 1     0 1
3  4  0.06701 0.17103 0.0128 1     0 1
4  5  0.01335 0.04211 0.0    1     0 1
4  7  0.0     0.20912 0.0    0.978 0 1
4  9  0.0     0.55618 0.0    0.969 0 1
5  6  0.0     0.25202 0.0    0.932 0 1
6  11 0.09498 0.19890 0.0    1     0 1
6  12 0.12291 0.25581 0.0    1     0 1
6  13 0.06615 0.13027 0.0    1     0 1
7  8  0.0     0.17615 0.0    1     0 1
7  9  0.0     0.11001 0.0    1     0 1
9  10 0.03181 0.08450 0.0    1     0 1
9  14 0.12711 0.27038 0.0    1     0 1
10 11 0.08205 0.19207 0.0    1     0 1
12 13 0.22092 0.19988 0.0    1     0 1
13 14 0.17093 0.34802 0.0    1     0 1
)";
    return text;
}

/// The embedded IEEE 14-bus case (parsed and validated on first use).
inline GridCase ieee14_case() { return parse_case(embedded_ieee14_text()); }

/// Loads and validates a case file from disk.
GridCase load_case(const std::string& path);  // defined in io.hpp

/// Returns a copy with delta_p/delta_q added to the load at `bus`.
/// Only pq (load) buses may be altered.
inline GridCase apply_load_delta(const GridCase& c, int bus_id, double delta_p_mw,
                                 double delta_q_mvar) {
    int i = c.bus_index(bus_id);
    if (i < 0) throw ValidationError("unknown bus id " + std::to_string(bus_id));
    const Bus& b = c.buses[static_cast<std::size_t>(i)];
    if (b.kind == BusKind::slack)
        throw ValidationError("load delta applied to slack bus " + std::to_string(bus_id));
    if (b.kind != BusKind::pq)
        throw ValidationError("bus " + std::to_string(bus_id) + " is not a load (pq) bus");
    GridCase out = c;
    out.buses[static_cast<std::size_t>(i)].p_load += delta_p_mw;
    out.buses[static_cast<std::size_t>(i)].q_load += delta_q_mvar;
    return out;
}

}  // namespace gridgame
