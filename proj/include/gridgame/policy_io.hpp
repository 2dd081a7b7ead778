#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "gridgame/errors.hpp"
#include "gridgame/mlp.hpp"
#include "gridgame/replay.hpp"

namespace gridgame {

// Policy files are plain text with a layer-size header; doubles printed with
// %.17g round-trip exactly.

namespace detail {

inline void write_double(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace detail

inline void write_mlp(std::ostream& os, const Mlp& net) {
    os << "mlp " << net.layer_count() << "\n";
    for (std::size_t l = 0; l < net.layer_count(); ++l)
        os << net.w[l].rows() << " " << net.w[l].cols() << "\n";
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (Eigen::Index i = 0; i < net.w[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < net.w[l].cols(); ++j) {
                detail::write_double(os, net.w[l](i, j));
                os << " ";
            }
            detail::write_double(os, net.b[l](i));
            os << "\n";
        }
    }
}

inline Mlp read_mlp(std::istream& is) {
    std::string tag;
    std::size_t layers = 0;
    if (!(is >> tag >> layers) || tag != "mlp")
        throw ParseError("expected 'mlp <layers>' header", 0);
    Mlp net;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes(layers);
    for (auto& [r, c] : shapes)
        if (!(is >> r >> c)) throw ParseError("bad mlp shape row", 0);
    for (auto& [r, c] : shapes) {
        Eigen::MatrixXd w(r, c);
        Eigen::VectorXd b(r);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j)
                if (!(is >> w(i, j))) throw ParseError("bad mlp weight", 0);
            if (!(is >> b(i))) throw ParseError("bad mlp bias", 0);
        }
        net.w.push_back(std::move(w));
        net.b.push_back(std::move(b));
    }
    return net;
}

inline void write_norm(std::ostream& os, const RunningNorm& n) {
    os << "norm " << n.count() << " " << (n.frozen() ? 1 : 0) << " " << n.mean().size() << "\n";
    for (Eigen::Index i = 0; i < n.mean().size(); ++i) {
        detail::write_double(os, n.mean()(i));
        os << " ";
        detail::write_double(os, n.m2()(i));
        os << "\n";
    }
}

inline RunningNorm read_norm(std::istream& is) {
    std::string tag;
    long count = 0;
    int frozen = 0;
    Eigen::Index dim = 0;
    if (!(is >> tag >> count >> frozen >> dim) || tag != "norm")
        throw ParseError("expected 'norm' header", 0);
    Eigen::VectorXd mean(dim), m2(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        if (!(is >> mean(i) >> m2(i))) throw ParseError("bad norm row", 0);
    RunningNorm n;
    n.restore(count, std::move(mean), std::move(m2), frozen != 0);
    return n;
}

}  // namespace gridgame
