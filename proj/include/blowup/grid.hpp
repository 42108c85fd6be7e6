#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blowup {

enum class GridKind { half_line_even, half_line_odd, periodic };

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Strictly increasing 1D node set.  Half-line grids start at 0 and carry a
// parity convention for how fields extend to negative coordinates; periodic
// grids cover [0, period).
struct Grid1D {
    std::vector<double> nodes;
    GridKind kind = GridKind::half_line_even;
    double period = 0.0;  // periodic only

    std::size_t size() const { return nodes.size(); }
    double span() const {
        return kind == GridKind::periodic ? period : nodes.back();
    }
    double min_spacing() const {
        double h = nodes[1] - nodes[0];
        for (std::size_t i = 2; i < nodes.size(); ++i)
            h = std::min(h, nodes[i] - nodes[i - 1]);
        if (kind == GridKind::periodic) h = std::min(h, period - nodes.back());
        return h;
    }
};

// Half-line grids use the stretched map z_i = outer * sinh(s*xi_i)/sinh(s)
// over uniform xi in [0,1]; s = 0 degenerates to the uniform map.  Periodic
// grids are uniform on [0, period).
inline Grid1D build_grid(GridKind kind, std::size_t n_nodes, double outer_bound,
                         double stretch = 0.0) {
    if (n_nodes < 8) throw GridError("build_grid: need at least 8 nodes");
    if (!(outer_bound > 0.0)) throw GridError("build_grid: outer bound must be positive");
    if (stretch < 0.0) throw GridError("build_grid: stretch must be nonnegative");

    Grid1D g;
    g.kind = kind;
    g.nodes.resize(n_nodes);
    if (kind == GridKind::periodic) {
        g.period = outer_bound;
        for (std::size_t i = 0; i < n_nodes; ++i)
            g.nodes[i] = outer_bound * static_cast<double>(i) / static_cast<double>(n_nodes);
    } else {
        const double denom = static_cast<double>(n_nodes - 1);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            double xi = static_cast<double>(i) / denom;
            g.nodes[i] = (stretch == 0.0)
                             ? outer_bound * xi
                             : outer_bound * std::sinh(stretch * xi) / std::sinh(stretch);
        }
        g.nodes[0] = 0.0;
        g.nodes[n_nodes - 1] = outer_bound;
    }
    return g;
}

}  // namespace blowup
