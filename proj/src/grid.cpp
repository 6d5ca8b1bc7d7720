#include "mlsib/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlsib {

StaggeredGrid::StaggeredGrid(const GridConfig& config) : config_(config)
{
    if (config_.dim != 2 && config_.dim != 3)
        throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(config_.dim));
    if (!(config_.support_ratio > 0.0)) throw ConfigError("support ratio H/h must be positive");
    cell_volume_ = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (!active(a)) {
            config_.cells[a] = 1;
            if (!(config_.spacing[a] > 0.0)) config_.spacing[a] = 1.0;
            config_.periodic[a] = true;
            continue;
        }
        if (config_.cells[a] < 4)
            throw ConfigError("grid needs at least 4 cells along axis " + std::to_string(a) + ", got " +
                              std::to_string(config_.cells[a]));
        if (!(config_.spacing[a] > 0.0) || !std::isfinite(config_.spacing[a]))
            throw ConfigError("grid spacing must be positive along axis " + std::to_string(a));
        cell_volume_ *= config_.spacing[a];
    }
}

StaggeredGrid build_grid(const GridConfig& config) { return StaggeredGrid(config); }

std::array<int, 3> StaggeredGrid::node_extent(Location loc) const
{
    std::array<int, 3> ext{1, 1, 1};
    for (int a = 0; a < dim(); ++a) ext[a] = cells(a) + (static_cast<int>(loc) == a ? 1 : 0);
    return ext;
}

Vec3 StaggeredGrid::node_position(Location loc, const std::array<int, 3>& idx) const
{
    Vec3 x = config_.origin;
    for (int a = 0; a < dim(); ++a) {
        const double shift = static_cast<int>(loc) == a ? 0.0 : 0.5;
        x[a] += (idx[a] + shift) * spacing(a);
    }
    return x;
}

Stencil StaggeredGrid::stencil_for(const Vec3& X, Location loc) const
{
    Stencil st;
    st.location = loc;

    std::array<std::vector<int>, 3> idx;     // unwrapped lattice indices per axis
    std::array<std::vector<double>, 3> pos;  // matching coordinates
    for (int a = 0; a < 3; ++a) {
        if (!active(a)) {
            idx[a] = {0};
            pos[a] = {config_.origin[a]};
            continue;
        }
        const double H = support_radius(a);
        const double rel = X[a] - config_.origin[a];
        if (!std::isfinite(rel)) throw NumericalError("non-finite marker coordinate");
        if (!periodic(a) && (rel < H || rel > length(a) - H)) {
            throw StencilTruncationError("marker at coordinate " + std::to_string(X[a]) + " on axis " +
                                         std::to_string(a) + " is closer than H=" + std::to_string(H) +
                                         " to a non-periodic boundary");
        }
        const double shift = static_cast<int>(loc) == a ? 0.0 : 0.5;
        const double s = rel / spacing(a) - shift;
        const int nearest = static_cast<int>(std::floor(s + 0.5));
        const int reach = static_cast<int>(std::floor(config_.support_ratio + 1e-12));
        for (int m = nearest - reach; m <= nearest + reach; ++m) {
            const double x = config_.origin[a] + (m + shift) * spacing(a);
            if (std::abs(x - X[a]) <= H * (1.0 + 1e-12)) {
                idx[a].push_back(m);
                pos[a].push_back(x);
            }
        }
    }

    const auto wrap = [&](int a, int m) {
        if (!active(a) || !periodic(a)) return m;
        const int n = cells(a);
        return ((m % n) + n) % n;
    };

    st.nodes.reserve(idx[0].size() * idx[1].size() * idx[2].size());
    for (std::size_t c = 0; c < idx[2].size(); ++c)
        for (std::size_t b = 0; b < idx[1].size(); ++b)
            for (std::size_t a = 0; a < idx[0].size(); ++a) {
                StencilNode node;
                node.index = {wrap(0, idx[0][a]), wrap(1, idx[1][b]), wrap(2, idx[2][c])};
                node.position = {pos[0][a], pos[1][b], pos[2][c]};
                st.nodes.push_back(node);
            }
    return st;
}

StaggeredGrid StaggeredGrid::rescaled(double factor) const
{
    GridConfig cfg = config_;
    for (int a = 0; a < dim(); ++a) {
        cfg.spacing[a] *= factor;
        cfg.origin[a] *= factor;
    }
    return StaggeredGrid(cfg);
}

Field::Field(const std::array<int, 3>& extent, const std::array<int, 3>& ghost) : extent_(extent), ghost_(ghost)
{
    const std::size_t n0 = static_cast<std::size_t>(extent[0] + 2 * ghost[0]);
    const std::size_t n1 = static_cast<std::size_t>(extent[1] + 2 * ghost[1]);
    const std::size_t n2 = static_cast<std::size_t>(extent[2] + 2 * ghost[2]);
    stride_ = {1, n0, n0 * n1};
    data_.assign(n0 * n1 * n2, 0.0);
}

void Field::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Field make_field(const StaggeredGrid& grid, Location loc)
{
    std::array<int, 3> ghost{0, 0, 0};
    for (int a = 0; a < grid.dim(); ++a) ghost[a] = 1;
    return Field(grid.node_extent(loc), ghost);
}

FlowState make_flow_state(const StaggeredGrid& grid)
{
    FlowState s;
    for (int a = 0; a < grid.dim(); ++a) {
        s.u[a] = make_field(grid, face_of(a));
        s.force[a] = make_field(grid, face_of(a));
    }
    s.p = make_field(grid, Location::Cell);
    return s;
}

}  // namespace mlsib
