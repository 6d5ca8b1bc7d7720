#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mlsib/common.hpp"

namespace mlsib {

// Where a lattice of unknowns lives on the staggered mesh. FaceX holds the
// x-velocity (x = i*h, y = (j+1/2)*h, z = (k+1/2)*h), and so on.
enum class Location { Cell = -1, FaceX = 0, FaceY = 1, FaceZ = 2 };

inline Location face_of(int axis) { return static_cast<Location>(axis); }

struct GridConfig {
    int dim = 3;
    std::array<int, 3> cells{0, 0, 0};
    std::array<double, 3> spacing{0.0, 0.0, 0.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::array<bool, 3> periodic{false, false, false};
    // H / h. The support radius scales with the spacing.
    double support_ratio = 1.5;
};

struct StencilNode {
    std::array<int, 3> index;  // wrapped into the stored range
    Vec3 position;             // unwrapped, within H of the query point per axis
};

struct Stencil {
    Location location = Location::Cell;
    std::vector<StencilNode> nodes;
};

class StaggeredGrid {
public:
    StaggeredGrid() = default;
    explicit StaggeredGrid(const GridConfig& config);

    const GridConfig& config() const { return config_; }
    int dim() const { return config_.dim; }
    int cells(int axis) const { return config_.cells[axis]; }
    double spacing(int axis) const { return config_.spacing[axis]; }
    double h() const { return config_.spacing[0]; }
    bool periodic(int axis) const { return config_.periodic[axis]; }
    bool active(int axis) const { return axis < config_.dim; }
    const Vec3& origin() const { return config_.origin; }
    double length(int axis) const { return config_.cells[axis] * config_.spacing[axis]; }
    double support_ratio() const { return config_.support_ratio; }
    double support_radius(int axis) const { return config_.support_ratio * config_.spacing[axis]; }

    // Volume (area in 2D) of one Eulerian cell.
    double cell_volume() const { return cell_volume_; }

    // Number of stored nodes per axis for a lattice, excluding ghosts. Along
    // its own axis a face lattice has cells+1 nodes; the last one duplicates
    // node 0 when that axis is periodic.
    std::array<int, 3> node_extent(Location loc) const;
    Vec3 node_position(Location loc, const std::array<int, 3>& idx) const;

    // Tensor-product support: nodes of the lattice with |x_k - X| <= H in
    // every active coordinate. Throws StencilTruncationError when X is closer
    // than H to a non-periodic face.
    Stencil stencil_for(const Vec3& X, Location loc) const;

    // Same grid with every spacing multiplied by `factor` (H follows).
    StaggeredGrid rescaled(double factor) const;

private:
    GridConfig config_{};
    double cell_volume_ = 0.0;
};

StaggeredGrid build_grid(const GridConfig& config);

// Cell-centred or face-centred array with one ghost layer on every active
// axis. Index (i, j, k) runs from -ghost to extent-1+ghost per axis.
class Field {
public:
    Field() = default;
    Field(const std::array<int, 3>& extent, const std::array<int, 3>& ghost);

    double& operator()(int i, int j, int k) { return data_[offset(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[offset(i, j, k)]; }

    std::size_t offset(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i + ghost_[0]) + stride_[1] * static_cast<std::size_t>(j + ghost_[1]) +
               stride_[2] * static_cast<std::size_t>(k + ghost_[2]);
    }
    std::size_t offset(const std::array<int, 3>& idx) const { return offset(idx[0], idx[1], idx[2]); }

    const std::array<int, 3>& extent() const { return extent_; }
    const std::array<int, 3>& ghost() const { return ghost_; }
    std::size_t stride(int axis) const { return stride_[axis]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    bool empty() const { return data_.empty(); }
    void fill(double value);

private:
    std::array<int, 3> extent_{0, 0, 0};
    std::array<int, 3> ghost_{0, 0, 0};
    std::array<std::size_t, 3> stride_{1, 0, 0};
    std::vector<double> data_;
};

Field make_field(const StaggeredGrid& grid, Location loc);

struct FlowState {
    std::array<Field, 3> u;      // face velocities; u[2] empty in 2D
    Field p;                     // cell pressure
    std::array<Field, 3> force;  // IBM volume force, face-centred
    double time = 0.0;
};

FlowState make_flow_state(const StaggeredGrid& grid);

}  // namespace mlsib
