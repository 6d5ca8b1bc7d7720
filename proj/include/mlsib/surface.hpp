#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mlsib/common.hpp"
#include "mlsib/grid.hpp"
#include "mlsib/mls.hpp"

namespace mlsib {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

double triangle_area(const TriMesh& mesh, std::size_t t);
double surface_area(const TriMesh& mesh);
// Signed volume by the divergence theorem; positive for outward winding.
double enclosed_volume(const TriMesh& mesh);
bool is_watertight(const TriMesh& mesh);

struct StlLoad {
    TriMesh mesh;
    std::size_t dropped_degenerate = 0;
    bool binary = false;
};

// ASCII or binary STL. Vertices are merged on exact coordinate equality.
StlLoad load_stl(const std::string& path);
StlLoad parse_stl(const std::string& bytes);
void write_stl_binary(const TriMesh& mesh, const std::string& path);
void write_stl_ascii(const TriMesh& mesh, const std::string& path);

// Geodesic sphere: each icosahedron face split into frequency^2 triangles,
// vertices projected on the sphere. 20*frequency^2 facets, outward winding.
TriMesh icosphere(const Vec3& center, double radius, int frequency);

// Frequency giving a mean edge length closest to `edge` on a sphere.
int icosphere_frequency_for_edge(double radius, double edge);

// Lagrangian markers. In 2D `area` holds the segment length and volumes are
// areas; z components stay zero.
struct MarkerSet {
    int dim = 3;
    std::vector<Vec3> position;
    std::vector<double> area;
    std::vector<Vec3> normal;
    std::vector<Vec3> desired_velocity;
    std::vector<double> volume;
    std::vector<double> edge;  // mean edge (3D) or segment length (2D)

    std::size_t size() const { return position.size(); }
    bool empty() const { return position.empty(); }
    void push(const Vec3& x, double a, const Vec3& n, double e);
};

struct MeshMarkers {
    MarkerSet markers;
    std::size_t skipped_degenerate = 0;
};

// One marker per non-degenerate triangle, at the centroid, with the
// triangle area and the right-hand-rule normal.
MeshMarkers markers_from_mesh(const TriMesh& mesh);

// 2D polylines: one marker per segment midpoint.
MarkerSet markers_from_polyline(const std::vector<Vec3>& points, bool closed);
MarkerSet circle_markers(const Vec3& center, double radius, int segments);
MarkerSet segment_markers(const Vec3& from, const Vec3& to, int segments, const Vec3& normal);

// n markers per cell on the line y = Y0, covering `extent_cells` cells from
// x = x_start; segment length h/n.
MarkerSet seed_line_markers(double Y0, int n, int extent_cells, const StaggeredGrid& grid, double x_start);
MarkerSet seed_line_markers(double Y0, int n, int extent_cells, const StaggeredGrid& grid);

// dV = A * h_l with h_l = (1/d) sum_k phi_k (dx_k + dy_k [+ dz_k]).
double marker_volume(double area, const ShapeVector& shape, const StaggeredGrid& grid);

struct ResolutionReport {
    bool defined = false;
    double mean_edge_over_h = 0.0;
    bool warning = false;
    std::string message;
};

ResolutionReport resolution_check(const MarkerSet& markers, const StaggeredGrid& grid);

// Prescribed rigid translation: x(t) = x0 + velocity*t + amplitude*sin(omega*t).
struct RigidMotion {
    Vec3 velocity{0.0, 0.0, 0.0};
    Vec3 amplitude{0.0, 0.0, 0.0};
    double omega = 0.0;

    bool moving() const;
    Vec3 displacement(double t) const;
    Vec3 velocity_at(double t) const;
    Vec3 acceleration_at(double t) const;
};

// A rigid body: reference markers at t = 0 plus its motion.
struct Body {
    MarkerSet reference;
    RigidMotion motion;
    double enclosed_volume = 0.0;  // body volume (area in 2D); 0 for open surfaces

    // Markers moved to time t with U^d set to the body velocity.
    void place(MarkerSet& markers, double t) const;
    MarkerSet at(double t) const;
};

}  // namespace mlsib
