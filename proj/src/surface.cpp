#include "mlsib/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace mlsib {

namespace {

const Vec3& vert(const TriMesh& mesh, int i) { return mesh.vertices[static_cast<std::size_t>(i)]; }

}  // namespace

double triangle_area(const TriMesh& mesh, std::size_t t)
{
    const auto& tri = mesh.triangles[t];
    const Vec3& a = vert(mesh, tri[0]);
    return 0.5 * norm(cross(vert(mesh, tri[1]) - a, vert(mesh, tri[2]) - a));
}

double surface_area(const TriMesh& mesh)
{
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) total += triangle_area(mesh, t);
    return total;
}

double enclosed_volume(const TriMesh& mesh)
{
    double v = 0.0;
    for (const auto& tri : mesh.triangles)
        v += dot(vert(mesh, tri[0]), cross(vert(mesh, tri[1]), vert(mesh, tri[2])));
    return v / 6.0;
}

bool is_watertight(const TriMesh& mesh)
{
    // Every directed edge must be matched by its reverse exactly once.
    std::map<std::pair<int, int>, int> edges;
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) ++edges[{tri[e], tri[(e + 1) % 3]}];
    for (const auto& [edge, count] : edges) {
        if (count != 1) return false;
        auto it = edges.find({edge.second, edge.first});
        if (it == edges.end() || it->second != 1) return false;
    }
    return !mesh.triangles.empty();
}

TriMesh icosphere(const Vec3& center, double radius, int frequency)
{
    if (frequency < 1) throw ConfigError("icosphere frequency must be >= 1");
    if (!(radius > 0.0)) throw ConfigError("icosphere radius must be positive");
    const double t = std::numbers::phi;
    const std::array<Vec3, 12> base{{{-1, t, 0},
                                     {1, t, 0},
                                     {-1, -t, 0},
                                     {1, -t, 0},
                                     {0, -1, t},
                                     {0, 1, t},
                                     {0, -1, -t},
                                     {0, 1, -t},
                                     {t, 0, -1},
                                     {t, 0, 1},
                                     {-t, 0, -1},
                                     {-t, 0, 1}}};
    const std::array<std::array<int, 3>, 20> faces{{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}}};

    TriMesh mesh;
    std::map<std::array<long long, 3>, int> index;
    const auto add = [&](Vec3 p) {
        const double len = norm(p);
        p = (radius / len) * p;
        const double q = 1e9 / radius;
        const std::array<long long, 3> key{std::llround(p[0] * q), std::llround(p[1] * q), std::llround(p[2] * q)};
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(center + p);
        return it->second;
    };

    const int m = frequency;
    for (const auto& f : faces) {
        Vec3 A = base[static_cast<std::size_t>(f[0])];
        Vec3 B = base[static_cast<std::size_t>(f[1])];
        Vec3 C = base[static_cast<std::size_t>(f[2])];
        if (dot(cross(B - A, C - A), A + B + C) < 0.0) std::swap(B, C);
        std::vector<int> ids(static_cast<std::size_t>((m + 1) * (m + 1)), -1);
        const auto id = [&](int i, int j) -> int& { return ids[static_cast<std::size_t>(i * (m + 1) + j)]; };
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j)
                id(i, j) = add(A + (static_cast<double>(i) / m) * (B - A) + (static_cast<double>(j) / m) * (C - A));
        for (int i = 0; i < m; ++i)
            for (int j = 0; i + j < m; ++j) {
                mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                if (i + j < m - 1) mesh.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
    }
    return mesh;
}

int icosphere_frequency_for_edge(double radius, double edge)
{
    if (!(edge > 0.0)) throw ConfigError("target edge length must be positive");
    // Arc subtended by an icosahedron edge is atan(2) ~ 1.1071 rad.
    return std::max(1, static_cast<int>(std::lround(radius * std::atan(2.0) / edge)));
}

void MarkerSet::push(const Vec3& x, double a, const Vec3& n, double e)
{
    position.push_back(x);
    area.push_back(a);
    normal.push_back(n);
    desired_velocity.push_back({0.0, 0.0, 0.0});
    volume.push_back(0.0);
    edge.push_back(e);
}

MeshMarkers markers_from_mesh(const TriMesh& mesh)
{
    MeshMarkers out;
    out.markers.dim = 3;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int i : tri)
            if (i < 0 || static_cast<std::size_t>(i) >= mesh.vertices.size())
                throw ConfigError("triangle " + std::to_string(t) + " references a missing vertex");
        const Vec3& a = vert(mesh, tri[0]);
        const Vec3& b = vert(mesh, tri[1]);
        const Vec3& c = vert(mesh, tri[2]);
        const Vec3 n = cross(b - a, c - a);
        const double len = norm(n);
        const double area = 0.5 * len;
        const double scale = std::max({norm(b - a), norm(c - a), norm(c - b)});
        if (!(area > 0.5e-14 * scale * scale)) {
            ++out.skipped_degenerate;
            continue;
        }
        const Vec3 centroid = (1.0 / 3.0) * (a + b + c);
        const double mean_edge = (norm(b - a) + norm(c - b) + norm(a - c)) / 3.0;
        out.markers.push(centroid, area, (1.0 / len) * n, mean_edge);
    }
    return out;
}

MarkerSet markers_from_polyline(const std::vector<Vec3>& points, bool closed)
{
    MarkerSet ms;
    ms.dim = 2;
    const std::size_t n = points.size();
    const std::size_t segs = closed ? n : (n == 0 ? 0 : n - 1);
    for (std::size_t s = 0; s < segs; ++s) {
        const Vec3& a = points[s];
        const Vec3& b = points[(s + 1) % n];
        const Vec3 d = b - a;
        const double len = std::hypot(d[0], d[1]);
        if (!(len > 0.0)) continue;
        // Right-hand normal; counter-clockwise closed curves point outward.
        const Vec3 normal{d[1] / len, -d[0] / len, 0.0};
        ms.push({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.0}, len, normal, len);
    }
    return ms;
}

MarkerSet circle_markers(const Vec3& center, double radius, int segments)
{
    if (segments < 3) throw ConfigError("a circle needs at least 3 segments");
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(segments));
    for (int s = 0; s < segments; ++s) {
        const double th = 2.0 * std::numbers::pi * s / segments;
        pts.push_back({center[0] + radius * std::cos(th), center[1] + radius * std::sin(th), 0.0});
    }
    return markers_from_polyline(pts, true);
}

MarkerSet segment_markers(const Vec3& from, const Vec3& to, int segments, const Vec3& normal)
{
    if (segments < 1) throw ConfigError("a segment needs at least one marker");
    MarkerSet ms;
    ms.dim = 2;
    const Vec3 d = to - from;
    const double len = std::hypot(d[0], d[1]) / segments;
    for (int s = 0; s < segments; ++s) {
        const double f = (s + 0.5) / segments;
        ms.push({from[0] + f * d[0], from[1] + f * d[1], 0.0}, len, normal, len);
    }
    return ms;
}

MarkerSet seed_line_markers(double Y0, int n, int extent_cells, const StaggeredGrid& grid, double x_start)
{
    if (n < 1) throw ConfigError("need at least one marker per cell");
    if (extent_cells < 1) throw ConfigError("line extent must cover at least one cell");
    MarkerSet ms;
    ms.dim = 2;
    const double h = grid.spacing(0);
    const double ds = h / n;
    const int count = n * extent_cells;
    for (int l = 0; l < count; ++l) ms.push({x_start + (l + 0.5) * ds, Y0, 0.0}, ds, {0.0, 1.0, 0.0}, ds);
    return ms;
}

MarkerSet seed_line_markers(double Y0, int n, int extent_cells, const StaggeredGrid& grid)
{
    return seed_line_markers(Y0, n, extent_cells, grid, grid.origin()[0]);
}

double marker_volume(double area, const ShapeVector& shape, const StaggeredGrid& grid)
{
    if (shape.phi.empty()) throw NumericalError("marker volume needs a non-empty stencil");
    double spacing_sum = 0.0;
    for (int a = 0; a < grid.dim(); ++a) spacing_sum += grid.spacing(a);
    double hl = 0.0;
    for (double p : shape.phi) hl += p * spacing_sum;
    hl /= grid.dim();
    return area * hl;
}

ResolutionReport resolution_check(const MarkerSet& markers, const StaggeredGrid& grid)
{
    ResolutionReport r;
    if (markers.empty()) {
        r.message = "no markers; edge ratio undefined";
        return r;
    }
    double sum = 0.0;
    for (double e : markers.edge) sum += e;
    r.defined = true;
    r.mean_edge_over_h = sum / static_cast<double>(markers.size()) / grid.h();
    r.warning = r.mean_edge_over_h > 1.0;
    std::ostringstream msg;
    msg << "mean marker edge / h = " << r.mean_edge_over_h;
    if (r.warning) msg << " exceeds 1.0; the surface is under-resolved relative to the grid";
    r.message = msg.str();
    return r;
}

bool RigidMotion::moving() const
{
    return norm(velocity) > 0.0 || (norm(amplitude) > 0.0 && omega != 0.0);
}

Vec3 RigidMotion::displacement(double t) const { return t * velocity + std::sin(omega * t) * amplitude; }

Vec3 RigidMotion::velocity_at(double t) const { return velocity + (omega * std::cos(omega * t)) * amplitude; }

Vec3 RigidMotion::acceleration_at(double t) const { return (-omega * omega * std::sin(omega * t)) * amplitude; }

void Body::place(MarkerSet& markers, double t) const
{
    const Vec3 shift = motion.displacement(t);
    const Vec3 vel = motion.velocity_at(t);
    if (markers.size() != reference.size()) markers = reference;
    for (std::size_t l = 0; l < reference.size(); ++l) {
        markers.position[l] = reference.position[l] + shift;
        markers.desired_velocity[l] = vel;
    }
}

MarkerSet Body::at(double t) const
{
    MarkerSet ms = reference;
    place(ms, t);
    return ms;
}

}  // namespace mlsib
