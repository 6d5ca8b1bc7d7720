#include "mlsib/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace mlsib {

namespace {

const char* axis_name(int a) { return a == 0 ? "x" : (a == 1 ? "y" : "z"); }

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed)
{
    for (const auto& [k, v] : t) {
        (void)v;
        if (!allowed.count(std::string(k.str())))
            throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
    }
}

const toml::table* subtable(const toml::table& t, const char* key)
{
    const toml::node* n = t.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("'") + key + "' must be a table");
    return n->as_table();
}

double get_double(const toml::table& t, const char* key, double def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError(std::string("'") + key + "' must be a number");
}

long long get_int(const toml::table& t, const char* key, long long def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    if (auto v = n->value<long long>()) return *v;
    throw ConfigError(std::string("'") + key + "' must be an integer");
}

bool get_bool(const toml::table& t, const char* key, bool def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    if (auto v = n->value<bool>()) return *v;
    throw ConfigError(std::string("'") + key + "' must be a boolean");
}

std::string get_string(const toml::table& t, const char* key, const std::string& def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    if (auto v = n->value<std::string>()) return *v;
    throw ConfigError(std::string("'") + key + "' must be a string");
}

template <std::size_t N>
std::array<double, N> get_doubles(const toml::table& t, const char* key, std::array<double, N> def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    const toml::array* arr = n->as_array();
    if (!arr || arr->size() > N) throw ConfigError(std::string("'") + key + "' must be an array of up to " +
                                                   std::to_string(N) + " numbers");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        auto v = (*arr)[i].value<double>();
        if (!v) throw ConfigError(std::string("'") + key + "' must contain numbers");
        def[i] = *v;
    }
    return def;
}

std::array<int, 3> get_ints3(const toml::table& t, const char* key, std::array<int, 3> def)
{
    const toml::node* n = t.get(key);
    if (!n) return def;
    const toml::array* arr = n->as_array();
    if (!arr || arr->size() > 3) throw ConfigError(std::string("'") + key + "' must be an array of up to 3 integers");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        auto v = (*arr)[i].value<long long>();
        if (!v) throw ConfigError(std::string("'") + key + "' must contain integers");
        def[i] = static_cast<int>(*v);
    }
    return def;
}

template <class T, std::size_t N>
toml::array to_array(const std::array<T, N>& v)
{
    toml::array a;
    for (const T& x : v) a.push_back(x);
    return a;
}

ForcingTiming timing_from_string(const std::string& s)
{
    if (s == "substep") return ForcingTiming::PerSubstep;
    if (s == "step") return ForcingTiming::PerStep;
    throw ConfigError("forcing timing must be 'substep' or 'step', got '" + s + "'");
}

const char* to_string(ForcingTiming t) { return t == ForcingTiming::PerSubstep ? "substep" : "step"; }

}  // namespace

bool CaseConfig::operator==(const CaseConfig& o) const
{
    const auto grid_eq = [](const GridConfig& a, const GridConfig& b) {
        return a.dim == b.dim && a.cells == b.cells && a.spacing == b.spacing && a.origin == b.origin &&
               a.periodic == b.periodic && a.support_ratio == b.support_ratio;
    };
    const auto fluid_eq = [](const FluidParams& a, const FluidParams& b) {
        return a.nu == b.nu && a.cfl == b.cfl && a.viscous == b.viscous && a.u_ref == b.u_ref &&
               a.dt_max == b.dt_max && a.dt_fixed == b.dt_fixed;
    };
    return case_id == o.case_id && seed == o.seed && output_dir == o.output_dir && grid_eq(grid, o.grid) &&
           fluid_eq(fluid, o.fluid) && faces == o.faces && inflow_band == o.inflow_band && body == o.body &&
           motion == o.motion && scheme == o.scheme && alpha == o.alpha && basis == o.basis && timing == o.timing &&
           residual_diagnostics == o.residual_diagnostics && t_end == o.t_end && max_steps == o.max_steps &&
           report_every == o.report_every && average_from == o.average_from &&
           write_checkpoint == o.write_checkpoint && u_ref == o.u_ref && d_ref == o.d_ref &&
           y0_steps == o.y0_steps && markers_per_cell == o.markers_per_cell && alpha_range == o.alpha_range &&
           alpha_steps == o.alpha_steps;
}

void CaseConfig::validate() const
{
    bool known = false;
    for (const auto& id : case_ids()) known = known || id == case_id;
    if (!known) throw ConfigError("unknown case id '" + case_id + "'");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0, 2]");
    if (case_id == "straight-line-analysis") {
        if (y0_steps < 2) throw ConfigError("y0_steps must be at least 2");
        if (markers_per_cell < 1) throw ConfigError("markers_per_cell must be positive");
        if (!(alpha_range[0] > 0.0) || alpha_range[1] > 2.0 || alpha_range[1] < alpha_range[0])
            throw ConfigError("alpha_range must lie within (0, 2]");
        if (alpha_steps < 1) throw ConfigError("alpha_steps must be positive");
        return;
    }
    (void)build_grid(grid);
    fluid.validate();
    (void)boundary_spec().validate(StaggeredGrid(grid));
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
    if (report_every < 1) throw ConfigError("report_every must be at least 1");
    if (!(u_ref > 0.0) || !(d_ref > 0.0)) throw ConfigError("reference velocity and length must be positive");
    static const std::set<std::string> shapes{"none", "sphere", "cylinder", "channel-walls", "stl"};
    if (!shapes.count(body.shape)) throw ConfigError("unknown body shape '" + body.shape + "'");
    if (body.shape == "stl" && !std::filesystem::exists(body.stl_path))
        throw ConfigError("STL file '" + body.stl_path + "' does not exist");
    if (body.shape != "none" && body.shape != "channel-walls" && !(body.diameter > 0.0))
        throw ConfigError("body diameter must be positive");
    if (!(body.marker_spacing > 0.0)) throw ConfigError("marker_spacing must be positive");
    if (body.facets < 0) throw ConfigError("facets must be non-negative");
    if ((body.shape == "sphere" || body.shape == "stl") && grid.dim != 3)
        throw ConfigError("3D bodies need a 3D grid");
    if ((body.shape == "cylinder" || body.shape == "channel-walls") && grid.dim != 2)
        throw ConfigError("2D bodies need a 2D grid");
}

BoundarySpec CaseConfig::boundary_spec() const
{
    BoundarySpec spec;
    for (int a = 0; a < grid.dim; ++a)
        for (int s = 0; s < 2; ++s) {
            FaceBC bc;
            bc.kind = face_kind_from_string(faces[a][s].kind);
            bc.velocity = faces[a][s].velocity;
            if (bc.kind == FaceBC::Kind::Inflow && inflow_band[1] > inflow_band[0]) {
                const Vec3 u = bc.velocity;
                const auto band = inflow_band;
                bc.profile = [u, band](const Vec3& x, double) {
                    return (x[1] >= band[0] && x[1] <= band[1]) ? u : Vec3{0.0, 0.0, 0.0};
                };
            }
            spec.face[a][s] = bc;
        }
    return spec;
}

CaseConfig parse_config(const std::string& text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML parse error at line " << e.source().begin.line << ", column " << e.source().begin.column
            << ": " << e.description();
        throw ConfigError(msg.str());
    }
    check_keys(root, "the top level",
               {"case", "seed", "output", "grid", "fluid", "boundary", "body", "motion", "forcing", "run",
                "reference", "analysis"});

    CaseConfig c;
    c.case_id = get_string(root, "case", "");
    if (c.case_id.empty()) throw ConfigError("missing 'case'");
    c = default_config(c.case_id);
    const long long seed = get_int(root, "seed", static_cast<long long>(c.seed));
    if (seed < 0) throw ConfigError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.output_dir = get_string(root, "output", c.output_dir);

    if (const auto* g = subtable(root, "grid")) {
        check_keys(*g, "[grid]", {"dim", "cells", "spacing", "origin", "support_ratio"});
        c.grid.dim = static_cast<int>(get_int(*g, "dim", c.grid.dim));
        c.grid.cells = get_ints3(*g, "cells", c.grid.cells);
        c.grid.spacing = get_doubles<3>(*g, "spacing", c.grid.spacing);
        c.grid.origin = get_doubles<3>(*g, "origin", c.grid.origin);
        c.grid.support_ratio = get_double(*g, "support_ratio", c.grid.support_ratio);
    }
    if (const auto* f = subtable(root, "fluid")) {
        check_keys(*f, "[fluid]", {"nu", "cfl", "viscous", "u_ref", "dt_max", "dt_fixed"});
        c.fluid.nu = get_double(*f, "nu", c.fluid.nu);
        c.fluid.cfl = get_double(*f, "cfl", c.fluid.cfl);
        c.fluid.viscous = viscous_from_string(get_string(*f, "viscous", to_string(c.fluid.viscous)));
        c.fluid.u_ref = get_double(*f, "u_ref", c.fluid.u_ref);
        c.fluid.dt_max = get_double(*f, "dt_max", c.fluid.dt_max);
        c.fluid.dt_fixed = get_double(*f, "dt_fixed", c.fluid.dt_fixed);
    }
    if (const auto* b = subtable(root, "boundary")) {
        check_keys(*b, "[boundary]", {"x", "y", "z", "inflow_band"});
        for (int a = 0; a < 3; ++a) {
            const auto* ax = subtable(*b, axis_name(a));
            if (!ax) continue;
            check_keys(*ax, std::string("[boundary.") + axis_name(a) + "]", {"lo", "hi", "lo_velocity", "hi_velocity"});
            c.faces[a][0].kind = get_string(*ax, "lo", c.faces[a][0].kind);
            c.faces[a][1].kind = get_string(*ax, "hi", c.faces[a][1].kind);
            c.faces[a][0].velocity = get_doubles<3>(*ax, "lo_velocity", c.faces[a][0].velocity);
            c.faces[a][1].velocity = get_doubles<3>(*ax, "hi_velocity", c.faces[a][1].velocity);
        }
        c.inflow_band = get_doubles<2>(*b, "inflow_band", c.inflow_band);
    }
    if (const auto* b = subtable(root, "body")) {
        check_keys(*b, "[body]",
                   {"shape", "center", "diameter", "facets", "marker_spacing", "stl", "wall_y", "wall_x"});
        c.body.shape = get_string(*b, "shape", c.body.shape);
        c.body.center = get_doubles<3>(*b, "center", c.body.center);
        c.body.diameter = get_double(*b, "diameter", c.body.diameter);
        c.body.facets = static_cast<int>(get_int(*b, "facets", c.body.facets));
        c.body.marker_spacing = get_double(*b, "marker_spacing", c.body.marker_spacing);
        c.body.stl_path = get_string(*b, "stl", c.body.stl_path);
        c.body.wall_y = get_doubles<2>(*b, "wall_y", c.body.wall_y);
        c.body.wall_x = get_doubles<2>(*b, "wall_x", c.body.wall_x);
    }
    if (const auto* m = subtable(root, "motion")) {
        check_keys(*m, "[motion]", {"velocity", "amplitude", "omega"});
        c.motion.velocity = get_doubles<3>(*m, "velocity", c.motion.velocity);
        c.motion.amplitude = get_doubles<3>(*m, "amplitude", c.motion.amplitude);
        c.motion.omega = get_double(*m, "omega", c.motion.omega);
    }
    if (const auto* f = subtable(root, "forcing")) {
        check_keys(*f, "[forcing]", {"scheme", "alpha", "basis", "timing", "residual"});
        c.scheme = parse_scheme(get_string(*f, "scheme", c.scheme.name()));
        c.alpha = get_double(*f, "alpha", c.alpha);
        c.basis = basis_from_string(get_string(*f, "basis", to_string(c.basis)));
        c.timing = timing_from_string(get_string(*f, "timing", to_string(c.timing)));
        c.residual_diagnostics = get_bool(*f, "residual", c.residual_diagnostics);
    }
    if (const auto* r = subtable(root, "run")) {
        check_keys(*r, "[run]", {"t_end", "max_steps", "report_every", "average_from", "checkpoint"});
        c.t_end = get_double(*r, "t_end", c.t_end);
        c.max_steps = static_cast<int>(get_int(*r, "max_steps", c.max_steps));
        c.report_every = static_cast<int>(get_int(*r, "report_every", c.report_every));
        c.average_from = get_double(*r, "average_from", c.average_from);
        c.write_checkpoint = get_bool(*r, "checkpoint", c.write_checkpoint);
    }
    if (const auto* r = subtable(root, "reference")) {
        check_keys(*r, "[reference]", {"u", "d"});
        c.u_ref = get_double(*r, "u", c.u_ref);
        c.d_ref = get_double(*r, "d", c.d_ref);
    }
    if (const auto* a = subtable(root, "analysis")) {
        check_keys(*a, "[analysis]", {"y0_steps", "markers_per_cell", "alpha_range", "alpha_steps"});
        c.y0_steps = static_cast<int>(get_int(*a, "y0_steps", c.y0_steps));
        c.markers_per_cell = static_cast<int>(get_int(*a, "markers_per_cell", c.markers_per_cell));
        c.alpha_range = get_doubles<2>(*a, "alpha_range", c.alpha_range);
        c.alpha_steps = static_cast<int>(get_int(*a, "alpha_steps", c.alpha_steps));
    }
    for (int a = 0; a < 3; ++a) c.grid.periodic[a] = a >= c.grid.dim || c.faces[a][0].kind == "periodic";
    c.validate();
    return c;
}

CaseConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    CaseConfig c = parse_config(ss.str());
    // Relative STL paths are taken relative to the config file.
    if (c.body.shape == "stl" && !std::filesystem::path(c.body.stl_path).is_absolute()) {
        const auto p = std::filesystem::path(path).parent_path() / c.body.stl_path;
        if (std::filesystem::exists(p)) c.body.stl_path = p.string();
    }
    return c;
}

std::string serialize_config(const CaseConfig& c)
{
    toml::table root;
    root.insert("case", c.case_id);
    root.insert("seed", static_cast<long long>(c.seed));
    root.insert("output", c.output_dir);

    toml::table grid;
    grid.insert("dim", c.grid.dim);
    grid.insert("cells", to_array(c.grid.cells));
    grid.insert("spacing", to_array(c.grid.spacing));
    grid.insert("origin", to_array(c.grid.origin));
    grid.insert("support_ratio", c.grid.support_ratio);
    root.insert("grid", std::move(grid));

    toml::table fluid;
    fluid.insert("nu", c.fluid.nu);
    fluid.insert("cfl", c.fluid.cfl);
    fluid.insert("viscous", std::string(to_string(c.fluid.viscous)));
    fluid.insert("u_ref", c.fluid.u_ref);
    fluid.insert("dt_max", c.fluid.dt_max);
    fluid.insert("dt_fixed", c.fluid.dt_fixed);
    root.insert("fluid", std::move(fluid));

    toml::table boundary;
    for (int a = 0; a < 3; ++a) {
        toml::table ax;
        ax.insert("lo", c.faces[a][0].kind);
        ax.insert("hi", c.faces[a][1].kind);
        ax.insert("lo_velocity", to_array(c.faces[a][0].velocity));
        ax.insert("hi_velocity", to_array(c.faces[a][1].velocity));
        boundary.insert(axis_name(a), std::move(ax));
    }
    boundary.insert("inflow_band", to_array(c.inflow_band));
    root.insert("boundary", std::move(boundary));

    toml::table body;
    body.insert("shape", c.body.shape);
    body.insert("center", to_array(c.body.center));
    body.insert("diameter", c.body.diameter);
    body.insert("facets", c.body.facets);
    body.insert("marker_spacing", c.body.marker_spacing);
    body.insert("stl", c.body.stl_path);
    body.insert("wall_y", to_array(c.body.wall_y));
    body.insert("wall_x", to_array(c.body.wall_x));
    root.insert("body", std::move(body));

    toml::table motion;
    motion.insert("velocity", to_array(c.motion.velocity));
    motion.insert("amplitude", to_array(c.motion.amplitude));
    motion.insert("omega", c.motion.omega);
    root.insert("motion", std::move(motion));

    toml::table forcing;
    forcing.insert("scheme", c.scheme.name());
    forcing.insert("alpha", c.alpha);
    forcing.insert("basis", std::string(to_string(c.basis)));
    forcing.insert("timing", std::string(to_string(c.timing)));
    forcing.insert("residual", c.residual_diagnostics);
    root.insert("forcing", std::move(forcing));

    toml::table run;
    run.insert("t_end", c.t_end);
    run.insert("max_steps", c.max_steps);
    run.insert("report_every", c.report_every);
    run.insert("average_from", c.average_from);
    run.insert("checkpoint", c.write_checkpoint);
    root.insert("run", std::move(run));

    toml::table ref;
    ref.insert("u", c.u_ref);
    ref.insert("d", c.d_ref);
    root.insert("reference", std::move(ref));

    toml::table analysis;
    analysis.insert("y0_steps", c.y0_steps);
    analysis.insert("markers_per_cell", c.markers_per_cell);
    analysis.insert("alpha_range", to_array(c.alpha_range));
    analysis.insert("alpha_steps", c.alpha_steps);
    root.insert("analysis", std::move(analysis));

    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

CaseConfig default_config(const std::string& id)
{
    CaseConfig c;
    c.case_id = id;
    c.output_dir = "out/" + id;
    const auto set_faces = [&](int a, const char* lo, const char* hi) {
        c.faces[a][0].kind = lo;
        c.faces[a][1].kind = hi;
    };

    if (id == "straight-line-analysis") {
        c.grid.dim = 2;
        c.grid.cells = {16, 10, 1};
        c.grid.spacing = {1.0, 1.0, 1.0};
        c.basis = Basis::Linear;
    } else if (id == "taylor-green") {
        const int n = 64;
        const double h = 2.0 * std::numbers::pi / n;
        c.grid.dim = 2;
        c.grid.cells = {n, n, 1};
        c.grid.spacing = {h, h, h};
        c.fluid.nu = 0.05;
        c.t_end = 1.0;
        c.scheme = ForcingScheme::baseline();
        c.write_checkpoint = false;
    } else if (id == "cylinder-2d") {
        const double h = 0.05;
        c.grid.dim = 2;
        c.grid.cells = {320, 160, 1};
        c.grid.spacing = {h, h, h};
        set_faces(0, "inflow", "outflow");
        c.faces[0][0].velocity = {1.0, 0.0, 0.0};
        c.body.shape = "cylinder";
        c.body.center = {4.0, 4.0, 0.0};
        c.fluid.nu = 0.01;
        c.t_end = 60.0;
        c.average_from = 30.0;
        c.report_every = 10;
    } else if (id == "sphere-3d") {
        const double h = 0.06;
        c.grid.dim = 3;
        c.grid.cells = {84, 84, 84};
        c.grid.spacing = {h, h, h};
        set_faces(0, "inflow", "outflow");
        c.faces[0][0].velocity = {1.0, 0.0, 0.0};
        c.body.shape = "sphere";
        c.body.center = {2.52, 2.52, 2.52};
        c.body.marker_spacing = 0.7;
        c.fluid.nu = 0.01;
        c.t_end = 15.0;
        c.average_from = 10.0;
        c.report_every = 10;
    } else if (id == "oscillating-body") {
        const double h = 0.04;
        c.grid.dim = 3;
        c.grid.cells = {100, 100, 200};
        c.grid.spacing = {h, h, h};
        set_faces(2, "wall", "wall");
        c.body.shape = "sphere";
        c.body.center = {2.0, 2.0, 4.0};
        c.body.marker_spacing = 0.7;
        c.motion.amplitude = {0.0, 0.0, 1.0};
        c.motion.omega = 1.0;
        c.fluid.nu = 0.01;
        c.t_end = 2.0 * std::numbers::pi;
        c.average_from = std::numbers::pi;
        c.report_every = 10;
    } else if (id == "immersed-channel") {
        const double h = 0.1;
        c.grid.dim = 2;
        c.grid.cells = {80, 40, 1};
        c.grid.spacing = {h, h, h};
        set_faces(0, "inflow", "outflow");
        c.faces[0][0].velocity = {1.0, 0.0, 0.0};
        c.inflow_band = {1.23, 2.77};
        c.body.shape = "channel-walls";
        c.body.wall_y = {1.23, 2.77};
        c.body.wall_x = {0.3, 7.7};
        c.fluid.nu = 0.02;
        c.t_end = 4.0;
        c.average_from = 2.0;
        c.d_ref = 1.54;
        c.write_checkpoint = false;
    } else {
        throw ConfigError("unknown case id '" + id + "'");
    }
    for (int a = 0; a < 3; ++a) c.grid.periodic[a] = a >= c.grid.dim || c.faces[a][0].kind == "periodic";
    return c;
}

}  // namespace mlsib
