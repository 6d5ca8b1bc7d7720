#include "mlsib/cases.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

namespace mlsib {

namespace {

void append(MarkerSet& dst, const MarkerSet& src)
{
    for (std::size_t l = 0; l < src.size(); ++l) dst.push(src.position[l], src.area[l], src.normal[l], src.edge[l]);
}

double sample_cell_field(const StaggeredGrid& grid, const Field& f, const Vec3& X)
{
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) {
        const double s = (X[a] - grid.origin()[a]) / grid.spacing(a) - 0.5;
        i0[a] = static_cast<int>(std::floor(s));
        i0[a] = std::clamp(i0[a], -1, grid.cells(a) - 1);
        w[a] = std::clamp(s - i0[a], 0.0, 1.0);
    }
    double v = 0.0;
    for (int c = 0; c < (grid.dim() == 3 ? 2 : 1); ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                const double wt = (a ? w[0] : 1.0 - w[0]) * (b ? w[1] : 1.0 - w[1]) *
                                  (grid.dim() == 3 ? (c ? w[2] : 1.0 - w[2]) : 1.0);
                v += wt * f(i0[0] + a, i0[1] + b, grid.dim() == 3 ? i0[2] + c : 0);
            }
    return v;
}

double body_speed_bound(const RigidMotion& m) { return norm(m.velocity) + norm(m.amplitude) * std::abs(m.omega); }

}  // namespace

void taylor_green_init(const StaggeredGrid& grid, FlowState& state, double nu, double t)
{
    const double decay = std::exp(-2.0 * nu * t);
    for (int a = 0; a < 2; ++a) {
        Field& u = state.u[a];
        const auto e = u.extent();
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i) {
                const Vec3 x = grid.node_position(face_of(a), {i, j, 0});
                u(i, j, 0) = a == 0 ? std::sin(x[0]) * std::cos(x[1]) * decay
                                    : -std::cos(x[0]) * std::sin(x[1]) * decay;
            }
    }
    for (int j = 0; j < grid.cells(1); ++j)
        for (int i = 0; i < grid.cells(0); ++i) {
            const Vec3 x = grid.node_position(Location::Cell, {i, j, 0});
            state.p(i, j, 0) = 0.25 * (std::cos(2.0 * x[0]) + std::cos(2.0 * x[1])) * decay * decay;
        }
    state.time = t;
}

double taylor_green_error(const StaggeredGrid& grid, const FlowState& state, double nu, double t)
{
    const double decay = std::exp(-2.0 * nu * t);
    double err = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int j = 0; j < grid.cells(1); ++j)
            for (int i = 0; i < grid.cells(0); ++i) {
                const Vec3 x = grid.node_position(face_of(a), {i, j, 0});
                const double exact = a == 0 ? std::sin(x[0]) * std::cos(x[1]) * decay
                                            : -std::cos(x[0]) * std::sin(x[1]) * decay;
                err = std::max(err, std::abs(state.u[a](i, j, 0) - exact));
            }
    return err;
}

Body build_body(const CaseConfig& cfg, const StaggeredGrid& grid, std::size_t& warnings)
{
    Body body;
    const BodyConfig& b = cfg.body;
    const double h = grid.h();
    const double R = 0.5 * b.diameter;
    if (b.shape == "none") return body;
    if (b.shape == "sphere") {
        const int freq = b.facets > 0 ? b.facets : icosphere_frequency_for_edge(R, b.marker_spacing * h);
        const TriMesh mesh = icosphere(b.center, R, freq);
        body.reference = markers_from_mesh(mesh).markers;
        body.enclosed_volume = enclosed_volume(mesh);
    } else if (b.shape == "stl") {
        const StlLoad load = load_stl(b.stl_path);
        MeshMarkers mm = markers_from_mesh(load.mesh);
        body.reference = std::move(mm.markers);
        if (load.dropped_degenerate + mm.skipped_degenerate > 0) {
            ++warnings;
            std::cerr << "warning: skipped " << load.dropped_degenerate + mm.skipped_degenerate
                      << " degenerate triangles in '" << b.stl_path << "'\n";
        }
        body.enclosed_volume = is_watertight(load.mesh) ? std::abs(enclosed_volume(load.mesh)) : 0.0;
    } else if (b.shape == "cylinder") {
        const int segs = b.facets > 0
                             ? b.facets
                             : std::max(3, static_cast<int>(std::ceil(std::numbers::pi * b.diameter / (b.marker_spacing * h))));
        body.reference = circle_markers(b.center, R, segs);
        body.enclosed_volume = std::numbers::pi * R * R;
    } else if (b.shape == "channel-walls") {
        const double len = b.wall_x[1] - b.wall_x[0];
        if (!(len > 0.0)) throw ConfigError("channel walls need wall_x[1] > wall_x[0]");
        const int segs =
            b.facets > 0 ? b.facets : std::max(1, static_cast<int>(std::lround(len / (b.marker_spacing * h))));
        body.reference.dim = 2;
        for (int w = 0; w < 2; ++w) {
            const double y = b.wall_y[static_cast<std::size_t>(w)];
            const Vec3 n{0.0, w == 0 ? 1.0 : -1.0, 0.0};
            append(body.reference, segment_markers({b.wall_x[0], y, 0.0}, {b.wall_x[1], y, 0.0}, segs, n));
        }
    } else {
        throw ConfigError("unknown body shape '" + b.shape + "'");
    }
    body.reference.dim = grid.dim();
    body.motion.velocity = cfg.motion.velocity;
    body.motion.amplitude = cfg.motion.amplitude;
    body.motion.omega = cfg.motion.omega;

    const ResolutionReport rr = resolution_check(body.reference, grid);
    if (rr.warning) {
        ++warnings;
        std::cerr << "warning: " << rr.message << '\n';
    }
    return body;
}

CaseSetup setup_case(const CaseConfig& cfg)
{
    cfg.validate();
    if (cfg.case_id == "straight-line-analysis") throw ConfigError("straight-line-analysis has no flow setup");
    CaseSetup s{StaggeredGrid(cfg.grid), cfg.boundary_spec(), {}, std::nullopt, 0};
    s.state = make_flow_state(s.grid);

    if (cfg.case_id == "taylor-green") {
        taylor_green_init(s.grid, s.state, cfg.fluid.nu, 0.0);
    } else {
        // Start from the inflow state wherever an inflow face exists.
        for (int a = 0; a < s.grid.dim(); ++a)
            for (int side = 0; side < 2; ++side) {
                const FaceBC& bc = s.bcs.face[a][side];
                if (bc.kind != FaceBC::Kind::Inflow) continue;
                for (int c = 0; c < s.grid.dim(); ++c) {
                    Field& u = s.state.u[c];
                    const auto e = u.extent();
                    for (int k = 0; k < e[2]; ++k)
                        for (int j = 0; j < e[1]; ++j)
                            for (int i = 0; i < e[0]; ++i)
                                u(i, j, k) = bc.value(s.grid.node_position(face_of(c), {i, j, k}), 0.0)[c];
                }
            }
    }

    Body body = build_body(cfg, s.grid, s.warnings);
    if (!body.reference.empty()) {
        ImmersedSurface surf;
        surf.body = std::move(body);
        surf.markers = surf.body.reference;
        surf.basis = cfg.basis;
        surf.alpha = cfg.alpha;
        surf.update(s.grid, 0.0);
        s.surface = std::move(surf);
    }
    return s;
}

double leakage(const MarkerSet& markers, const std::vector<Vec3>& residual)
{
    double sum = 0.0;
    for (std::size_t l = 0; l < residual.size(); ++l) sum += std::abs(dot(residual[l], markers.normal[l])) * markers.area[l];
    return sum;
}

PressureProfile pressure_profile(const CaseConfig& cfg, const CaseSetup& s, int samples)
{
    PressureProfile prof;
    if (samples < 2) throw ConfigError("pressure profile needs at least 2 samples");
    double pref = 0.0;
    std::size_t count = 0;
    for (int k = 0; k < s.grid.cells(2); ++k)
        for (int j = 0; j < s.grid.cells(1); ++j) {
            pref += s.state.p(0, j, k);
            ++count;
        }
    pref /= static_cast<double>(count);
    Vec3 c = cfg.body.center;
    if (s.surface) c = c + s.surface->body.motion.displacement(s.state.time);
    const double r = 0.5 * cfg.body.diameter + s.grid.h();
    const double q = 0.5 * cfg.u_ref * cfg.u_ref;
    for (int m = 0; m < samples; ++m) {
        const double th = std::numbers::pi * m / (samples - 1);
        const Vec3 X{c[0] - r * std::cos(th), c[1] + r * std::sin(th), c[2]};
        prof.theta_deg.push_back(180.0 * m / (samples - 1));
        prof.cp.push_back((sample_cell_field(s.grid, s.state.p, X) - pref) / q);
    }
    return prof;
}

void write_pressure_profile_csv(const PressureProfile& p, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(10);
    out << "# schema=1\ntheta_deg,cp\n";
    for (std::size_t i = 0; i < p.cp.size(); ++i) out << p.theta_deg[i] << ',' << p.cp[i] << '\n';
}

analysis::RatioHistogram histogram_from_checkpoint(const Checkpoint& cp, const analysis::HistogramOptions& options)
{
    if (cp.markers.empty()) throw ConfigError("checkpoint carries no markers");
    const StaggeredGrid grid(cp.grid);
    MarkerSet markers = cp.markers;
    const TransferOperator op = build_velocity_transfer(grid, markers, cp.basis, cp.alpha);
    return analysis::ratio_histogram(cp.force, analysis::actual_force_vectors(cp.force, op), options);
}

namespace {

RunReport run_analysis_case(const CaseConfig& cfg, const RunOptions& options)
{
    RunReport report;
    report.case_id = cfg.case_id;
    report.scheme = "-";
    const auto profile = analysis::ratio_profile(cfg.alpha, cfg.basis, cfg.y0_steps, cfg.markers_per_cell);
    const auto sweep = analysis::delta_ratio_sweep(cfg.alpha_range[0], cfg.alpha_range[1], cfg.alpha_steps, cfg.basis,
                                                   cfg.y0_steps, cfg.markers_per_cell);
    if (options.log)
        *options.log << "delta(F/F*) at alpha=" << cfg.alpha << ": " << profile.delta()
                     << "; argmin alpha over sweep: " << sweep.argmin() << '\n';
    if (options.write_outputs) {
        std::filesystem::create_directories(cfg.output_dir);
        analysis::write_ratio_profile_csv(profile, cfg.output_dir + "/ratio_profile.csv");
        analysis::write_alpha_sweep_csv(sweep, cfg.output_dir + "/alpha_sweep.csv");
        std::ofstream(cfg.output_dir + "/config.toml") << serialize_config(cfg);
    }
    report.completed = true;
    return report;
}

// Drag is the force along the inflow axis for a fixed body. For a moving
// body it is the signed in-line force along the motion axis.
std::pair<int, double> drag_direction(const CaseConfig& cfg, const RigidMotion& motion)
{
    if (motion.moving()) {
        const Vec3 dir = motion.amplitude + motion.velocity;
        int axis = 0;
        for (int a = 1; a < cfg.grid.dim; ++a)
            if (std::abs(dir[a]) > std::abs(dir[axis])) axis = a;
        return {axis, 1.0};
    }
    for (int a = 0; a < cfg.grid.dim; ++a) {
        if (cfg.faces[a][0].kind == "inflow") return {a, 1.0};
        if (cfg.faces[a][1].kind == "inflow") return {a, -1.0};
    }
    return {0, 1.0};
}

void finalise(RunReport& r, const CaseConfig& cfg)
{
    double cd = 0.0, cl = 0.0, secs = 0.0, leak = 0.0;
    ResidualNorms res;
    std::size_t n = 0;
    r.max_cd = -std::numeric_limits<double>::infinity();
    std::vector<double> lift;
    double dt_mean = 0.0;
    for (const auto& s : r.steps) {
        secs += s.seconds;
        r.max_divergence = std::max(r.max_divergence, s.max_divergence);
        if (s.time < cfg.average_from) continue;
        cd += s.cd;
        cl += s.cl;
        res.l1 += s.residual.l1;
        res.un += s.residual.un;
        res.ut += s.residual.ut;
        leak += s.leakage;
        r.max_cd = std::max(r.max_cd, s.cd);
        lift.push_back(s.cl);
        dt_mean += s.dt;
        ++n;
    }
    if (n > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        r.mean_cd = cd * inv;
        r.mean_cl = cl * inv;
        r.mean_residual = {res.l1 * inv, res.un * inv, res.ut * inv};
        r.leakage = leak * inv;
        // Variable steps are close to uniform once the flow has settled.
        r.strouhal = strouhal(lift, dt_mean * inv, cfg.d_ref, cfg.u_ref);
    } else {
        r.max_cd = 0.0;
    }
    if (!r.steps.empty()) {
        r.final_residual = r.steps.back().residual;
        r.mean_step_seconds = secs / static_cast<double>(r.steps.size());
    }
}

void write_outputs(const RunReport& r, const CaseConfig& cfg)
{
    std::filesystem::create_directories(cfg.output_dir);
    RunReport decimated = r;
    if (cfg.report_every > 1) {
        decimated.steps.clear();
        for (std::size_t i = 0; i < r.steps.size(); ++i)
            if (i % static_cast<std::size_t>(cfg.report_every) == 0 || i + 1 == r.steps.size())
                decimated.steps.push_back(r.steps[i]);
    }
    write_report_csv(decimated, cfg.output_dir + "/report.csv");
    write_summary_csv(r, cfg.output_dir + "/summary.csv");
    std::ofstream(cfg.output_dir + "/config.toml") << serialize_config(cfg);
}

}  // namespace

RunReport run_case(const CaseConfig& cfg, const RunOptions& options)
{
    cfg.validate();
    if (cfg.case_id == "straight-line-analysis") return run_analysis_case(cfg, options);

    RunReport report;
    report.case_id = cfg.case_id;
    report.scheme = cfg.scheme.name();
    CaseSetup setup = setup_case(cfg);
    report.warnings = setup.warnings;
    FlowSolver solver(setup.grid, setup.bcs, cfg.fluid);
    ImmersedSurface* surface = setup.surface ? &*setup.surface : nullptr;
    if (surface) {
        report.markers = surface->markers.size();
        report.fallback_count = surface->op.fallback_count;
    }
    const double speed = surface ? body_speed_bound(surface->body.motion) : 0.0;
    ForcingOptions fopts;
    fopts.compute_residual = cfg.residual_diagnostics;
    StepDiagnostics last;

    try {
        int step = 0;
        while (setup.state.time < cfg.t_end - 1e-12 * std::max(1.0, cfg.t_end) &&
               (cfg.max_steps == 0 || step < cfg.max_steps)) {
            double dt = solver.compute_dt(setup.state, speed);
            dt = std::min(dt, cfg.t_end - setup.state.time);
            last = solver.step(setup.state, dt, cfg.scheme, surface, fopts, cfg.timing);
            ++step;

            StepRecord rec;
            rec.step = step;
            rec.time = last.time;
            rec.dt = dt;
            rec.body_force = last.body_force;
            if (surface) {
                const auto [axis, sign] = drag_direction(cfg, surface->body.motion);
                const ForceCoefficients fc =
                    force_coefficients(last.body_force, cfg.u_ref, cfg.d_ref, setup.grid.dim(), axis, sign);
                rec.cd = fc.cd;
                rec.cl = fc.cl;
                rec.residual = residual_norms(surface->markers, last.forcing.residual, cfg.u_ref);
                rec.leakage = leakage(surface->markers, last.forcing.residual);
                report.fallback_count = std::max(report.fallback_count, surface->op.fallback_count);
            }
            rec.Z = last.Z;
            rec.seconds = last.seconds_total;
            rec.forcing_seconds = last.seconds_forcing;
            rec.mass_imbalance = last.mass_imbalance;
            rec.max_divergence = last.max_divergence;
            rec.kinetic_energy = solver.kinetic_energy(setup.state);
            report.warnings += last.warnings;
            report.Z_degenerate += last.Z_degenerate;
            report.steps.push_back(rec);

            if (options.log && step % cfg.report_every == 0)
                *options.log << "step " << step << " t=" << rec.time << " dt=" << dt << " cd=" << rec.cd
                             << " res=" << rec.residual.l1 << " div=" << rec.max_divergence << '\n';
            if (options.on_step && !options.on_step(rec, last, setup)) break;
        }
        report.completed = true;
    } catch (const Error& e) {
        report.completed = false;
        report.abort_reason = e.what();
        finalise(report, cfg);
        if (options.write_outputs) write_outputs(report, cfg);
        throw;
    }

    finalise(report, cfg);
    if (options.write_outputs) {
        write_outputs(report, cfg);
        if (cfg.body.shape == "sphere" || cfg.body.shape == "cylinder")
            write_pressure_profile_csv(pressure_profile(cfg, setup), cfg.output_dir + "/cp_profile.csv");
        if (cfg.write_checkpoint) {
            Checkpoint cp;
            cp.grid = setup.grid.config();
            cp.state = setup.state;
            cp.step = static_cast<std::int64_t>(report.steps.size());
            if (surface && last.forcing.first_force.size() == surface->markers.size()) {
                cp.markers = surface->markers;
                cp.force = last.forcing.first_force;
                cp.alpha = surface->alpha;
                cp.basis = surface->basis;
            }
            write_checkpoint(cfg.output_dir + "/checkpoint.bin", cp);
            if (!cp.markers.empty()) {
                try {
                    analysis::write_histogram_csv(histogram_from_checkpoint(cp), cfg.output_dir + "/histogram.csv");
                } catch (const NumericalError& e) {
                    std::cerr << "warning: no F/F* histogram: " << e.what() << '\n';
                }
            }
        }
    }
    return report;
}

}  // namespace mlsib
