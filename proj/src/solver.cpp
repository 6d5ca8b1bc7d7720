#include "mlsib/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

namespace mlsib {

namespace {

using Kind = FaceBC::Kind;
using Range = std::array<std::array<int, 2>, 3>;

template <class F>
void for_range(const Range& r, F&& f)
{
    for (int k = r[2][0]; k < r[2][1]; ++k)
        for (int j = r[1][0]; j < r[1][1]; ++j)
            for (int i = r[0][0]; i < r[0][1]; ++i) f(i, j, k);
}

// Solves a tridiagonal system with constant off-diagonals -b and diagonal
// d, except the first and last diagonal entries. Overwrites rhs.
void thomas(std::vector<double>& rhs, double b, double d, double d_first, double d_last, std::vector<double>& c)
{
    const std::size_t n = rhs.size();
    if (n == 0) return;
    c.resize(n);
    double diag = n == 1 ? d_first + d_last - d : d_first;
    c[0] = -b / diag;
    rhs[0] /= diag;
    for (std::size_t i = 1; i < n; ++i) {
        const double di = i + 1 == n ? d_last : d;
        const double m = di + b * c[i - 1];
        c[i] = -b / m;
        rhs[i] = (rhs[i] + b * rhs[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

// Periodic version by Sherman-Morrison.
void cyclic_thomas(std::vector<double>& rhs, double b, double d, std::vector<double>& c, std::vector<double>& u)
{
    const std::size_t n = rhs.size();
    if (n < 3) throw NumericalError("cyclic tridiagonal solve needs at least 3 unknowns");
    // Corner entries -b split off as a rank-one update.
    const double g = -d;
    thomas(rhs, b, d, d - g, d - (b * b) / g, c);
    u.assign(n, 0.0);
    u[0] = g;
    u[n - 1] = -b;
    thomas(u, b, d, d - g, d - (b * b) / g, c);
    const double vx = rhs[0] + (-b / g) * rhs[n - 1];
    const double vu = u[0] + (-b / g) * u[n - 1];
    const double f = vx / (1.0 + vu);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= f * u[i];
}

bool finite_and_bounded(double v, double limit) { return std::isfinite(v) && std::abs(v) <= limit; }

}  // namespace

void FluidParams::validate() const
{
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("viscosity must be positive");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("CFL must lie in (0, 1)");
    if (!(u_ref > 0.0)) throw ConfigError("reference velocity must be positive");
    if (dt_max < 0.0 || dt_fixed < 0.0) throw ConfigError("time step limits must be non-negative");
}

const char* to_string(Viscous v) { return v == Viscous::Explicit ? "explicit" : "implicit-cn"; }

Viscous viscous_from_string(const std::string& name)
{
    if (name == "explicit") return Viscous::Explicit;
    if (name == "implicit-cn" || name == "cn") return Viscous::ImplicitCN;
    throw ConfigError("unknown viscous treatment '" + name + "'");
}

const char* to_string(Kind kind)
{
    switch (kind) {
    case Kind::Periodic: return "periodic";
    case Kind::Inflow: return "inflow";
    case Kind::ConvectiveOutflow: return "outflow";
    case Kind::NoSlipWall: return "wall";
    }
    return "?";
}

Kind face_kind_from_string(const std::string& name)
{
    if (name == "periodic") return Kind::Periodic;
    if (name == "inflow") return Kind::Inflow;
    if (name == "outflow" || name == "convective-outflow") return Kind::ConvectiveOutflow;
    if (name == "wall" || name == "no-slip") return Kind::NoSlipWall;
    throw ConfigError("unknown boundary kind '" + name + "'");
}

void BoundarySpec::validate(const StaggeredGrid& grid) const
{
    bool inflow = false, outflow = false;
    for (int a = 0; a < grid.dim(); ++a) {
        const bool lo = face[a][0].kind == Kind::Periodic;
        const bool hi = face[a][1].kind == Kind::Periodic;
        if (lo != hi) throw ConfigError("periodic faces must be paired on axis " + std::to_string(a));
        if (lo != grid.periodic(a))
            throw ConfigError("boundary kinds on axis " + std::to_string(a) + " disagree with the grid periodicity");
        if (face[a][0].kind == Kind::ConvectiveOutflow && face[a][1].kind == Kind::ConvectiveOutflow)
            throw ConfigError("at most one outflow face per axis");
        for (int s = 0; s < 2; ++s) {
            inflow = inflow || face[a][s].kind == Kind::Inflow;
            outflow = outflow || face[a][s].kind == Kind::ConvectiveOutflow;
        }
    }
    if (inflow && !outflow) throw ConfigError("an inflow face needs an outflow face to balance mass");
}

void ImmersedSurface::update(const StaggeredGrid& grid, double t)
{
    body.place(markers, t);
    if (!built || body.motion.moving()) {
        op = build_velocity_transfer(grid, markers, basis, alpha);
        built = true;
        ++rebuilds;
    }
}

FlowSolver::FlowSolver(const StaggeredGrid& grid, const BoundarySpec& bcs, const FluidParams& params)
    : grid_(grid), bcs_(bcs), params_(params)
{
    params_.validate();
    bcs_.validate(grid_);
    poisson_ = std::make_unique<PoissonSolver>(grid_);
    for (int a = 0; a < grid_.dim(); ++a) {
        previous_[a] = make_field(grid_, face_of(a));
        work_[a] = make_field(grid_, face_of(a));
    }
    rhs_ = make_field(grid_, Location::Cell);
    phi_ = make_field(grid_, Location::Cell);
}

void FlowSolver::reset_history()
{
    for (int a = 0; a < grid_.dim(); ++a) previous_[a].fill(0.0);
}

Range FlowSolver::update_range(int a) const
{
    Range r{{{0, 1}, {0, 1}, {0, 1}}};
    for (int b = 0; b < grid_.dim(); ++b) {
        const int n = grid_.cells(b);
        r[b] = {(b == a && !grid_.periodic(b)) ? 1 : 0, n};
    }
    return r;
}

void FlowSolver::wrap_periodic_faces(Field& f, int a) const
{
    if (!grid_.periodic(a)) return;
    const int n = grid_.cells(a);
    const auto& e = f.extent();
    const auto& g = f.ghost();
    std::array<int, 3> lo{-g[0], -g[1], -g[2]};
    std::array<int, 3> hi{e[0] + g[0], e[1] + g[1], e[2] + g[2]};
    lo[a] = 0;
    hi[a] = 1;
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i) {
                std::array<int, 3> dst{i, j, k}, src{i, j, k};
                dst[a] = n;
                f(dst[0], dst[1], dst[2]) = f(i, j, k);
                dst[a] = -1;
                src[a] = n - 1;
                f(dst[0], dst[1], dst[2]) = f(src[0], src[1], src[2]);
                dst[a] = n + 1;
                src[a] = 1;
                f(dst[0], dst[1], dst[2]) = f(src[0], src[1], src[2]);
            }
}

void FlowSolver::apply_velocity_bcs(FlowState& state, double t) const
{
    const int d = grid_.dim();
    for (int a = 0; a < d; ++a) {
        Field& u = state.u[a];
        const auto& e = u.extent();
        const auto& g = u.ghost();
        for (int b = 0; b < d; ++b) {
            if (grid_.periodic(b) && b == a) {
                wrap_periodic_faces(u, a);
                continue;
            }
            const int n = grid_.cells(b);
            std::array<int, 3> lo{-g[0], -g[1], -g[2]};
            std::array<int, 3> hi{e[0] + g[0], e[1] + g[1], e[2] + g[2]};
            lo[b] = 0;
            hi[b] = 1;
            for (int k = lo[2]; k < hi[2]; ++k)
                for (int j = lo[1]; j < hi[1]; ++j)
                    for (int i = lo[0]; i < hi[0]; ++i) {
                        std::array<int, 3> idx{i, j, k};
                        const auto at = [&](int m) -> double& {
                            std::array<int, 3> q = idx;
                            q[b] = m;
                            return u(q[0], q[1], q[2]);
                        };
                        if (grid_.periodic(b)) {
                            at(-1) = at(n - 1);
                            at(n) = at(0);
                            continue;
                        }
                        for (int s = 0; s < 2; ++s) {
                            const FaceBC& bc = bcs_.face[b][s];
                            std::array<int, 3> q = idx;
                            q[b] = 0;
                            Vec3 x = grid_.node_position(face_of(a), q);
                            x[b] = grid_.origin()[b] + s * grid_.length(b);
                            if (b == a) {
                                const int face = s == 0 ? 0 : n;
                                if (bc.kind != Kind::ConvectiveOutflow) at(face) = bc.value(x, t)[a];
                                const int ghost = s == 0 ? -1 : n + 1;
                                const int inner = s == 0 ? 1 : n - 1;
                                at(ghost) = 2.0 * at(face) - at(inner);
                            } else {
                                const int ghost = s == 0 ? -1 : n;
                                const int inner = s == 0 ? 0 : n - 1;
                                at(ghost) = bc.kind == Kind::ConvectiveOutflow ? at(inner)
                                                                               : 2.0 * bc.value(x, t)[a] - at(inner);
                            }
                        }
                    }
        }
    }
}

double FlowSolver::compute_dt(const FlowState& state, double extra_speed) const
{
    if (params_.dt_fixed > 0.0) return params_.dt_fixed;
    double rate = 0.0;
    double hmin = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid_.dim(); ++a) {
        hmin = std::min(hmin, grid_.spacing(a));
        double umax = 0.0;
        for (double v : state.u[a].data()) {
            if (!std::isfinite(v)) throw NumericalError("non-finite velocity in compute_dt");
            umax = std::max(umax, std::abs(v));
        }
        rate = std::max(rate, (umax + extra_speed) / grid_.spacing(a));
    }
    double dt = rate > 0.0 ? params_.cfl / rate : std::numeric_limits<double>::infinity();
    if (params_.viscous == Viscous::Explicit)
        dt = std::min(dt, params_.cfl * hmin * hmin / (2.0 * grid_.dim() * params_.nu));
    if (params_.dt_max > 0.0) dt = std::min(dt, params_.dt_max);
    if (!std::isfinite(dt)) dt = params_.cfl * hmin / params_.u_ref;
    return dt;
}

double FlowSolver::explicit_term(const FlowState& state, int a, int i, int j, int k, bool with_viscous) const
{
    const Field& ua = state.u[a];
    const std::size_t o = ua.offset(i, j, k);
    const double* u = ua.data().data();
    const double ha = grid_.spacing(a);
    const std::size_t sa = ua.stride(a);

    const double cp = 0.5 * (u[o] + u[o + sa]);
    const double cm = 0.5 * (u[o - sa] + u[o]);
    double rhs = -(cp * cp - cm * cm) / ha;
    double visc = 0.0;
    if (with_viscous) visc = (u[o + sa] - 2.0 * u[o] + u[o - sa]) / (ha * ha);

    for (int b = 0; b < grid_.dim(); ++b) {
        if (b == a) continue;
        const Field& fb = state.u[b];
        const double* v = fb.data().data();
        const std::size_t ob = fb.offset(i, j, k);
        const std::size_t vb = fb.stride(b);
        const std::size_t va = fb.stride(a);
        const std::size_t sb = ua.stride(b);
        const double hb = grid_.spacing(b);
        const double up = 0.5 * (v[ob + vb] + v[ob + vb - va]) * 0.5 * (u[o + sb] + u[o]);
        const double lo = 0.5 * (v[ob] + v[ob - va]) * 0.5 * (u[o] + u[o - sb]);
        rhs -= (up - lo) / hb;
        if (with_viscous) visc += (u[o + sb] - 2.0 * u[o] + u[o - sb]) / (hb * hb);
    }
    return rhs + params_.nu * visc;
}

void FlowSolver::advance_substep(FlowState& state, int substep, double dt, double)
{
    if (substep < 0 || substep > 2) throw ConfigError("RK3 substep index must be 0, 1 or 2");
    const double g = gamma[static_cast<std::size_t>(substep)];
    const double z = zeta[static_cast<std::size_t>(substep)];
    const double al = alpha(substep);
    const bool cn = params_.viscous == Viscous::ImplicitCN;
    const double limit = 1e6 * params_.u_ref;

    fill_cell_ghosts(grid_, state.p);
    for (int a = 0; a < grid_.dim(); ++a) {
        const Field& u = state.u[a];
        Field& prev = previous_[a];
        Field& du = work_[a];
        const Field& p = state.p;
        const std::size_t pa = p.stride(a);
        const double ha = grid_.spacing(a);
        for_range(update_range(a), [&](int i, int j, int k) {
            const std::size_t o = u.offset(i, j, k);
            const double N = explicit_term(state, a, i, j, k, !cn);
            const std::size_t op = p.offset(i, j, k);
            const double gradp = (p.data()[op] - p.data()[op - pa]) / ha;
            double inc = dt * (g * N + z * prev.data()[o]) - al * dt * gradp;
            if (cn) {
                double lap = 0.0;
                for (int b = 0; b < grid_.dim(); ++b) {
                    const std::size_t sb = u.stride(b);
                    const double hb = grid_.spacing(b);
                    lap += (u.data()[o + sb] - 2.0 * u.data()[o] + u.data()[o - sb]) / (hb * hb);
                }
                inc += al * dt * params_.nu * lap;
            }
            du.data()[o] = inc;
            prev.data()[o] = N;
        });
        if (cn) implicit_viscous(a, 0.5 * al * dt * params_.nu, du);
    }
    for (int a = 0; a < grid_.dim(); ++a) {
        Field& u = state.u[a];
        const Field& du = work_[a];
        bool ok = true;
        for_range(update_range(a), [&](int i, int j, int k) {
            const std::size_t o = u.offset(i, j, k);
            u.data()[o] += du.data()[o];
            ok = ok && finite_and_bounded(u.data()[o], limit);
        });
        if (!ok)
            throw DivergenceError("velocity exceeded 1e6 x reference (or became non-finite) at t=" +
                                  std::to_string(state.time));
        wrap_periodic_faces(u, a);
    }
}

void FlowSolver::implicit_viscous(int a, double beta, Field& delta) const
{
    std::vector<double> line, c, w;
    const Range r = update_range(a);
    for (int b = 0; b < grid_.dim(); ++b) {
        const double bb = beta / (grid_.spacing(b) * grid_.spacing(b));
        const double d = 1.0 + 2.0 * bb;
        const int lo = r[b][0];
        const int hi = r[b][1];
        // Boundary closure for the tangential ghost: mirror for walls and
        // inflow, copy for outflow.
        double d_first = d, d_last = d;
        if (!grid_.periodic(b) && b != a) {
            d_first = d - (bcs_.face[b][0].kind == Kind::ConvectiveOutflow ? bb : -bb);
            d_last = d - (bcs_.face[b][1].kind == Kind::ConvectiveOutflow ? bb : -bb);
        }
        Range lines = r;
        lines[b] = {0, 1};
        const std::size_t s = delta.stride(b);
        for_range(lines, [&](int i, int j, int k) {
            std::array<int, 3> idx{i, j, k};
            idx[b] = lo;
            const std::size_t o0 = delta.offset(idx);
            line.resize(static_cast<std::size_t>(hi - lo));
            for (int m = 0; m < hi - lo; ++m) line[static_cast<std::size_t>(m)] = delta.data()[o0 + m * s];
            if (grid_.periodic(b))
                cyclic_thomas(line, bb, d, c, w);
            else
                thomas(line, bb, d, d_first, d_last, c);
            for (int m = 0; m < hi - lo; ++m) delta.data()[o0 + m * s] = line[static_cast<std::size_t>(m)];
        });
    }
}

double FlowSolver::convective_outflow_update(FlowState& state, double dt_sub, double& c_out,
                                             std::size_t& warnings) const
{
    const int d = grid_.dim();
    c_out = 0.0;
    double net = 0.0;
    double out_area = 0.0;
    struct Plane {
        int axis, side;
    };
    std::vector<Plane> outflow;

    const auto plane_range = [&](int a) {
        Range r{{{0, 1}, {0, 1}, {0, 1}}};
        for (int b = 0; b < d; ++b) r[b] = {0, grid_.cells(b)};
        r[a] = {0, 1};
        return r;
    };

    for (int a = 0; a < d; ++a)
        for (int s = 0; s < 2; ++s)
            if (bcs_.face[a][s].kind == Kind::ConvectiveOutflow) outflow.push_back({a, s});

    for (const auto& pl : outflow) {
        const int a = pl.axis;
        const int n = grid_.cells(a);
        const int face = pl.side == 0 ? 0 : n;
        const int inner = pl.side == 0 ? 1 : n - 1;
        const double sign = pl.side == 0 ? -1.0 : 1.0;
        Field& u = state.u[a];
        double sum = 0.0;
        std::size_t count = 0;
        for_range(plane_range(a), [&](int i, int j, int k) {
            std::array<int, 3> q{i, j, k};
            q[a] = face;
            sum += sign * u(q[0], q[1], q[2]);
            ++count;
        });
        const double c = sum / static_cast<double>(count);
        c_out = c;
        if (!(c > 0.0)) {
            ++warnings;
            std::cerr << "warning: outflow speed " << c << " <= 0 on axis " << a
                      << "; using zero-gradient outflow\n";
        }
        const double nu = c * dt_sub / grid_.spacing(a);
        for_range(plane_range(a), [&](int i, int j, int k) {
            std::array<int, 3> q{i, j, k}, r{i, j, k};
            q[a] = face;
            r[a] = inner;
            double& uf = u(q[0], q[1], q[2]);
            const double ui = u(r[0], r[1], r[2]);
            uf = c > 0.0 ? uf - nu * (uf - ui) : ui;
        });
    }

    // Net outward flux over all non-periodic faces.
    for (int a = 0; a < d; ++a) {
        if (grid_.periodic(a)) continue;
        double area = 1.0;
        for (int b = 0; b < d; ++b)
            if (b != a) area *= grid_.spacing(b);
        const int n = grid_.cells(a);
        for (int s = 0; s < 2; ++s) {
            const double sign = s == 0 ? -1.0 : 1.0;
            const int face = s == 0 ? 0 : n;
            const Field& u = state.u[a];
            for_range(plane_range(a), [&](int i, int j, int k) {
                std::array<int, 3> q{i, j, k};
                q[a] = face;
                net += sign * u(q[0], q[1], q[2]) * area;
                if (bcs_.face[a][s].kind == Kind::ConvectiveOutflow) out_area += area;
            });
        }
    }
    if (out_area > 0.0) {
        const double shift = -net / out_area;
        for (const auto& pl : outflow) {
            const int a = pl.axis;
            const int face = pl.side == 0 ? 0 : grid_.cells(a);
            const double sign = pl.side == 0 ? -1.0 : 1.0;
            Field& u = state.u[a];
            for_range(plane_range(a), [&](int i, int j, int k) {
                std::array<int, 3> q{i, j, k};
                q[a] = face;
                u(q[0], q[1], q[2]) += sign * shift;
            });
        }
    }
    return net;
}

double FlowSolver::max_divergence(const FlowState& state) const
{
    double worst = 0.0;
    Range cells{{{0, 1}, {0, 1}, {0, 1}}};
    for (int b = 0; b < grid_.dim(); ++b) cells[b] = {0, grid_.cells(b)};
    for_range(cells, [&](int i, int j, int k) {
        double div = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const Field& u = state.u[a];
            const std::size_t o = u.offset(i, j, k);
            div += (u.data()[o + u.stride(a)] - u.data()[o]) / grid_.spacing(a);
        }
        worst = std::max(worst, std::abs(div));
    });
    return worst;
}

double FlowSolver::project(FlowState& state, double alpha_dt)
{
    if (!(alpha_dt > 0.0)) throw ConfigError("projection needs a positive time increment");
    Range cells{{{0, 1}, {0, 1}, {0, 1}}};
    for (int b = 0; b < grid_.dim(); ++b) cells[b] = {0, grid_.cells(b)};
    for_range(cells, [&](int i, int j, int k) {
        double div = 0.0;
        for (int a = 0; a < grid_.dim(); ++a) {
            const Field& u = state.u[a];
            const std::size_t o = u.offset(i, j, k);
            div += (u.data()[o + u.stride(a)] - u.data()[o]) / grid_.spacing(a);
        }
        rhs_(i, j, k) = div / alpha_dt;
    });
    poisson_->solve(rhs_, phi_);

    for (int a = 0; a < grid_.dim(); ++a) {
        Field& u = state.u[a];
        const std::size_t pa = phi_.stride(a);
        const double ha = grid_.spacing(a);
        for_range(update_range(a), [&](int i, int j, int k) {
            const std::size_t op = phi_.offset(i, j, k);
            u(i, j, k) -= alpha_dt * (phi_.data()[op] - phi_.data()[op - pa]) / ha;
        });
        wrap_periodic_faces(u, a);
    }
    for_range(cells, [&](int i, int j, int k) { state.p(i, j, k) += phi_(i, j, k); });
    fill_cell_ghosts(grid_, state.p);
    return max_divergence(state);
}

double FlowSolver::kinetic_energy(const FlowState& state) const
{
    double e = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
        Range r{{{0, 1}, {0, 1}, {0, 1}}};
        for (int b = 0; b < grid_.dim(); ++b) r[b] = {0, grid_.cells(b)};
        for_range(r, [&](int i, int j, int k) {
            const double v = state.u[a](i, j, k);
            e += 0.5 * v * v;
        });
    }
    return e * grid_.cell_volume();
}

StepDiagnostics FlowSolver::step(FlowState& state, double dt, const ForcingScheme& scheme, ImmersedSurface* surface,
                                 const ForcingOptions& options, ForcingTiming timing)
{
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalError("time step must be positive and finite");
    StepDiagnostics diag;
    diag.dt = dt;
    const double t0 = state.time;
    double t_level = t0;
    double forcing_seconds = 0.0;

    for (int k = 0; k < 3; ++k) {
        const double dt_sub = alpha(k) * dt;
        const double t_target = t_level + dt_sub;
        const bool force_now = surface && (timing == ForcingTiming::PerSubstep || k == 2);
        if (surface) surface->update(grid_, t_target);

        apply_velocity_bcs(state, t_level);
        advance_substep(state, k, dt, t_target);
        apply_velocity_bcs(state, t_target);
        diag.mass_imbalance = convective_outflow_update(state, dt_sub, diag.outflow_speed, diag.warnings);

        if (force_now && !surface->markers.empty()) {
            const auto f0 = clock::now();
            ForcingDiagnostics fd = apply_forcing(scheme, state, surface->markers, surface->op, dt_sub, options);
            forcing_seconds += std::chrono::duration<double>(clock::now() - f0).count();
            Vec3 sum{0.0, 0.0, 0.0};
            for (std::size_t l = 0; l < surface->markers.size(); ++l)
                sum = sum + surface->markers.volume[l] * fd.applied_force[l];
            diag.marker_force = diag.marker_force + (dt_sub / dt) * sum;
            diag.Z = fd.Z;
            diag.Z_substeps.push_back(fd.Z);
            for (bool b : fd.Z_degenerate) diag.Z_degenerate += b ? 1 : 0;
            diag.forcing = std::move(fd);
        }

        diag.max_divergence = std::max(diag.max_divergence, project(state, dt_sub));
        t_level = t_target;
        state.time = t_level;
    }
    state.time = t0 + dt;
    apply_velocity_bcs(state, state.time);

    diag.body_force = -1.0 * diag.marker_force;
    if (surface && surface->body.motion.moving())
        diag.body_force = diag.body_force + surface->body.enclosed_volume * surface->body.motion.acceleration_at(state.time);
    diag.time = state.time;
    diag.seconds_forcing = forcing_seconds;
    diag.seconds_total = std::chrono::duration<double>(clock::now() - t_start).count();
    return diag;
}

}  // namespace mlsib
