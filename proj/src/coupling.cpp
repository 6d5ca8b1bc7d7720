#include "mlsib/coupling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

namespace mlsib {

void TransferOperator::check_current(const MarkerSet& markers) const
{
    if (markers.size() != built_at.size())
        throw StaleOperatorError("transfer operator built for " + std::to_string(built_at.size()) +
                                 " markers, got " + std::to_string(markers.size()));
    for (std::size_t l = 0; l < built_at.size(); ++l)
        if (norm(markers.position[l] - built_at[l]) > staleness_limit)
            throw StaleOperatorError("marker " + std::to_string(l) + " moved more than 0.5h since the transfer "
                                     "operator was built");
}

Field& TransferOperator::scratch(int component) const
{
    if (scratch_.size() != components.size()) scratch_.resize(components.size());
    Field& f = scratch_[static_cast<std::size_t>(component)];
    if (f.empty()) f = components[static_cast<std::size_t>(component)].make_scratch();
    return f;
}

TransferOperator build_transfer(const StaggeredGrid& grid, MarkerSet& markers, Basis basis, double alpha,
                                const std::vector<Location>& locations)
{
    if (locations.empty()) throw ConfigError("transfer operator needs at least one lattice");
    const WeightParams params = weight_params(grid, alpha);
    const std::size_t NL = markers.size();

    TransferOperator op;
    op.built_at = markers.position;
    op.staleness_limit = 0.5 * grid.h();
    op.cell_volume = grid.cell_volume();
    std::vector<bool> fell_back(NL, false);

    for (std::size_t li = 0; li < locations.size(); ++li) {
        const Location loc = locations[li];
        const Field layout = Field(grid.node_extent(loc), [&] {
            std::array<int, 3> g{0, 0, 0};
            for (int a = 0; a < grid.dim(); ++a) g[a] = 1;
            return g;
        }());
        ComponentTransfer ct;
        ct.location = loc;
        ct.extent = layout.extent();
        ct.ghost = layout.ghost();
        ct.start.reserve(NL + 1);
        ct.start.push_back(0);
        ct.coeff.resize(NL);
        for (std::size_t l = 0; l < NL; ++l) {
            const Stencil st = grid.stencil_for(markers.position[l], loc);
            const ShapeVector sv = shape_vector_with_fallback(markers.position[l], st, basis, params);
            if (sv.fallback) fell_back[l] = true;
            if (li == 0) markers.volume[l] = marker_volume(markers.area[l], sv, grid);
            double denom = 0.0;
            for (std::size_t k = 0; k < sv.phi.size(); ++k) {
                ct.offset.push_back(layout.offset(sv.nodes[k]));
                ct.phi.push_back(sv.phi[k]);
                ct.position.push_back(sv.positions[k]);
                denom += sv.phi[k] * grid.cell_volume();
            }
            if (!(markers.volume[l] > 0.0)) throw NumericalError("marker volume must be positive");
            ct.coeff[l] = markers.volume[l] / denom;
            ct.start.push_back(ct.offset.size());
        }
        ct.touched = ct.offset;
        std::sort(ct.touched.begin(), ct.touched.end());
        ct.touched.erase(std::unique(ct.touched.begin(), ct.touched.end()), ct.touched.end());
        op.components.push_back(std::move(ct));
    }
    op.fallback_count = static_cast<std::size_t>(std::count(fell_back.begin(), fell_back.end(), true));
    return op;
}

TransferOperator build_velocity_transfer(const StaggeredGrid& grid, MarkerSet& markers, Basis basis, double alpha)
{
    std::vector<Location> locs;
    for (int a = 0; a < grid.dim(); ++a) locs.push_back(face_of(a));
    return build_transfer(grid, markers, basis, alpha, locs);
}

void interpolate(const Field& field, const ComponentTransfer& op, std::span<double> out)
{
    const double* data = field.data().data();
    const std::size_t NL = op.markers();
    for (std::size_t l = 0; l < NL; ++l) {
        double s = 0.0;
        for (std::size_t j = op.start[l]; j < op.start[l + 1]; ++j) s += op.phi[j] * data[op.offset[j]];
        out[l] = s;
    }
}

std::vector<double> interpolate(const Field& field, const MarkerSet& markers, const TransferOperator& op,
                                int component)
{
    op.check_current(markers);
    std::vector<double> out(markers.size());
    interpolate(field, op.components[static_cast<std::size_t>(component)], out);
    return out;
}

std::vector<double> desired_force(std::span<const double> desired, std::span<const double> interpolated, double dt)
{
    if (!(dt > 0.0)) throw NumericalError("time step must be positive to compute the IBM force");
    std::vector<double> F(desired.size());
    for (std::size_t l = 0; l < desired.size(); ++l) F[l] = (desired[l] - interpolated[l]) / dt;
    return F;
}

void spread_add(std::span<const double> force, const ComponentTransfer& op, Field& out, double scale)
{
    double* data = out.data().data();
    const std::size_t NL = op.markers();
    for (std::size_t l = 0; l < NL; ++l) {
        const double w = scale * op.coeff[l] * force[l];
        for (std::size_t j = op.start[l]; j < op.start[l + 1]; ++j) data[op.offset[j]] += w * op.phi[j];
    }
}

Field spread(std::span<const double> force, const TransferOperator& op, int component)
{
    const ComponentTransfer& ct = op.components[static_cast<std::size_t>(component)];
    Field f = ct.make_scratch();
    spread_add(force, ct, f);
    return f;
}

std::vector<double> actual_force(std::span<const double> force, const TransferOperator& op, int component)
{
    const ComponentTransfer& ct = op.components[static_cast<std::size_t>(component)];
    const Field f = spread(force, op, component);
    std::vector<double> out(ct.markers());
    interpolate(f, ct, out);
    return out;
}

CorrectionResult correction_coefficient(std::span<const double> force, std::span<const double> actual)
{
    CorrectionResult r;
    double gf = 0.0;
    for (std::size_t l = 0; l < force.size(); ++l) {
        r.a2 += actual[l] * actual[l];
        gf += actual[l] * force[l];
        r.a0 += force[l] * force[l];
    }
    r.a1 = -2.0 * gf;
    if (!(r.a2 > 0.0)) {
        r.Z = 1.0;
        r.degenerate = true;
        return r;
    }
    r.Z = gf / r.a2;
    return r;
}

CorrectionResult correction_coefficient(std::span<const double> force, const TransferOperator& op, int component)
{
    const std::vector<double> G = actual_force(force, op, component);
    return correction_coefficient(force, G);
}

double total_error(std::span<const double> force, std::span<const double> actual, double Z)
{
    double e = 0.0;
    for (std::size_t l = 0; l < force.size(); ++l) {
        const double d = Z * actual[l] - force[l];
        e += d * d;
    }
    return e;
}

ForcingScheme ForcingScheme::iterative(int n)
{
    if (n < 1) throw ConfigError("iterative forcing needs at least one iteration");
    return {Kind::Iterative, n};
}

ForcingScheme ForcingScheme::hybrid(int n)
{
    if (n < 1) throw ConfigError("hybrid forcing needs at least one iteration");
    return {Kind::Hybrid, n};
}

std::string ForcingScheme::name() const
{
    switch (kind) {
        case Kind::Baseline: return "baseline";
        case Kind::Corrected: return "corrected";
        case Kind::Iterative: return "iterative(" + std::to_string(iterations) + ")";
        case Kind::Hybrid: return "hybrid(" + std::to_string(iterations) + ")";
    }
    return "unknown";
}

ForcingScheme parse_scheme(const std::string& text)
{
    std::string s;
    for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (s == "baseline") return ForcingScheme::baseline();
    if (s == "corrected") return ForcingScheme::corrected();
    static const std::regex counted(R"(^(iterative|hybrid)\s*(?:\(\s*(-?\d+)\s*\)|:(-?\d+))$)");
    std::smatch m;
    if (std::regex_match(s, m, counted)) {
        const int n = std::stoi(m[2].matched ? m[2].str() : m[3].str());
        return m[1] == "iterative" ? ForcingScheme::iterative(n) : ForcingScheme::hybrid(n);
    }
    throw ConfigError("unknown forcing scheme '" + text + "'");
}

ForcingDiagnostics apply_forcing(const ForcingScheme& scheme, FlowState& state, const MarkerSet& markers,
                                 const TransferOperator& op, double dt, const ForcingOptions& options)
{
    if (!(dt > 0.0)) throw NumericalError("time step must be positive to compute the IBM force");
    ForcingDiagnostics diag;
    const std::size_t NL = markers.size();
    const int passes = scheme.passes();
    diag.passes = passes;
    diag.Z_history.assign(static_cast<std::size_t>(passes), {1.0, 1.0, 1.0});
    diag.first_force.assign(NL, {0.0, 0.0, 0.0});
    diag.applied_force.assign(NL, {0.0, 0.0, 0.0});
    if (options.compute_residual) diag.residual.assign(NL, {0.0, 0.0, 0.0});
    if (NL == 0) return diag;
    op.check_current(markers);

    std::vector<double> UL(NL), F(NL), G(NL), Ud(NL);
    for (std::size_t c = 0; c < op.components.size(); ++c) {
        const ComponentTransfer& ct = op.components[c];
        Field& u = state.u[c];
        Field& f = op.scratch(static_cast<int>(c));
        double* ud = u.data().data();
        double* fd = f.data().data();
        double* rec = options.record_force_field && !state.force[c].empty() ? state.force[c].data().data() : nullptr;
        for (std::size_t l = 0; l < NL; ++l) Ud[l] = markers.desired_velocity[l][c];
        if (rec)
            for (std::size_t off : ct.touched) rec[off] = 0.0;

        for (int pass = 0; pass < passes; ++pass) {
            interpolate(u, ct, UL);
            for (std::size_t l = 0; l < NL; ++l) F[l] = (Ud[l] - UL[l]) / dt;
            for (std::size_t off : ct.touched) fd[off] = 0.0;
            spread_add(F, ct, f);

            double Z = 1.0;
            if (scheme.corrects()) {
                interpolate(f, ct, G);
                const CorrectionResult cr = correction_coefficient(F, G);
                Z = cr.Z;
                diag.Z_degenerate[c] = diag.Z_degenerate[c] || cr.degenerate;
                if (pass == 0) {
                    diag.er_total_baseline[c] = total_error(F, G, 1.0);
                    diag.er_total_corrected[c] = total_error(F, G, Z);
                }
            }
            diag.Z_history[static_cast<std::size_t>(pass)][c] = Z;
            diag.Z[c] = Z;

            const double scale = dt * Z;
            for (std::size_t off : ct.touched) ud[off] += scale * fd[off];
            if (rec)
                for (std::size_t off : ct.touched) rec[off] += Z * fd[off];
            for (std::size_t l = 0; l < NL; ++l) {
                if (pass == 0) diag.first_force[l][c] = F[l];
                diag.applied_force[l][c] += Z * F[l];
            }
        }

        if (options.compute_residual) {
            interpolate(u, ct, UL);
            for (std::size_t l = 0; l < NL; ++l) diag.residual[l][c] = UL[l] - Ud[l];
        }
    }

    if (options.compute_residual) {
        double sum = 0.0;
        for (const auto& r : diag.residual) sum += norm(r);
        diag.residual_l1 = sum / static_cast<double>(NL);
    }
    return diag;
}

MomentBalance spread_moments(const std::vector<Vec3>& force, const MarkerSet& markers, const TransferOperator& op)
{
    MomentBalance mb;
    for (std::size_t l = 0; l < markers.size(); ++l) {
        const Vec3 F = markers.volume[l] * force[l];
        mb.lagrangian_momentum = mb.lagrangian_momentum + F;
        mb.lagrangian_torque = mb.lagrangian_torque + cross(markers.position[l], F);
    }
    for (std::size_t c = 0; c < op.components.size(); ++c) {
        const ComponentTransfer& ct = op.components[c];
        for (std::size_t l = 0; l < ct.markers(); ++l) {
            const double w = ct.coeff[l] * force[l][c] * op.cell_volume;
            for (std::size_t j = ct.start[l]; j < ct.start[l + 1]; ++j) {
                Vec3 fk{0.0, 0.0, 0.0};
                fk[c] = w * ct.phi[j];
                mb.eulerian_momentum = mb.eulerian_momentum + fk;
                mb.eulerian_torque = mb.eulerian_torque + cross(ct.position[j], fk);
            }
        }
    }
    return mb;
}

}  // namespace mlsib
