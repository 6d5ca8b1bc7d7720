#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mlsib/coupling.hpp"
#include "mlsib/grid.hpp"
#include "mlsib/poisson.hpp"
#include "mlsib/surface.hpp"

namespace mlsib {

enum class Viscous { Explicit, ImplicitCN };

struct FluidParams {
    double nu = 0.01;
    double cfl = 0.2;
    Viscous viscous = Viscous::Explicit;
    double u_ref = 1.0;     // divergence tolerance and blow-up scale
    double dt_max = 0.0;    // optional cap, 0 = none
    double dt_fixed = 0.0;  // overrides compute_dt when > 0

    void validate() const;
};

const char* to_string(Viscous v);
Viscous viscous_from_string(const std::string& name);

struct FaceBC {
    enum class Kind { Periodic, Inflow, ConvectiveOutflow, NoSlipWall };
    Kind kind = Kind::Periodic;
    Vec3 velocity{0.0, 0.0, 0.0};  // inflow value or wall velocity
    // Optional inflow profile u(x, t); overrides `velocity` when set.
    std::function<Vec3(const Vec3&, double)> profile;

    static FaceBC periodic() { return {}; }
    static FaceBC inflow(const Vec3& u) { return {Kind::Inflow, u, {}}; }
    static FaceBC outflow() { return {Kind::ConvectiveOutflow, {0.0, 0.0, 0.0}, {}}; }
    static FaceBC wall(const Vec3& u = {0.0, 0.0, 0.0}) { return {Kind::NoSlipWall, u, {}}; }

    Vec3 value(const Vec3& x, double t) const { return profile ? profile(x, t) : velocity; }
};

const char* to_string(FaceBC::Kind kind);
FaceBC::Kind face_kind_from_string(const std::string& name);

// face[axis][0] is the low face, face[axis][1] the high one.
struct BoundarySpec {
    std::array<std::array<FaceBC, 2>, 3> face{};

    static BoundarySpec all_periodic() { return {}; }
    // Throws ConfigError on unpaired periodic faces, a mismatch with the
    // grid's periodic flags, two outflow faces on one axis, or inflow
    // without any outflow face.
    void validate(const StaggeredGrid& grid) const;
};

// A body and the markers/operator that currently represent it.
struct ImmersedSurface {
    Body body;
    MarkerSet markers;
    TransferOperator op;
    Basis basis = Basis::Linear;
    double alpha = 2.0 / 3.0;
    bool built = false;
    std::size_t rebuilds = 0;

    // Places the markers at time t and rebuilds the operator when the body
    // moves or nothing has been built yet.
    void update(const StaggeredGrid& grid, double t);
};

enum class ForcingTiming { PerSubstep, PerStep };

struct StepDiagnostics {
    double dt = 0.0;
    double time = 0.0;                    // after the step
    Vec3 marker_force{0.0, 0.0, 0.0};     // sum_l F dV^l, substep-weighted
    Vec3 body_force{0.0, 0.0, 0.0};       // reaction on the body incl. inner-fluid inertia
    std::array<double, 3> Z{1.0, 1.0, 1.0};
    std::vector<std::array<double, 3>> Z_substeps;
    std::size_t Z_degenerate = 0;
    ForcingDiagnostics forcing;           // last forced substep
    double max_divergence = 0.0;          // after projection, max over substeps
    double outflow_speed = 0.0;           // c of the last substep
    double mass_imbalance = 0.0;          // net boundary flux before correction
    std::size_t warnings = 0;
    double seconds_total = 0.0;
    double seconds_forcing = 0.0;
};

class FlowSolver {
public:
    FlowSolver(const StaggeredGrid& grid, const BoundarySpec& bcs, const FluidParams& params);

    const StaggeredGrid& grid() const { return grid_; }
    const FluidParams& params() const { return params_; }
    const BoundarySpec& boundaries() const { return bcs_; }

    // CFL-limited step; `extra_speed` accounts for a moving body.
    double compute_dt(const FlowState& state, double extra_speed = 0.0) const;

    // Ghost layers and boundary faces of the velocity at time t.
    void apply_velocity_bcs(FlowState& state, double t) const;

    // One RK3 substep without forcing or projection: state.u becomes u~.
    // `t_target` is the time level u~ approximates.
    void advance_substep(FlowState& state, int substep, double dt, double t_target);

    // Outflow plane update and global mass-flux correction on state.u.
    // Returns the net boundary flux before correction.
    double convective_outflow_update(FlowState& state, double dt_sub, double& c_out, std::size_t& warnings) const;

    // Solves lap(phi) = div(u)/(a dt), u -= a dt grad(phi), p += phi.
    // Returns max |div u| after the projection.
    double project(FlowState& state, double alpha_dt);

    double max_divergence(const FlowState& state) const;
    double kinetic_energy(const FlowState& state) const;

    // One full RK3 step, optionally with an immersed surface.
    StepDiagnostics step(FlowState& state, double dt, const ForcingScheme& scheme, ImmersedSurface* surface,
                         const ForcingOptions& options = {}, ForcingTiming timing = ForcingTiming::PerSubstep);

    // Resets the stored previous-substep explicit terms.
    void reset_history();

    static constexpr std::array<double, 3> gamma{8.0 / 15.0, 5.0 / 12.0, 3.0 / 4.0};
    static constexpr std::array<double, 3> zeta{0.0, -17.0 / 60.0, -5.0 / 12.0};
    static constexpr double alpha(int k) { return gamma[static_cast<std::size_t>(k)] + zeta[static_cast<std::size_t>(k)]; }

private:
    StaggeredGrid grid_;
    BoundarySpec bcs_;
    FluidParams params_;
    std::unique_ptr<PoissonSolver> poisson_;
    std::array<Field, 3> previous_;  // explicit terms of the last substep
    std::array<Field, 3> work_;
    Field rhs_;
    Field phi_;

    double explicit_term(const FlowState& state, int a, int i, int j, int k, bool with_viscous) const;
    void implicit_viscous(int a, double beta, Field& delta) const;
    std::array<std::array<int, 2>, 3> update_range(int a) const;
    void wrap_periodic_faces(Field& f, int a) const;
};

}  // namespace mlsib
