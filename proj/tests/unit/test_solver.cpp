#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "mlsib/cases.hpp"
#include "mlsib/poisson.hpp"
#include "mlsib/solver.hpp"

using namespace mlsib;

namespace {

StaggeredGrid tg_grid(int n)
{
    const double h = 2.0 * std::numbers::pi / n;
    GridConfig c;
    c.dim = 2;
    c.cells = {n, n, 1};
    c.spacing = {h, h, h};
    c.periodic = {true, true, true};
    return StaggeredGrid(c);
}

double run_taylor_green(int n, Viscous v, double T, double* max_div = nullptr, bool* monotone = nullptr)
{
    const double nu = 0.05;
    const auto g = tg_grid(n);
    FluidParams fp;
    fp.nu = nu;
    fp.viscous = v;
    FlowSolver s(g, BoundarySpec::all_periodic(), fp);
    FlowState st = make_flow_state(g);
    taylor_green_init(g, st, nu, 0.0);
    double e_prev = s.kinetic_energy(st);
    while (st.time < T - 1e-12) {
        const double dt = std::min(s.compute_dt(st), T - st.time);
        const StepDiagnostics d = s.step(st, dt, ForcingScheme::baseline(), nullptr);
        if (max_div) *max_div = std::max(*max_div, d.max_divergence);
        const double e = s.kinetic_energy(st);
        if (monotone && e > e_prev) *monotone = false;
        e_prev = e;
    }
    return taylor_green_error(g, st, nu, T);
}

double max_abs_diff(const Field& a, const Field& b, const std::array<int, 3>& e)
{
    double m = 0.0;
    for (int k = 0; k < e[2]; ++k)
        for (int j = 0; j < e[1]; ++j)
            for (int i = 0; i < e[0]; ++i) m = std::max(m, std::abs(a(i, j, k) - b(i, j, k)));
    return m;
}

}  // namespace

TEST_CASE("poisson solve on periodic, mixed and Neumann boxes")
{
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    for (int variant = 0; variant < 4; ++variant) {
        GridConfig c;
        c.dim = variant < 2 ? 2 : 3;
        c.cells = {12, 10, c.dim == 3 ? 8 : 1};
        c.spacing = {0.1, 0.1, 0.1};
        c.periodic = {variant % 2 == 0, variant == 0, variant == 2};
        const StaggeredGrid g(c);
        Field rhs = make_field(g, Location::Cell), phi = make_field(g, Location::Cell);
        const auto e = g.node_extent(Location::Cell);
        double mean = 0.0;
        for (int k = 0; k < e[2]; ++k)
            for (int j = 0; j < e[1]; ++j)
                for (int i = 0; i < e[0]; ++i) mean += rhs(i, j, k) = nd(rng);
        mean /= e[0] * e[1] * e[2];
        for (int k = 0; k < e[2]; ++k)
            for (int j = 0; j < e[1]; ++j)
                for (int i = 0; i < e[0]; ++i) rhs(i, j, k) -= mean;
        PoissonSolver p(g);
        p.solve(rhs, phi);
        CHECK(p.residual(rhs, phi) < 1e-10);
    }
}

TEST_CASE("compute_dt")
{
    const auto g = test::box(2, 8, 0.1, true);
    FluidParams fp;
    fp.cfl = 0.2;
    fp.nu = 0.01;
    fp.viscous = Viscous::ImplicitCN;
    FlowState st = make_flow_state(g);
    st.u[0].fill(1.0);
    CHECK(FlowSolver(g, BoundarySpec::all_periodic(), fp).compute_dt(st) == doctest::Approx(0.02));

    fp.viscous = Viscous::Explicit;
    const FlowSolver ex(g, BoundarySpec::all_periodic(), fp);
    const FlowState quiet = make_flow_state(g);
    CHECK(ex.compute_dt(quiet) == doctest::Approx(0.2 * 0.01 / (4.0 * 0.01)));

    st.u[1](2, 3, 0) = std::nan("");
    CHECK_THROWS_AS(ex.compute_dt(st), NumericalError);
}

TEST_CASE("zero and uniform fields are preserved")
{
    const auto g = test::box(3, 8, 0.25, true);
    FlowSolver s(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowState zero = make_flow_state(g);
    s.step(zero, 0.01, ForcingScheme::baseline(), nullptr);
    for (int c = 0; c < 3; ++c)
        for (double v : zero.u[c].data()) CHECK(v == 0.0);

    FlowState st = make_flow_state(g);
    const Vec3 U{1.0, -0.5, 0.25};
    for (int c = 0; c < 3; ++c) st.u[c].fill(U[c]);
    for (int n = 0; n < 5; ++n) s.step(st, 0.02, ForcingScheme::baseline(), nullptr);
    for (int c = 0; c < 3; ++c) {
        const auto e = st.u[c].extent();
        for (int k = 0; k < e[2]; ++k)
            for (int j = 0; j < e[1]; ++j)
                for (int i = 0; i < e[0]; ++i) CHECK(std::abs(st.u[c](i, j, k) - U[c]) < 1e-13);
    }
}

TEST_CASE("projection removes a gradient field")
{
    const auto g = test::box(2, 16, 0.1, true);
    FlowSolver s(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowState st = make_flow_state(g);
    const double L = g.length(0);
    const auto scalar = [&](int i, int j) {
        const double x = (i + 0.5) * 0.1, y = (j + 0.5) * 0.1;
        return std::sin(2.0 * std::numbers::pi * x / L) * std::cos(4.0 * std::numbers::pi * y / L) +
               0.3 * std::cos(6.0 * std::numbers::pi * x / L);
    };
    const auto e0 = st.u[0].extent(), e1 = st.u[1].extent();
    for (int j = 0; j < e0[1]; ++j)
        for (int i = 0; i < e0[0]; ++i) st.u[0](i, j, 0) = (scalar(i, j) - scalar(i - 1, j)) / 0.1;
    for (int j = 0; j < e1[1]; ++j)
        for (int i = 0; i < e1[0]; ++i) st.u[1](i, j, 0) = (scalar(i, j) - scalar(i, j - 1)) / 0.1;
    s.project(st, 0.05);
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) CHECK(std::abs(st.u[c](i, j, 0)) < 1e-11);
}

TEST_CASE("projection leaves a divergence-free field alone")
{
    const auto g = tg_grid(32);
    FlowSolver s(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowState st = make_flow_state(g);
    taylor_green_init(g, st, 0.05, 0.0);
    const FlowState before = st;
    s.project(st, 0.1);
    for (int c = 0; c < 2; ++c) CHECK(max_abs_diff(st.u[c], before.u[c], {32, 32, 1}) < 1e-12);
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) {
            const double dp = st.p(i, j, 0) - before.p(i, j, 0);
            lo = std::min(lo, dp);
            hi = std::max(hi, dp);
        }
    CHECK(hi - lo < 1e-12);
}

TEST_CASE("taylor-green decays with the analytic solution")
{
    double div = 0.0;
    bool monotone = true;
    const double e32 = run_taylor_green(32, Viscous::Explicit, 0.5, &div, &monotone);
    const double e64 = run_taylor_green(64, Viscous::Explicit, 0.5);
    CHECK(monotone);
    CHECK(div < 1e-10);
    CHECK(e32 < 1e-3);
    CHECK(e32 / e64 > 3.0);
    const double cn = run_taylor_green(32, Viscous::ImplicitCN, 0.5);
    CHECK(std::abs(cn - e32) < 0.2 * e32);
}

TEST_CASE("uniform flow through an inflow/outflow channel")
{
    GridConfig c;
    c.dim = 3;
    c.cells = {12, 8, 8};
    c.spacing = {0.1, 0.1, 0.1};
    c.periodic = {false, true, true};
    const StaggeredGrid g(c);
    BoundarySpec b;
    b.face[0] = {FaceBC::inflow({1.0, 0.0, 0.0}), FaceBC::outflow()};
    b.validate(g);
    FlowSolver s(g, b, FluidParams{});
    FlowState st = make_flow_state(g);
    st.u[0].fill(1.0);
    StepDiagnostics d;
    for (int n = 0; n < 5; ++n) d = s.step(st, 0.02, ForcingScheme::baseline(), nullptr);
    CHECK(d.outflow_speed == doctest::Approx(1.0));
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i <= 12; ++i) CHECK(std::abs(st.u[0](i, j, k) - 1.0) < 1e-12);
    CHECK(s.max_divergence(st) < 1e-10);
}

TEST_CASE("boundary specs are validated")
{
    GridConfig c;
    c.dim = 2;
    c.cells = {8, 8, 1};
    c.spacing = {0.1, 0.1, 0.1};
    c.periodic = {false, true, true};
    const StaggeredGrid g(c);
    BoundarySpec b;
    b.face[0] = {FaceBC::inflow({1.0, 0.0, 0.0}), FaceBC::wall()};
    CHECK_THROWS_AS(b.validate(g), ConfigError);
    b.face[0] = {FaceBC::periodic(), FaceBC::outflow()};
    CHECK_THROWS_AS(b.validate(g), ConfigError);
    b.face[0] = {FaceBC::outflow(), FaceBC::outflow()};
    CHECK_THROWS_AS(b.validate(g), ConfigError);
    b.face[0] = {FaceBC::wall(), FaceBC::wall()};
    CHECK_NOTHROW(b.validate(g));
}

TEST_CASE("an empty surface changes nothing")
{
    const auto g = tg_grid(16);
    FlowSolver a(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowSolver b(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowState sa = make_flow_state(g);
    taylor_green_init(g, sa, 0.01, 0.0);
    FlowState sb = sa;
    ImmersedSurface empty;
    for (int n = 0; n < 3; ++n) {
        a.step(sa, 0.05, ForcingScheme::corrected(), nullptr);
        b.step(sb, 0.05, ForcingScheme::corrected(), &empty);
    }
    for (int c = 0; c < 2; ++c) CHECK(max_abs_diff(sa.u[c], sb.u[c], {16, 16, 1}) == 0.0);
}

TEST_CASE("blow-up is reported")
{
    const auto g = test::box(2, 8, 0.1, true);
    FlowSolver s(g, BoundarySpec::all_periodic(), FluidParams{});
    FlowState st = make_flow_state(g);
    for (int j = 0; j < 8; ++j) st.u[0](3, j, 0) = 1e7;
    CHECK_THROWS_AS(s.step(st, 0.01, ForcingScheme::baseline(), nullptr), DivergenceError);
}

TEST_CASE("stationary body reaches a steady residual")
{
    CaseConfig cfg = default_config("cylinder-2d");
    cfg.grid.cells = {64, 32, 1};
    cfg.grid.spacing = {0.125, 0.125, 0.125};
    cfg.body.center = {2.0, 2.0, 0.0};
    cfg.fluid.nu = 0.1;
    cfg.fluid.viscous = Viscous::ImplicitCN;
    cfg.t_end = 45.0;
    cfg.average_from = 40.0;
    cfg.write_checkpoint = false;
    RunOptions opts;
    opts.write_outputs = false;
    const RunReport r = run_case(cfg, opts);
    CHECK(r.completed);
    CHECK(r.all_finite());
    const std::size_t n = r.steps.size();
    REQUIRE(n > 100);
    // the final step is shortened to land on t_end
    const double last = r.steps[n - 2].residual.l1, earlier = r.steps[n - 101].residual.l1;
    CHECK(std::abs(last - earlier) < 1e-5 * last);
    CHECK_FALSE(r.strouhal.has_value());
}
