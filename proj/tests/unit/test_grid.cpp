#include <doctest.h>

#include "helpers.hpp"
#include "mlsib/grid.hpp"

using namespace mlsib;

TEST_CASE("cell volume follows the spacing")
{
    CHECK(test::box(2, 8, 1.0).cell_volume() == doctest::Approx(1.0));
    CHECK(test::box(3, 4, 0.5).cell_volume() == doctest::Approx(0.125));
}

TEST_CASE("degenerate grids are rejected")
{
    GridConfig c;
    c.dim = 2;
    c.cells = {0, 8, 1};
    c.spacing = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(StaggeredGrid{c}, ConfigError);
    c.cells = {8, 8, 1};
    c.spacing = {1.0, -1.0, 1.0};
    CHECK_THROWS_AS(StaggeredGrid{c}, ConfigError);
    c.spacing = {1.0, 1.0, 1.0};
    c.dim = 4;
    CHECK_THROWS_AS(StaggeredGrid{c}, ConfigError);
}

TEST_CASE("face lattices carry one extra node along their own axis")
{
    const auto g = test::box(3, 6, 0.1);
    CHECK(g.node_extent(Location::Cell) == std::array<int, 3>{6, 6, 6});
    CHECK(g.node_extent(Location::FaceX) == std::array<int, 3>{7, 6, 6});
    CHECK(g.node_extent(Location::FaceY) == std::array<int, 3>{6, 7, 6});
    CHECK(g.node_extent(Location::FaceZ) == std::array<int, 3>{6, 6, 7});
    const FlowState s = make_flow_state(g);
    for (int a = 0; a < 3; ++a) CHECK(s.u[a].extent() == g.node_extent(face_of(a)));
}

TEST_CASE("support radius rescales with the spacing")
{
    const auto g = test::box(2, 8, 0.2);
    CHECK(g.support_radius(0) == doctest::Approx(0.3));
    const auto r = g.rescaled(2.0);
    CHECK(r.spacing(0) == doctest::Approx(0.4));
    CHECK(r.support_radius(1) == doctest::Approx(0.6));
}

TEST_CASE("stencil sizes")
{
    const auto g2 = test::box(2, 10, 1.0);
    CHECK(g2.stencil_for({5.5, 5.5, 0.0}, Location::Cell).nodes.size() == 9);

    std::mt19937_64 rng(3);
    const auto g3 = test::box(3, 10, 0.1);
    for (int t = 0; t < 50; ++t) {
        const Vec3 X = test::interior_point(g3, rng);
        for (Location loc : {Location::Cell, Location::FaceX, Location::FaceY, Location::FaceZ}) {
            const Stencil s = g3.stencil_for(X, loc);
            CHECK(s.nodes.size() == 27);
            for (const auto& n : s.nodes)
                for (int a = 0; a < 3; ++a) CHECK(std::abs(n.position[a] - X[a]) <= 1.5 * 0.1 + 1e-12);
        }
    }
}

TEST_CASE("stencil near a wall is truncated")
{
    const auto g = test::box(2, 10, 1.0);
    CHECK_THROWS_AS(g.stencil_for({0.5, 5.0, 0.0}, Location::Cell), StencilTruncationError);
}

TEST_CASE("periodic stencils wrap indices but keep unwrapped positions")
{
    const auto g = test::box(2, 8, 1.0, true);
    const Stencil s = g.stencil_for({0.2, 4.5, 0.0}, Location::Cell);
    CHECK(s.nodes.size() == 9);
    bool wrapped = false;
    for (const auto& n : s.nodes) {
        CHECK(n.index[0] >= 0);
        CHECK(n.index[0] < 8);
        if (n.position[0] < 0.0) {
            wrapped = true;
            CHECK(n.index[0] == 7);
        }
    }
    CHECK(wrapped);
}
