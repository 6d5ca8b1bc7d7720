#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlsib/config.hpp"

using namespace mlsib;

TEST_CASE("config round trip is the identity")
{
    for (const auto& id : case_ids()) {
        CAPTURE(id);
        const CaseConfig c = default_config(id);
        CHECK_NOTHROW(c.validate());
        const CaseConfig once = parse_config(serialize_config(c));
        CHECK(once == c);
        CHECK(parse_config(serialize_config(once)) == once);
    }
}

TEST_CASE("shipped configs match the defaults")
{
    const std::filesystem::path dir = MLSIB_CONFIG_DIR;
    for (const auto& id : case_ids()) {
        CAPTURE(id);
        const auto path = dir / (id + ".toml");
        REQUIRE(std::filesystem::exists(path));
        CaseConfig shipped = load_config(path.string());
        CHECK(shipped == default_config(id));
    }
}

TEST_CASE("a minimal config takes the case defaults")
{
    for (const auto& id : case_ids()) CHECK(parse_config("case = '" + id + "'\n") == default_config(id));
    const CaseConfig c = parse_config("case = 'sphere-3d'\n[forcing]\nscheme = 'hybrid(2)'\n");
    CHECK(c.scheme == ForcingScheme::hybrid(2));
    CHECK(c.alpha == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bad configs are rejected")
{
    CHECK_THROWS_AS(parse_config("case = 'taylor-green'\n[fluid]\nnu = -1.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("case = 'taylor-green'\n[fluid]\nviscosity = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("case = 'no-such-case'\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("case = 'taylor-green'\n[forcing]\nscheme = 'iterative(0)'\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("case = [\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("case = 'sphere-3d'\n[body]\nshape = 'stl'\nstl = '/no/such/file.stl'\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_config("/no/such/config.toml"), ConfigError);
}

TEST_CASE("boundary spec follows the faces")
{
    const CaseConfig c = default_config("immersed-channel");
    const BoundarySpec b = c.boundary_spec();
    CHECK(b.face[0][0].kind == FaceBC::Kind::Inflow);
    CHECK(b.face[0][1].kind == FaceBC::Kind::ConvectiveOutflow);
    // plug inflow only between the immersed walls
    const double mid = 0.5 * (c.body.wall_y[0] + c.body.wall_y[1]);
    CHECK(b.face[0][0].value({0.0, mid, 0.0}, 0.0)[0] > 0.0);
    CHECK(b.face[0][0].value({0.0, 0.1, 0.0}, 0.0)[0] == 0.0);
}
