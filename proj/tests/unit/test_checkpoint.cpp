#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "mlsib/checkpoint.hpp"

using namespace mlsib;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("mlsib_" + name)).string();
}

Checkpoint sample()
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    const auto g = test::box(3, 6, 0.2);
    Checkpoint cp;
    cp.grid = g.config();
    cp.state = make_flow_state(g);
    for (int c = 0; c < 3; ++c)
        for (double& v : cp.state.u[c].data()) v = nd(rng);
    for (double& v : cp.state.p.data()) v = nd(rng);
    cp.state.time = 1.25;
    cp.step = 42;
    cp.markers = markers_from_mesh(icosphere({0.6, 0.6, 0.6}, 0.2, 2)).markers;
    cp.markers.volume.assign(cp.markers.size(), 1e-3);
    for (std::size_t l = 0; l < cp.markers.size(); ++l) cp.force.push_back({nd(rng), nd(rng), nd(rng)});
    cp.alpha = 0.6;
    cp.basis = Basis::Constant;
    return cp;
}

}  // namespace

TEST_CASE("checkpoint round trip")
{
    const Checkpoint cp = sample();
    const std::string p = temp_path("cp.bin");
    write_checkpoint(p, cp);
    const Checkpoint back = read_checkpoint(p);
    CHECK(back.grid.cells == cp.grid.cells);
    CHECK(back.grid.spacing == cp.grid.spacing);
    CHECK(back.step == 42);
    CHECK(back.state.time == 1.25);
    for (int c = 0; c < 3; ++c) CHECK(back.state.u[c].data() == cp.state.u[c].data());
    CHECK(back.state.p.data() == cp.state.p.data());
    CHECK(back.markers.position == cp.markers.position);
    CHECK(back.markers.normal == cp.markers.normal);
    CHECK(back.markers.volume == cp.markers.volume);
    CHECK(back.force == cp.force);
    CHECK(back.alpha == 0.6);
    CHECK(back.basis == Basis::Constant);
    std::filesystem::remove(p);
}

TEST_CASE("damaged checkpoints are parse errors")
{
    const std::string p = temp_path("cp_bad.bin");
    write_checkpoint(p, sample());
    std::string bytes;
    {
        std::ifstream in(p, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    for (std::size_t cut : {std::size_t{4}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        std::ofstream(p, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(cut));
        CHECK_THROWS_AS(read_checkpoint(p), ParseError);
    }
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(p, std::ios::binary | std::ios::trunc).write(bad.data(), static_cast<std::streamsize>(bad.size()));
    try {
        read_checkpoint(p);
        FAIL("bad magic accepted");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 0);
    }
    std::filesystem::remove(p);
}
