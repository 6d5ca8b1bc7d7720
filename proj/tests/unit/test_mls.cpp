#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mlsib/mls.hpp"

using namespace mlsib;

TEST_CASE("weight function")
{
    CHECK(weight(0.0, 2.0 / 3.0) == 1.0);
    CHECK(weight(1.2, 2.0 / 3.0) == 0.0);
    CHECK(weight(1.0 + 1e-12, 0.5) == 0.0);
    CHECK(weight(2.0 / 3.0, 2.0 / 3.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(weight(1.0, 0.5) == doctest::Approx(std::exp(-4.0)));
}

TEST_CASE("partition of unity and linear reproduction")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> alpha(0.4, 1.2);
    for (int dim : {2, 3}) {
        const auto g = test::box(dim, 12, 0.05 + 0.1 * dim);
        for (int t = 0; t < 200; ++t) {
            const Vec3 X = test::interior_point(g, rng);
            const WeightParams wp = weight_params(g, alpha(rng));
            for (Location loc : {Location::Cell, Location::FaceX, Location::FaceY}) {
                const Stencil st = g.stencil_for(X, loc);
                for (Basis b : {Basis::Constant, Basis::Linear}) {
                    const ShapeVector sv = shape_vector(X, st, b, wp);
                    double sum = 0.0;
                    Vec3 moment{0.0, 0.0, 0.0};
                    for (std::size_t k = 0; k < sv.phi.size(); ++k) {
                        sum += sv.phi[k];
                        moment = moment + sv.phi[k] * sv.positions[k];
                    }
                    CHECK(std::abs(sum - 1.0) < 1e-12);
                    if (b == Basis::Linear)
                        for (int a = 0; a < dim; ++a) CHECK(std::abs(moment[a] - X[a]) < 1e-12 * g.h());
                }
            }
        }
    }
}

TEST_CASE("constant basis is Shepard interpolation")
{
    const auto g = test::box(3, 10, 0.1);
    const Vec3 X{0.431, 0.512, 0.468};
    const WeightParams wp = weight_params(g, 2.0 / 3.0);
    const Stencil st = g.stencil_for(X, Location::FaceY);
    const ShapeVector sv = shape_vector(X, st, Basis::Constant, wp);
    double total = 0.0;
    for (const auto& n : st.nodes) total += node_weight(n.position, X, wp);
    for (std::size_t k = 0; k < st.nodes.size(); ++k)
        CHECK(sv.phi[k] == doctest::Approx(node_weight(st.nodes[k].position, X, wp) / total).epsilon(1e-13));
}

TEST_CASE("linear fields are sampled exactly")
{
    const auto g = test::box(2, 12, 0.25);
    const Vec3 X{1.37, 1.62, 0.0};
    const ShapeVector sv = shape_vector(X, g.stencil_for(X, Location::Cell), Basis::Linear, weight_params(g, 0.6));
    double value = 0.0;
    for (std::size_t k = 0; k < sv.phi.size(); ++k)
        value += sv.phi[k] * (3.0 - 2.0 * sv.positions[k][0] + 0.5 * sv.positions[k][1]);
    CHECK(value == doctest::Approx(3.0 - 2.0 * X[0] + 0.5 * X[1]).epsilon(1e-12));
}

TEST_CASE("transform invariance needs normalised coordinates")
{
    const auto g = test::box(3, 10, 1.0);
    const Vec3 X{4.3, 5.6, 4.9};
    const Stencil st = g.stencil_for(X, Location::Cell);
    const WeightParams wp = weight_params(g, 2.0 / 3.0);
    for (Basis b : {Basis::Constant, Basis::Linear}) {
        CHECK(verify_transform_invariance(X, st, b, wp, 1.0, {0.0, 0.0, 0.0}));
        CHECK(verify_transform_invariance(X, st, b, wp, 2.0, {5.0, -3.0, 0.0}));
        CHECK_FALSE(verify_transform_invariance(X, st, b, wp, 0.5, {0.0, 0.0, 0.0}, false));
    }
}

TEST_CASE("basis names")
{
    CHECK(basis_from_string("linear") == Basis::Linear);
    CHECK(basis_from_string(to_string(Basis::Constant)) == Basis::Constant);
    CHECK_THROWS_AS(basis_from_string("quadratic"), ConfigError);
}
