#pragma once

#include <random>

#include "mlsib/grid.hpp"

namespace test {

inline mlsib::StaggeredGrid box(int dim, int n, double h, bool periodic = false)
{
    mlsib::GridConfig c;
    c.dim = dim;
    c.cells = {n, n, dim == 3 ? n : 1};
    c.spacing = {h, h, h};
    c.periodic = {periodic, periodic, periodic};
    return mlsib::StaggeredGrid(c);
}

// Point at least `margin` cells away from every non-periodic face.
inline mlsib::Vec3 interior_point(const mlsib::StaggeredGrid& g, std::mt19937_64& rng, double margin = 2.5)
{
    mlsib::Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) {
        std::uniform_real_distribution<double> d(margin * g.spacing(a), g.length(a) - margin * g.spacing(a));
        x[a] = g.origin()[a] + d(rng);
    }
    return x;
}

}  // namespace test
