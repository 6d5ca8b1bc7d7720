#pragma once

#include <array>
#include <vector>

#include "mlsib/grid.hpp"

namespace mlsib {

// Direct solver for the cell-centred 5/7-point Laplacian. Periodic axes use
// a real DFT (halfcomplex), the others a DCT-II which diagonalises the
// zero-flux Neumann operator exactly. The constant mode is pinned to zero.
class PoissonSolver {
public:
    explicit PoissonSolver(const StaggeredGrid& grid);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    // Solves lap(phi) = rhs over the interior cells; ghosts of phi are filled
    // (periodic copy or mirrored). rhs must be compatible (zero mean) for
    // all-Neumann or periodic domains; its mean is removed otherwise.
    void solve(const Field& rhs, Field& phi);

    // Max |lap(phi) - rhs| over the interior, phi ghosts already filled.
    double residual(const Field& rhs, const Field& phi) const;

private:
    StaggeredGrid grid_;
    std::array<int, 3> n_{1, 1, 1};
    std::array<std::vector<double>, 3> lambda_;
    std::vector<double> buffer_;
    double normalisation_ = 1.0;
    void* forward_ = nullptr;
    void* backward_ = nullptr;
};

// Ghost layer of a cell field: periodic copy or zero-gradient mirror.
void fill_cell_ghosts(const StaggeredGrid& grid, Field& f);

}  // namespace mlsib
