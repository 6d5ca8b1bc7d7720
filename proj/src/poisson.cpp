#include "mlsib/poisson.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mlsib {

PoissonSolver::PoissonSolver(const StaggeredGrid& grid) : grid_(grid)
{
    const int d = grid.dim();
    std::size_t total = 1;
    normalisation_ = 1.0;
    for (int a = 0; a < 3; ++a) {
        n_[a] = grid.cells(a);
        total *= static_cast<std::size_t>(n_[a]);
        lambda_[a].assign(static_cast<std::size_t>(n_[a]), 0.0);
        if (!grid.active(a)) continue;
        const int n = n_[a];
        const double h2 = grid.spacing(a) * grid.spacing(a);
        for (int k = 0; k < n; ++k) {
            double theta;
            if (grid.periodic(a)) {
                const int m = k <= n / 2 ? k : n - k;
                theta = 2.0 * std::numbers::pi * m / n;
            } else {
                theta = std::numbers::pi * k / n;
            }
            lambda_[a][static_cast<std::size_t>(k)] = (2.0 * std::cos(theta) - 2.0) / h2;
        }
        normalisation_ *= grid.periodic(a) ? n : 2.0 * n;
    }
    buffer_.assign(total, 0.0);

    // FFTW wants the slowest axis first.
    int dims[3];
    fftw_r2r_kind fwd[3];
    fftw_r2r_kind bwd[3];
    for (int r = 0; r < d; ++r) {
        const int a = d - 1 - r;
        dims[r] = n_[a];
        fwd[r] = grid.periodic(a) ? FFTW_R2HC : FFTW_REDFT10;
        bwd[r] = grid.periodic(a) ? FFTW_HC2R : FFTW_REDFT01;
    }
    forward_ = fftw_plan_r2r(d, dims, buffer_.data(), buffer_.data(), fwd, FFTW_ESTIMATE);
    backward_ = fftw_plan_r2r(d, dims, buffer_.data(), buffer_.data(), bwd, FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw NumericalError("FFTW planning failed for the pressure solver");
}

PoissonSolver::~PoissonSolver()
{
    if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void PoissonSolver::solve(const Field& rhs, Field& phi)
{
    const int nx = n_[0], ny = n_[1], nz = n_[2];
    std::size_t q = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) buffer_[q++] = rhs(i, j, k);

    fftw_execute(static_cast<fftw_plan>(forward_));
    q = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j) {
            const double lyz = lambda_[1][static_cast<std::size_t>(j)] + lambda_[2][static_cast<std::size_t>(k)];
            for (int i = 0; i < nx; ++i, ++q) {
                const double lam = lambda_[0][static_cast<std::size_t>(i)] + lyz;
                buffer_[q] = (i == 0 && j == 0 && k == 0) ? 0.0 : buffer_[q] / (lam * normalisation_);
            }
        }
    fftw_execute(static_cast<fftw_plan>(backward_));

    q = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) phi(i, j, k) = buffer_[q++];
    fill_cell_ghosts(grid_, phi);
}

double PoissonSolver::residual(const Field& rhs, const Field& phi) const
{
    double worst = 0.0;
    for (int k = 0; k < n_[2]; ++k)
        for (int j = 0; j < n_[1]; ++j)
            for (int i = 0; i < n_[0]; ++i) {
                double lap = 0.0;
                const std::array<int, 3> c{i, j, k};
                for (int a = 0; a < grid_.dim(); ++a) {
                    std::array<int, 3> lo = c, hi = c;
                    --lo[a];
                    ++hi[a];
                    lap += (phi(hi[0], hi[1], hi[2]) - 2.0 * phi(i, j, k) + phi(lo[0], lo[1], lo[2])) /
                           (grid_.spacing(a) * grid_.spacing(a));
                }
                worst = std::max(worst, std::abs(lap - rhs(i, j, k)));
            }
    return worst;
}

void fill_cell_ghosts(const StaggeredGrid& grid, Field& f)
{
    const auto& e = f.extent();
    const auto& g = f.ghost();
    for (int a = 0; a < grid.dim(); ++a) {
        const int n = e[a];
        const bool per = grid.periodic(a);
        std::array<int, 3> lo{-g[0], -g[1], -g[2]};
        std::array<int, 3> hi{e[0] + g[0], e[1] + g[1], e[2] + g[2]};
        lo[a] = 0;
        hi[a] = 1;
        for (int k = lo[2]; k < hi[2]; ++k)
            for (int j = lo[1]; j < hi[1]; ++j)
                for (int i = lo[0]; i < hi[0]; ++i) {
                    std::array<int, 3> gl{i, j, k}, gh{i, j, k}, sl{i, j, k}, sh{i, j, k};
                    gl[a] = -1;
                    gh[a] = n;
                    sl[a] = per ? n - 1 : 0;
                    sh[a] = per ? 0 : n - 1;
                    f(gl[0], gl[1], gl[2]) = f(sl[0], sl[1], sl[2]);
                    f(gh[0], gh[1], gh[2]) = f(sh[0], sh[1], sh[2]);
                }
    }
}

}  // namespace mlsib
