#include "mlsib/mls.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mlsib {

namespace {

constexpr double kMaxCondition = 1e12;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Wide = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, Eigen::Dynamic>;

}  // namespace

WeightParams weight_params(const StaggeredGrid& grid, double alpha)
{
    WeightParams p;
    p.alpha = alpha;
    p.dim = grid.dim();
    for (int a = 0; a < 3; ++a) p.support[a] = grid.support_radius(a);
    return p;
}

const char* to_string(Basis basis) { return basis == Basis::Constant ? "constant" : "linear"; }

Basis basis_from_string(const std::string& name)
{
    if (name == "constant" || name == "shepard") return Basis::Constant;
    if (name == "linear") return Basis::Linear;
    throw ConfigError("unknown MLS basis '" + name + "' (expected constant or linear)");
}

double weight(double r, double alpha)
{
    if (r > 1.0) return 0.0;
    const double q = r / alpha;
    return std::exp(-q * q);
}

double node_weight(const Vec3& x, const Vec3& X, const WeightParams& params)
{
    double w = 1.0;
    for (int a = 0; a < params.dim; ++a) w *= weight(std::abs(x[a] - X[a]) / params.support[a], params.alpha);
    return w;
}

ShapeVector shape_vector(const Vec3& X, const Stencil& stencil, Basis basis, const WeightParams& params)
{
    if (!(params.alpha > 0.0)) throw ConfigError("MLS shape parameter alpha must be positive");
    const std::size_t ne = stencil.nodes.size();
    if (ne == 0) throw DegenerateStencilError("empty MLS stencil");

    ShapeVector sv;
    sv.location = stencil.location;
    sv.nodes.reserve(ne);
    sv.positions.reserve(ne);
    sv.phi.resize(ne);

    std::vector<double> w(ne);
    double wsum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < ne; ++k) {
        sv.nodes.push_back(stencil.nodes[k].index);
        sv.positions.push_back(stencil.nodes[k].position);
        w[k] = node_weight(stencil.nodes[k].position, X, params);
        wsum += w[k];
        if (w[k] > 0.0) ++nonzero;
    }
    if (!(wsum > 0.0)) throw DegenerateStencilError("all MLS weights vanish");

    if (basis == Basis::Constant) {
        for (std::size_t k = 0; k < ne; ++k) sv.phi[k] = w[k] / wsum;
        return sv;
    }

    const int d = params.dim;
    const int m = d + 1;
    if (nonzero < static_cast<std::size_t>(m))
        throw DegenerateStencilError("linear MLS basis needs at least d+1 nodes with nonzero weight");

    // p(x) = [1, (x - X)/H]; p(X) = e_0.
    Mat A = Mat::Zero(m, m);
    Wide B(m, static_cast<Eigen::Index>(ne));
    Vec p(m);
    for (std::size_t k = 0; k < ne; ++k) {
        p(0) = 1.0;
        for (int a = 0; a < d; ++a) p(a + 1) = (stencil.nodes[k].position[a] - X[a]) / params.support[a];
        A.noalias() += w[k] * p * p.transpose();
        B.col(static_cast<Eigen::Index>(k)) = w[k] * p;
    }

    Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kMaxCondition)
        throw DegenerateStencilError("ill-conditioned MLS moment matrix");

    Vec e0 = Vec::Zero(m);
    e0(0) = 1.0;
    // A is symmetric, so p^T A^{-1} B = (A^{-1} p)^T B.
    const Vec y = A.ldlt().solve(e0);
    for (std::size_t k = 0; k < ne; ++k) sv.phi[k] = y.dot(B.col(static_cast<Eigen::Index>(k)));
    return sv;
}

ShapeVector shape_vector_with_fallback(const Vec3& X, const Stencil& stencil, Basis basis,
                                       const WeightParams& params)
{
    if (basis == Basis::Constant) return shape_vector(X, stencil, basis, params);
    try {
        return shape_vector(X, stencil, basis, params);
    } catch (const DegenerateStencilError&) {
        ShapeVector sv = shape_vector(X, stencil, Basis::Constant, params);
        sv.fallback = true;
        return sv;
    }
}

std::vector<double> moment_matrix_inverse(const Vec3& X, const Stencil& stencil, const WeightParams& params)
{
    const int d = params.dim;
    const int m = d + 1;
    Mat A = Mat::Zero(m, m);
    Vec p(m);
    for (const auto& node : stencil.nodes) {
        const double w = node_weight(node.position, X, params);
        p(0) = 1.0;
        for (int a = 0; a < d; ++a) p(a + 1) = node.position[a];
        A.noalias() += w * p * p.transpose();
    }
    const Mat inv = A.inverse();
    std::vector<double> out(static_cast<std::size_t>(m * m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i * m + j)] = inv(i, j);
    return out;
}

bool verify_transform_invariance(const Vec3& X, const Stencil& stencil, Basis basis, const WeightParams& params,
                                 double scale, const Vec3& shift, bool scale_support)
{
    if (!(scale > 0.0)) throw ConfigError("transform scale must be positive");
    const ShapeVector ref = shape_vector(X, stencil, basis, params);

    Stencil moved = stencil;
    Vec3 Xm = X;
    for (int a = 0; a < params.dim; ++a) Xm[a] = scale * X[a] + shift[a];
    for (auto& node : moved.nodes)
        for (int a = 0; a < params.dim; ++a) node.position[a] = scale * node.position[a] + shift[a];
    WeightParams mp = params;
    if (scale_support)
        for (int a = 0; a < params.dim; ++a) mp.support[a] *= scale;

    ShapeVector out;
    try {
        out = shape_vector(Xm, moved, basis, mp);
    } catch (const DegenerateStencilError&) {
        return false;
    }
    for (std::size_t k = 0; k < ref.phi.size(); ++k)
        if (std::abs(ref.phi[k] - out.phi[k]) > 1e-12) return false;
    return true;
}

}  // namespace mlsib
