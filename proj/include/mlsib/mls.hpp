#pragma once

#include <array>
#include <string>
#include <vector>

#include "mlsib/common.hpp"
#include "mlsib/grid.hpp"

namespace mlsib {

// Exponential MLS weight with compact support. `support` is H per axis.
struct WeightParams {
    double alpha = 2.0 / 3.0;
    Vec3 support{1.5, 1.5, 1.5};
    int dim = 3;
};

WeightParams weight_params(const StaggeredGrid& grid, double alpha);

enum class Basis { Constant, Linear };

const char* to_string(Basis basis);
Basis basis_from_string(const std::string& name);

struct ShapeVector {
    Location location = Location::Cell;
    std::vector<std::array<int, 3>> nodes;  // wrapped lattice indices
    std::vector<Vec3> positions;            // unwrapped node coordinates
    std::vector<double> phi;
    bool fallback = false;  // linear basis replaced by the constant one
};

// exp(-(r/alpha)^2) for r <= 1, exactly 0 beyond.
double weight(double r, double alpha);

// Tensor-product weight of node x relative to marker X.
double node_weight(const Vec3& x, const Vec3& X, const WeightParams& params);

// Phi^T = p^T(X) A^{-1} B. The linear basis is evaluated in coordinates
// centred on X and scaled by H, which leaves Phi unchanged. Throws
// DegenerateStencilError when A is singular or its condition number
// exceeds 1e12.
ShapeVector shape_vector(const Vec3& X, const Stencil& stencil, Basis basis, const WeightParams& params);

// Same as shape_vector but falls back to the constant basis for degenerate
// linear stencils, setting ShapeVector::fallback.
ShapeVector shape_vector_with_fallback(const Vec3& X, const Stencil& stencil, Basis basis,
                                       const WeightParams& params);

// The (d+1)x(d+1) moment matrix inverse in the raw node coordinates, row
// major. Only meaningful for the linear basis; used by invariance checks.
std::vector<double> moment_matrix_inverse(const Vec3& X, const Stencil& stencil, const WeightParams& params);

// True when Phi is unchanged (to 1e-12) after mapping every coordinate
// x -> s*x + t. With scale_support the support radius becomes s*H so the
// normalised distances are preserved.
bool verify_transform_invariance(const Vec3& X, const Stencil& stencil, Basis basis, const WeightParams& params,
                                 double scale, const Vec3& shift, bool scale_support = true);

}  // namespace mlsib
