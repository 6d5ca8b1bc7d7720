#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlsib/grid.hpp"
#include "mlsib/mls.hpp"
#include "mlsib/surface.hpp"

namespace mlsib {

// Shape vectors of every marker on one lattice, flattened for fast
// gather/scatter. Entries of marker l live in [start[l], start[l+1]).
struct ComponentTransfer {
    Location location = Location::Cell;
    std::array<int, 3> extent{};  // layout of the Field this operator addresses
    std::array<int, 3> ghost{};
    std::vector<std::size_t> start;
    std::vector<std::size_t> offset;  // flat Field offsets
    std::vector<double> phi;
    std::vector<Vec3> position;  // unwrapped node coordinates
    std::vector<double> coeff;   // c_l = dV^l / sum_k phi_k dV_k
    std::vector<std::size_t> touched;  // unique offsets, ascending

    std::size_t markers() const { return coeff.size(); }
    Field make_scratch() const { return Field(extent, ghost); }
};

class TransferOperator {
public:
    std::vector<ComponentTransfer> components;
    std::vector<Vec3> built_at;  // marker positions used to build
    std::size_t fallback_count = 0;
    double staleness_limit = 0.0;  // 0.5 h
    double cell_volume = 0.0;

    std::size_t markers() const { return built_at.size(); }
    // Throws StaleOperatorError if any marker moved more than 0.5 h.
    void check_current(const MarkerSet& markers) const;

    // Per-component force buffer, zero outside the last pass's touched nodes.
    Field& scratch(int component) const;

private:
    mutable std::vector<Field> scratch_;
};

// Builds shape vectors for every marker on each requested lattice and sets
// markers.volume (dV^l = A^l h^l) from the first lattice.
TransferOperator build_transfer(const StaggeredGrid& grid, MarkerSet& markers, Basis basis, double alpha,
                                const std::vector<Location>& locations);

// Face lattices of every velocity component.
TransferOperator build_velocity_transfer(const StaggeredGrid& grid, MarkerSet& markers, Basis basis,
                                         double alpha);

// U^L(X^l) = sum_k u_k phi_k^l.
void interpolate(const Field& field, const ComponentTransfer& op, std::span<double> out);
std::vector<double> interpolate(const Field& field, const MarkerSet& markers, const TransferOperator& op,
                                int component);

// F = (U^d - U^L) / dt.
std::vector<double> desired_force(std::span<const double> desired, std::span<const double> interpolated,
                                  double dt);

// f(x_k) += sum_l c_l phi_k^l F(X^l), markers visited in index order.
void spread_add(std::span<const double> force, const ComponentTransfer& op, Field& out, double scale = 1.0);
Field spread(std::span<const double> force, const TransferOperator& op, int component);

// F*(X^l): spread then interpolate.
std::vector<double> actual_force(std::span<const double> force, const TransferOperator& op, int component);

struct CorrectionResult {
    double Z = 1.0;
    bool degenerate = false;  // sum G^2 == 0, nothing to correct
    double a2 = 0.0;          // sum G^2
    double a1 = 0.0;          // -2 sum G F
    double a0 = 0.0;          // sum F^2
};

// Least-squares Z minimising sum_l (Z G_l - F_l)^2 with G = F* at Z = 1.
CorrectionResult correction_coefficient(std::span<const double> force, std::span<const double> actual);
CorrectionResult correction_coefficient(std::span<const double> force, const TransferOperator& op, int component);

// Er_total(Z) = sum_l (Z G_l - F_l)^2.
double total_error(std::span<const double> force, std::span<const double> actual, double Z);

struct ForcingScheme {
    enum class Kind { Baseline, Corrected, Iterative, Hybrid };
    Kind kind = Kind::Baseline;
    int iterations = 1;

    static ForcingScheme baseline() { return {Kind::Baseline, 1}; }
    static ForcingScheme corrected() { return {Kind::Corrected, 1}; }
    static ForcingScheme iterative(int n);
    static ForcingScheme hybrid(int n);

    bool corrects() const { return kind == Kind::Corrected || kind == Kind::Hybrid; }
    int passes() const { return (kind == Kind::Iterative || kind == Kind::Hybrid) ? iterations : 1; }
    std::string name() const;
    bool operator==(const ForcingScheme&) const = default;
};

// Accepts baseline, corrected, iterative(N) / iterative:N, hybrid(N) / hybrid:N.
ForcingScheme parse_scheme(const std::string& text);

struct ForcingOptions {
    bool compute_residual = true;   // interpolate after forcing
    bool record_force_field = true; // accumulate applied force into FlowState::force
};

struct ForcingDiagnostics {
    int passes = 0;
    std::array<double, 3> Z{1.0, 1.0, 1.0};             // last pass
    std::vector<std::array<double, 3>> Z_history;        // one entry per pass
    std::array<bool, 3> Z_degenerate{false, false, false};
    std::vector<Vec3> first_force;    // F of the first pass (before any Z)
    std::vector<Vec3> applied_force;  // sum over passes of Z * F
    std::vector<Vec3> residual;       // U^L after forcing minus U^d
    double residual_l1 = 0.0;         // mean |residual|
    std::array<double, 3> er_total_baseline{0.0, 0.0, 0.0};   // Er_total(1), first pass
    std::array<double, 3> er_total_corrected{0.0, 0.0, 0.0};  // Er_total(Z), first pass
};

// Applies the IBM forcing to the intermediate velocity in place:
//  Baseline     u += dt f
//  Corrected    u += dt Z f, Z per component
//  Iterative(n) n passes of interpolate / force / spread / add
//  Hybrid(n)    Iterative(n) with Z recomputed and applied every pass
ForcingDiagnostics apply_forcing(const ForcingScheme& scheme, FlowState& state, const MarkerSet& markers,
                                 const TransferOperator& op, double dt, const ForcingOptions& options = {});

struct MomentBalance {
    Vec3 lagrangian_momentum{};  // sum_l F dV^l
    Vec3 eulerian_momentum{};    // sum_k f dV_k
    Vec3 lagrangian_torque{};    // sum_l X x F dV^l
    Vec3 eulerian_torque{};      // sum_k x_k x f dV_k
};

// Momentum and torque of a Lagrangian force field before and after spreading.
MomentBalance spread_moments(const std::vector<Vec3>& force, const MarkerSet& markers, const TransferOperator& op);

}  // namespace mlsib
