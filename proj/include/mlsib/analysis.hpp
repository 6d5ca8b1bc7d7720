#pragma once

#include <string>
#include <vector>

#include "mlsib/coupling.hpp"
#include "mlsib/mls.hpp"

namespace mlsib::analysis {

// Straight boundary y = Y0 parallel to the x axis on a uniform 2D mesh
// whose cell-centred rows sit at integer multiples of h. The mesh is
// periodic along the boundary, so the marker line has no ends.
struct StraightLineSetup {
    double h = 1.0;
    int markers_per_cell = 64;
    int extent_cells = 16;  // periodic length, >= 7
    int normal_cells = 10;
};

// F/F* for every marker of the line with constant desired force F = 1.
std::vector<double> straight_line_ratios(double Y0, double alpha, Basis basis, const StraightLineSetup& setup = {});

// F/F* at the probe marker `probe` (index along the line).
double straight_line_ratio_numeric(double Y0, double alpha, Basis basis, int markers_per_cell = 64,
                                   std::size_t probe = 0, const StraightLineSetup& setup = {});

struct ClosedFormTerms {
    std::array<double, 3> C{};  // row sums of the probe's Shepard weights
    std::array<double, 3> K{};  // dense-marker spread coefficients per row
    double ratio = 0.0;         // F/F* = 1 / sum C_i K_i
    int quadrature_points = 0;  // per cell, at convergence
};

// Constant basis: C_1, C_4, C_7 from the exponential row ratios and K_i by
// composite midpoint quadrature, refined until n and 2n agree to 1e-7
// relative. Y0 is measured in units of h from a grid row; the result does
// not depend on h. Throws NumericalError if the quadrature does not settle.
ClosedFormTerms closed_form_terms_const_basis(double Y0_over_h, double alpha);
double closed_form_ratio_const_basis(double Y0_over_h, double alpha);

struct RatioProfile {
    std::vector<double> y0;  // in units of h, over [-1/2, 1/2]
    std::vector<double> ratio;
    double alpha = 2.0 / 3.0;
    Basis basis = Basis::Linear;
    int markers_per_cell = 64;

    double delta() const;  // max - min
};

RatioProfile ratio_profile(double alpha, Basis basis, int y0_steps, int markers_per_cell = 32);

struct AlphaSweep {
    std::vector<double> alpha;
    std::vector<double> delta;

    double argmin() const;
};

AlphaSweep delta_ratio_sweep(double alpha_min, double alpha_max, int alpha_steps, Basis basis, int y0_steps,
                             int markers_per_cell = 32);

struct HistogramOptions {
    double lo = 0.0;
    double hi = 5.0;
    int bins = 100;
    double window = 0.15;  // relative half-width around the peak
};

struct RatioHistogram {
    std::vector<double> bin_center;
    std::vector<std::size_t> count;
    std::vector<double> ratios;  // every counted marker's F/F*
    std::size_t underflow = 0;
    std::size_t overflow = 0;
    std::size_t excluded = 0;  // markers with negligible F or F*
    double peak = 0.0;         // centre of the fullest bin
    double fraction_in_window = 0.0;
    bool single_peaked = false;

    std::size_t total() const { return ratios.size(); }
};

// Per marker, the ratio uses the component with the largest |F|.
// Throws NumericalError when every marker is excluded.
RatioHistogram ratio_histogram(const std::vector<Vec3>& force, const std::vector<Vec3>& actual,
                               const HistogramOptions& options = {});

// F* for a full vector force field on a marker set.
std::vector<Vec3> actual_force_vectors(const std::vector<Vec3>& force, const TransferOperator& op);

struct InvarianceReport {
    bool a23_applicable = false;
    double a23_relative = 0.0;  // |a23| / max |a_ij|
    bool a23_zero = false;
    double x0_spread = 0.0;  // max relative deviation of F/F* along the line
    bool x0_invariant = false;
    double h_spread = 0.0;  // max relative deviation over h in {0.5, 1, 2}
    bool h_invariant = false;
    double row_sum_spread = 0.0;  // max deviation of stencil row sums across probes

    bool all() const { return (!a23_applicable || a23_zero) && x0_invariant && h_invariant; }
};

// Executable form of the straight-boundary invariance arguments. With a
// non-zero rotation the line is tilted and the X0 check is expected to fail.
InvarianceReport verify_appendix_invariances(double alpha, Basis basis, double Y0_over_h = 0.3,
                                             double rotation_deg = 0.0);

// F/F* along a finite line tilted by `rotation_deg`, probes spanning one
// cell near the middle of the line.
std::vector<double> tilted_line_ratios(double Y0_over_h, double alpha, Basis basis, double rotation_deg,
                                       int markers_per_cell = 16);

void write_ratio_profile_csv(const RatioProfile& profile, const std::string& path);
void write_alpha_sweep_csv(const AlphaSweep& sweep, const std::string& path);
void write_histogram_csv(const RatioHistogram& hist, const std::string& path);

}  // namespace mlsib::analysis
