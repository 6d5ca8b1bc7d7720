#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mlsib/common.hpp"
#include "mlsib/surface.hpp"

namespace mlsib {

struct ForceCoefficients {
    double cd = 0.0;  // component along the drag axis, signed by drag_sign
    double cl = 0.0;  // component along the next axis
    Vec3 c{0.0, 0.0, 0.0};
};

// Body force = -sum_l F dV^l, normalised by 1/2 U^2 A_ref with A_ref =
// pi D^2 / 4 in 3D and D in 2D. Density is 1.
ForceCoefficients force_coefficients(const std::vector<Vec3>& marker_force, const std::vector<double>& volume,
                                     double u_ref, double d_ref, int dim);
ForceCoefficients force_coefficients(const Vec3& body_force, double u_ref, double d_ref, int dim, int drag_axis = 0,
                                     double drag_sign = 1.0);

struct ResidualNorms {
    double l1 = 0.0;  // mean |r|
    double un = 0.0;  // mean |r . n|
    double ut = 0.0;  // mean |r - (r . n) n|
};

// r = U^L(after forcing) - U^d per marker, normalised by u_ref.
ResidualNorms residual_norms(const MarkerSet& markers, const std::vector<Vec3>& residual, double u_ref);

// Dominant frequency of `signal` sampled every dt after dropping the first
// `transient` fraction, from the mean spacing of upward zero crossings of
// the de-meaned signal, refined by linear interpolation. Returns nothing
// when fewer than five full periods are present or the amplitude is
// negligible.
std::optional<double> strouhal(const std::vector<double>& signal, double dt, double d_ref, double u_ref,
                               double transient = 0.0);

struct StepRecord {
    int step = 0;
    double time = 0.0;
    double dt = 0.0;
    double cd = 0.0;
    double cl = 0.0;
    Vec3 body_force{0.0, 0.0, 0.0};
    ResidualNorms residual;
    double leakage = 0.0;  // integrated |u_n| along the surface
    std::array<double, 3> Z{1.0, 1.0, 1.0};
    double seconds = 0.0;
    double forcing_seconds = 0.0;
    double mass_imbalance = 0.0;
    double max_divergence = 0.0;
    double kinetic_energy = 0.0;
};

struct RunReport {
    std::string case_id;
    std::string scheme;
    std::vector<StepRecord> steps;
    std::optional<double> strouhal;
    double mean_cd = 0.0;
    double mean_cl = 0.0;
    double max_cd = 0.0;
    ResidualNorms mean_residual;   // over the averaging window
    ResidualNorms final_residual;  // last step
    double leakage = 0.0;          // integrated |u_n|, averaged over the window
    double max_divergence = 0.0;
    double mean_step_seconds = 0.0;
    std::size_t markers = 0;
    std::size_t fallback_count = 0;
    std::size_t warnings = 0;
    std::size_t Z_degenerate = 0;
    bool completed = false;
    std::string abort_reason;

    bool all_finite() const;
};

// Per-step diagnostics, one row per record, headed by `# schema=1`.
void write_report_csv(const RunReport& report, const std::string& path);
// Key/value summary with the same schema header.
void write_summary_csv(const RunReport& report, const std::string& path);

}  // namespace mlsib
