#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "mlsib/analysis.hpp"
#include "mlsib/checkpoint.hpp"
#include "mlsib/config.hpp"
#include "mlsib/report.hpp"
#include "mlsib/solver.hpp"

namespace mlsib {

// Everything a flow case needs at t = 0.
struct CaseSetup {
    StaggeredGrid grid;
    BoundarySpec bcs;
    FlowState state;
    std::optional<ImmersedSurface> surface;
    std::size_t warnings = 0;
};

CaseSetup setup_case(const CaseConfig& cfg);

// Markers for the configured body at rest (empty for shape "none").
Body build_body(const CaseConfig& cfg, const StaggeredGrid& grid, std::size_t& warnings);

// Analytic 2D Taylor-Green velocity and pressure on a periodic box.
void taylor_green_init(const StaggeredGrid& grid, FlowState& state, double nu, double t);
double taylor_green_error(const StaggeredGrid& grid, const FlowState& state, double nu, double t);

struct RunOptions {
    bool write_outputs = true;
    std::ostream* log = nullptr;  // progress lines every report_every steps
    // Called after every step; returning false stops the run early.
    std::function<bool(const StepRecord&, const StepDiagnostics&, const CaseSetup&)> on_step;
};

// Runs the case to t_end (or max_steps). Writes report.csv, summary.csv,
// config.toml and case-specific files into output_dir when requested. On
// failure the partial report is flushed before the exception propagates.
RunReport run_case(const CaseConfig& cfg, const RunOptions& options = {});

// Pressure coefficient around the body in the plane through its centre
// normal to z, sampled one cell outside the surface.
struct PressureProfile {
    std::vector<double> theta_deg;  // 0 at the front stagnation point
    std::vector<double> cp;
};
PressureProfile pressure_profile(const CaseConfig& cfg, const CaseSetup& setup, int samples = 37);
void write_pressure_profile_csv(const PressureProfile& profile, const std::string& path);

// F/F* histogram from a checkpoint carrying markers and desired forces.
analysis::RatioHistogram histogram_from_checkpoint(const Checkpoint& cp,
                                                   const analysis::HistogramOptions& options = {});

// Integrated |u_n| over the markers: sum_l |r_l . n_l| A_l.
double leakage(const MarkerSet& markers, const std::vector<Vec3>& residual);

}  // namespace mlsib
