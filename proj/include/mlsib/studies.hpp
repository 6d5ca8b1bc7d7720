#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mlsib/cases.hpp"

namespace mlsib {

// Least-squares slope of log(err) against log(h).
double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

struct ConvergenceRow {
    double h = 0.0;
    std::string scheme;
    double residual = 0.0;  // L1 residual |u| averaged over the run's averaging window
    double seconds = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::vector<std::string> schemes;
    std::vector<double> slopes;  // one per scheme

    double slope(const std::string& scheme) const;
};

// Runs the template once per (grid spacing, scheme). The domain length and
// body stay fixed; cell counts follow from the spacing. Needs >= 3 sizes.
ConvergenceTable convergence_study(const CaseConfig& base, const std::vector<double>& spacings,
                                   const std::vector<ForcingScheme>& schemes, std::ostream* log = nullptr);
void write_convergence_csv(const ConvergenceTable& table, const std::string& path);

struct BenchRow {
    std::string scheme;
    double seconds_per_step = 0.0;  // median over all timed steps
    double relative = 0.0;          // to the first scheme
    double residual = 0.0;          // mean L1 |u| over the measured steps
    double leakage = 0.0;           // mean integrated |u_n| over the measured steps
};

struct BenchOptions {
    int warmup_steps = 100;
    int measure_steps = 50;
    int repeats = 5;
    bool residual_diagnostics = false;  // timing excludes the diagnostic interpolation
};

// Develops the flow with the configured scheme, then advances identical
// copies of that state with each scheme in interleaved repeats. Residual and
// leakage come from a separate diagnostic pass over the same steps.
std::vector<BenchRow> scheme_benchmark(const CaseConfig& base, const std::vector<ForcingScheme>& schemes,
                                       const BenchOptions& options = {}, std::ostream* log = nullptr);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);

}  // namespace mlsib
