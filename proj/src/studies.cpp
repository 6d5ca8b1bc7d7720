#include "mlsib/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

namespace mlsib {

double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err)
{
    if (h.size() != err.size() || h.size() < 2) throw ConfigError("slope fit needs matching arrays of length >= 2");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw NumericalError("slope fit needs positive values");
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw NumericalError("slope fit needs distinct grid spacings");
    return (n * sxy - sx * sy) / den;
}

double ConvergenceTable::slope(const std::string& scheme) const
{
    for (std::size_t i = 0; i < schemes.size(); ++i)
        if (schemes[i] == scheme) return slopes[i];
    throw ConfigError("scheme '" + scheme + "' not in the convergence table");
}

ConvergenceTable convergence_study(const CaseConfig& base, const std::vector<double>& spacings,
                                   const std::vector<ForcingScheme>& schemes, std::ostream* log)
{
    if (spacings.size() < 3) throw ConfigError("a convergence study needs at least 3 grid sizes");
    if (schemes.empty()) throw ConfigError("a convergence study needs at least one scheme");
    ConvergenceTable table;
    for (const auto& s : schemes) table.schemes.push_back(s.name());

    for (const auto& scheme : schemes) {
        std::vector<double> hs, errs;
        for (double h : spacings) {
            if (!(h > 0.0)) throw ConfigError("grid spacings must be positive");
            CaseConfig cfg = base;
            cfg.scheme = scheme;
            cfg.write_checkpoint = false;
            for (int a = 0; a < cfg.grid.dim; ++a) {
                const double length = base.grid.cells[a] * base.grid.spacing[a];
                cfg.grid.cells[a] = static_cast<int>(std::lround(length / h));
                cfg.grid.spacing[a] = h;
            }
            const auto t0 = std::chrono::steady_clock::now();
            RunOptions opts;
            opts.write_outputs = false;
            const RunReport r = run_case(cfg, opts);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            table.rows.push_back({h, scheme.name(), r.mean_residual.l1, secs});
            if (log)
                *log << scheme.name() << " h=" << h << " residual=" << r.mean_residual.l1 << " (" << secs << " s)\n";
            hs.push_back(h);
            errs.push_back(r.mean_residual.l1);
        }
        table.slopes.push_back(fit_loglog_slope(hs, errs));
    }
    return table;
}

void write_convergence_csv(const ConvergenceTable& t, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(10);
    out << "# schema=1\nscheme,h,residual_l1,seconds\n";
    for (const auto& r : t.rows) out << r.scheme << ',' << r.h << ',' << r.residual << ',' << r.seconds << '\n';
    for (std::size_t i = 0; i < t.schemes.size(); ++i) out << "# slope " << t.schemes[i] << ' ' << t.slopes[i] << '\n';
}

namespace {

struct Snapshot {
    FlowState state;
    ImmersedSurface surface;
};

}  // namespace

std::vector<BenchRow> scheme_benchmark(const CaseConfig& base, const std::vector<ForcingScheme>& schemes,
                                       const BenchOptions& options, std::ostream* log)
{
    if (schemes.empty()) throw ConfigError("benchmark needs at least one scheme");
    if (options.measure_steps < 1 || options.repeats < 1 || options.warmup_steps < 0)
        throw ConfigError("benchmark step and repeat counts must be positive");
    CaseSetup setup = setup_case(base);
    if (!setup.surface) throw ConfigError("benchmark needs an immersed body");
    FlowSolver solver(setup.grid, setup.bcs, base.fluid);
    ForcingOptions quiet;
    quiet.compute_residual = false;
    quiet.record_force_field = false;

    // Fixed time step so every scheme advances through the same times.
    const double dt = solver.compute_dt(setup.state, 0.0);
    for (int s = 0; s < options.warmup_steps; ++s)
        solver.step(setup.state, dt, base.scheme, &*setup.surface, quiet, base.timing);
    const Snapshot start{setup.state, *setup.surface};

    // One solver serves every scheme; it keeps no state between steps. The
    // schemes advance their own copies of the start state in turn, one
    // timed step each, so drift in machine speed hits all of them alike.
    // The median is taken over every timed step.
    const std::size_t ns = schemes.size();
    std::vector<std::vector<double>> samples(ns);
    ForcingOptions fo = quiet;
    fo.compute_residual = options.residual_diagnostics;
    for (int rep = 0; rep < options.repeats; ++rep) {
        std::vector<Snapshot> runs(ns, start);
        for (int s = 0; s < options.measure_steps; ++s)
            for (std::size_t k = 0; k < ns; ++k) {
                const std::size_t i = (s + rep) % 2 ? ns - 1 - k : k;
                const auto t0 = std::chrono::steady_clock::now();
                solver.step(runs[i].state, dt, schemes[i], &runs[i].surface, fo, base.timing);
                samples[i].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
    }

    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        BenchRow row;
        row.scheme = schemes[i].name();
        auto v = samples[i];
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        row.seconds_per_step = v[v.size() / 2];

        Snapshot run = start;
        FlowSolver fresh(setup.grid, setup.bcs, base.fluid);
        ForcingOptions diag;
        diag.record_force_field = false;
        for (int s = 0; s < options.measure_steps; ++s) {
            const StepDiagnostics d = fresh.step(run.state, dt, schemes[i], &run.surface, diag, base.timing);
            row.residual += residual_norms(run.surface.markers, d.forcing.residual, base.u_ref).l1;
            row.leakage += leakage(run.surface.markers, d.forcing.residual);
        }
        row.residual /= options.measure_steps;
        row.leakage /= options.measure_steps;
        rows.push_back(row);
    }
    for (auto& r : rows) r.relative = r.seconds_per_step / rows.front().seconds_per_step;
    if (log)
        for (const auto& r : rows)
            *log << r.scheme << ": " << r.seconds_per_step * 1e3 << " ms/step (x" << r.relative
                 << "), residual " << r.residual << ", leakage " << r.leakage << '\n';
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(10);
    out << "# schema=1\nscheme,seconds_per_step,relative,residual_l1,leakage\n";
    for (const auto& r : rows)
        out << r.scheme << ',' << r.seconds_per_step << ',' << r.relative << ',' << r.residual << ',' << r.leakage
            << '\n';
}

}  // namespace mlsib
