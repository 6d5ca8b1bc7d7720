#include "mlsib/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace mlsib::analysis {

namespace {

StaggeredGrid strip_grid(const StraightLineSetup& setup)
{
    if (setup.extent_cells < 7) throw ConfigError("straight-line strip needs at least 7 cells along the line");
    GridConfig cfg;
    cfg.dim = 2;
    cfg.cells = {setup.extent_cells, setup.normal_cells, 1};
    cfg.spacing = {setup.h, setup.h, setup.h};
    // Cell-centred nodes at x = i h and y = (j - normal_cells/2) h.
    cfg.origin = {-0.5 * setup.h, -(setup.normal_cells / 2 + 0.5) * setup.h, 0.0};
    cfg.periodic = {true, false, true};
    return StaggeredGrid(cfg);
}

std::vector<double> ratios_from_unit_force(const StaggeredGrid& grid, MarkerSet& markers, double alpha, Basis basis)
{
    const TransferOperator op = build_transfer(grid, markers, basis, alpha, {Location::Cell});
    const std::vector<double> F(markers.size(), 1.0);
    const std::vector<double> G = actual_force(F, op, 0);
    std::vector<double> r(G.size());
    for (std::size_t l = 0; l < G.size(); ++l) r[l] = 1.0 / G[l];
    return r;
}

void open_csv(std::ofstream& out, const std::string& path, const char* header)
{
    out.open(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(12);
    out << "# schema=1\n" << header << '\n';
}

// Shepard weight of grid node (xc, yr) seen from a marker at (x, Y0); the
// marker's own 3x3 stencil is rebuilt here from the nearest-node rule.
double shepard_phi(double x, double Y0, int column, int row, double alpha)
{
    const double H = 1.5;
    const int c0 = static_cast<int>(std::floor(x + 0.5));
    const int r0 = static_cast<int>(std::floor(Y0 + 0.5));
    if (std::abs(column - c0) > 1 || std::abs(row - r0) > 1) return 0.0;
    const auto w = [&](double dx, double dy) {
        const double rx = std::abs(dx) / H;
        const double ry = std::abs(dy) / H;
        if (rx > 1.0 || ry > 1.0) return 0.0;
        return std::exp(-(rx * rx + ry * ry) / (alpha * alpha));
    };
    double total = 0.0;
    for (int c = c0 - 1; c <= c0 + 1; ++c)
        for (int r = r0 - 1; r <= r0 + 1; ++r) total += w(c - x, r - Y0);
    return w(column - x, row - Y0) / total;
}

double quadrature_K(double Y0, int row, double alpha, int per_cell)
{
    // Column 0 receives spread from markers with x in [-1.5, 1.5].
    const int cells = 4;
    double sum = 0.0;
    for (int m = 0; m < cells * per_cell; ++m) {
        const double x = -2.0 + (m + 0.5) / per_cell;
        sum += shepard_phi(x, Y0, 0, row, alpha);
    }
    return sum / per_cell;
}

}  // namespace

std::vector<double> straight_line_ratios(double Y0, double alpha, Basis basis, const StraightLineSetup& setup)
{
    const StaggeredGrid grid = strip_grid(setup);
    MarkerSet markers =
        seed_line_markers(Y0, setup.markers_per_cell, setup.extent_cells, grid, grid.origin()[0]);
    return ratios_from_unit_force(grid, markers, alpha, basis);
}

double straight_line_ratio_numeric(double Y0, double alpha, Basis basis, int markers_per_cell, std::size_t probe,
                                   const StraightLineSetup& setup)
{
    StraightLineSetup s = setup;
    s.markers_per_cell = markers_per_cell;
    const std::vector<double> r = straight_line_ratios(Y0, alpha, basis, s);
    if (probe >= r.size()) throw ConfigError("probe marker index out of range");
    return r[probe];
}

ClosedFormTerms closed_form_terms_const_basis(double Y0, double alpha)
{
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    ClosedFormTerms t;
    const double H = 1.5;
    const int r0 = static_cast<int>(std::floor(Y0 + 0.5));
    const std::array<int, 3> rows{r0 - 1, r0, r0 + 1};
    std::array<double, 3> d{};
    for (int i = 0; i < 3; ++i) d[i] = (rows[i] - Y0) / H;
    for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += std::exp((d[i] * d[i] - d[j] * d[j]) / (alpha * alpha));
        t.C[i] = 1.0 / s;
    }

    int n = 64;
    std::array<double, 3> prev{};
    for (int i = 0; i < 3; ++i) prev[i] = quadrature_K(Y0, rows[i], alpha, n);
    for (;;) {
        if (n > (1 << 18)) throw NumericalError("K quadrature did not converge");
        const int n2 = 2 * n;
        std::array<double, 3> next{};
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            next[i] = quadrature_K(Y0, rows[i], alpha, n2);
            worst = std::max(worst, std::abs(next[i] - prev[i]) / std::max(std::abs(next[i]), 1e-300));
        }
        prev = next;
        n = n2;
        if (worst < 1e-7) break;
    }
    t.K = prev;
    t.quadrature_points = n;
    double fs = 0.0;
    for (int i = 0; i < 3; ++i) fs += t.C[i] * t.K[i];
    t.ratio = 1.0 / fs;
    return t;
}

double closed_form_ratio_const_basis(double Y0, double alpha) { return closed_form_terms_const_basis(Y0, alpha).ratio; }

double RatioProfile::delta() const
{
    if (ratio.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    return *hi - *lo;
}

RatioProfile ratio_profile(double alpha, Basis basis, int y0_steps, int markers_per_cell)
{
    if (y0_steps < 2) throw ConfigError("Y0 sweep needs at least 2 samples");
    RatioProfile p;
    p.alpha = alpha;
    p.basis = basis;
    p.markers_per_cell = markers_per_cell;
    StraightLineSetup setup;
    setup.markers_per_cell = markers_per_cell;
    for (int i = 0; i < y0_steps; ++i) {
        const double y = -0.5 + static_cast<double>(i) / (y0_steps - 1);
        p.y0.push_back(y);
        p.ratio.push_back(straight_line_ratio_numeric(y, alpha, basis, markers_per_cell, 0, setup));
    }
    return p;
}

double AlphaSweep::argmin() const
{
    if (delta.empty()) throw NumericalError("empty alpha sweep");
    const auto it = std::min_element(delta.begin(), delta.end());
    return alpha[static_cast<std::size_t>(it - delta.begin())];
}

AlphaSweep delta_ratio_sweep(double alpha_min, double alpha_max, int alpha_steps, Basis basis, int y0_steps,
                             int markers_per_cell)
{
    if (!(alpha_min > 0.0) || alpha_max > 2.0 || alpha_max < alpha_min)
        throw ConfigError("alpha range must lie within (0, 2]");
    if (alpha_steps < 1) throw ConfigError("alpha sweep needs at least one sample");
    AlphaSweep s;
    for (int i = 0; i < alpha_steps; ++i) {
        const double a =
            alpha_steps == 1 ? alpha_min : alpha_min + (alpha_max - alpha_min) * i / (alpha_steps - 1);
        s.alpha.push_back(a);
        s.delta.push_back(ratio_profile(a, basis, y0_steps, markers_per_cell).delta());
    }
    return s;
}

std::vector<Vec3> actual_force_vectors(const std::vector<Vec3>& force, const TransferOperator& op)
{
    std::vector<Vec3> out(force.size(), Vec3{0.0, 0.0, 0.0});
    std::vector<double> F(force.size());
    for (std::size_t c = 0; c < op.components.size(); ++c) {
        for (std::size_t l = 0; l < force.size(); ++l) F[l] = force[l][c];
        const std::vector<double> G = actual_force(F, op, static_cast<int>(c));
        for (std::size_t l = 0; l < force.size(); ++l) out[l][c] = G[l];
    }
    return out;
}

RatioHistogram ratio_histogram(const std::vector<Vec3>& force, const std::vector<Vec3>& actual,
                               const HistogramOptions& options)
{
    if (options.bins < 1 || !(options.hi > options.lo)) throw ConfigError("invalid histogram range");
    RatioHistogram hist;
    double fmax = 0.0;
    for (const auto& F : force)
        for (double c : F) fmax = std::max(fmax, std::abs(c));
    const double floor = 1e-12 * fmax;

    hist.count.assign(static_cast<std::size_t>(options.bins), 0);
    const double width = (options.hi - options.lo) / options.bins;
    for (int b = 0; b < options.bins; ++b) hist.bin_center.push_back(options.lo + (b + 0.5) * width);

    for (std::size_t l = 0; l < force.size(); ++l) {
        int comp = 0;
        for (int c = 1; c < 3; ++c)
            if (std::abs(force[l][c]) > std::abs(force[l][comp])) comp = c;
        const double F = force[l][comp];
        const double Fs = actual[l][comp];
        if (!(std::abs(F) > floor) || fmax == 0.0 || !(std::abs(Fs) > 1e-300)) {
            ++hist.excluded;
            continue;
        }
        const double r = F / Fs;
        hist.ratios.push_back(r);
        if (r < options.lo) {
            ++hist.underflow;
        } else if (r >= options.hi) {
            ++hist.overflow;
        } else {
            ++hist.count[static_cast<std::size_t>(std::min(options.bins - 1, static_cast<int>((r - options.lo) / width)))];
        }
    }
    if (hist.ratios.empty()) throw NumericalError("every marker was excluded from the F/F* histogram");

    const auto peak_it = std::max_element(hist.count.begin(), hist.count.end());
    const std::size_t peak_bin = static_cast<std::size_t>(peak_it - hist.count.begin());
    hist.peak = hist.bin_center[peak_bin];
    std::size_t inside = 0;
    for (double r : hist.ratios)
        if (std::abs(r - hist.peak) <= options.window * std::abs(hist.peak)) ++inside;
    hist.fraction_in_window = static_cast<double>(inside) / static_cast<double>(hist.ratios.size());

    // Secondary maxima count as separate peaks when they reach a quarter of
    // the main peak and the valley between them drops below half their height.
    const std::size_t nb = hist.count.size();
    std::vector<double> smooth(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        double s = 0.0;
        int n = 0;
        for (int d = -1; d <= 1; ++d) {
            const long j = static_cast<long>(b) + d;
            if (j < 0 || j >= static_cast<long>(nb)) continue;
            s += static_cast<double>(hist.count[static_cast<std::size_t>(j)]);
            ++n;
        }
        smooth[b] = s / n;
    }
    const std::size_t main = static_cast<std::size_t>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
    hist.single_peaked = true;
    for (std::size_t b = 0; b < nb; ++b) {
        if (b == main || smooth[b] < 0.25 * smooth[main]) continue;
        const bool local_max = (b == 0 || smooth[b] >= smooth[b - 1]) && (b + 1 == nb || smooth[b] >= smooth[b + 1]);
        if (!local_max) continue;
        const std::size_t lo = std::min(b, main);
        const std::size_t hi = std::max(b, main);
        const double valley = *std::min_element(smooth.begin() + static_cast<long>(lo), smooth.begin() + static_cast<long>(hi) + 1);
        if (valley < 0.5 * smooth[b]) hist.single_peaked = false;
    }
    return hist;
}

std::vector<double> tilted_line_ratios(double Y0, double alpha, Basis basis, double rotation_deg, int markers_per_cell)
{
    GridConfig cfg;
    cfg.dim = 2;
    cfg.cells = {48, 48, 1};
    cfg.spacing = {1.0, 1.0, 1.0};
    cfg.origin = {-24.5, -24.5, 0.0};
    cfg.periodic = {false, false, true};
    const StaggeredGrid grid(cfg);

    const double th = rotation_deg * std::numbers::pi / 180.0;
    const Vec3 dir{std::cos(th), std::sin(th), 0.0};
    const Vec3 normal{-dir[1], dir[0], 0.0};
    const double half = 18.0;
    const double ds = 1.0 / markers_per_cell;
    MarkerSet markers;
    markers.dim = 2;
    std::vector<std::size_t> probes;
    const int count = static_cast<int>(2.0 * half * markers_per_cell);
    for (int m = 0; m < count; ++m) {
        const double s = -half + (m + 0.5) * ds;
        markers.push({s * dir[0], Y0 + s * dir[1], 0.0}, ds, normal, ds);
        if (s >= 0.0 && s < 1.0) probes.push_back(static_cast<std::size_t>(m));
    }
    const std::vector<double> all = ratios_from_unit_force(grid, markers, alpha, basis);
    std::vector<double> out;
    for (std::size_t p : probes) out.push_back(all[p]);
    return out;
}

InvarianceReport verify_appendix_invariances(double alpha, Basis basis, double Y0, double rotation_deg)
{
    InvarianceReport rep;
    constexpr double tol = 1e-10;
    const auto spread_of = [](const std::vector<double>& v) {
        double worst = 0.0;
        for (double x : v) worst = std::max(worst, std::abs(x - v.front()) / std::abs(v.front()));
        return worst;
    };

    StraightLineSetup setup;
    const StaggeredGrid grid = strip_grid(setup);
    const WeightParams params = weight_params(grid, alpha);

    if (basis == Basis::Linear && rotation_deg == 0.0) {
        rep.a23_applicable = true;
        const Vec3 X{0.37, Y0, 0.0};
        const std::vector<double> inv = moment_matrix_inverse(X, grid.stencil_for(X, Location::Cell), params);
        double scale = 0.0;
        for (double v : inv) scale = std::max(scale, std::abs(v));
        rep.a23_relative = std::abs(inv[1 * 3 + 2]) / scale;
        rep.a23_zero = rep.a23_relative < 1e-12;
    }

    std::vector<double> along;
    if (rotation_deg == 0.0) {
        along = straight_line_ratios(Y0, alpha, basis, setup);
        // Row sums of phi at every probe in the first cell.
        std::array<double, 3> ref{};
        for (int m = 0; m < setup.markers_per_cell; ++m) {
            const Vec3 X{-0.5 + (m + 0.5) / setup.markers_per_cell, Y0, 0.0};
            const ShapeVector sv = shape_vector(X, grid.stencil_for(X, Location::Cell), basis, params);
            std::array<double, 3> rows{};
            const double ymin = sv.positions.front()[1];
            for (std::size_t k = 0; k < sv.phi.size(); ++k)
                rows[static_cast<std::size_t>(std::lround(sv.positions[k][1] - ymin))] += sv.phi[k];
            if (m == 0) ref = rows;
            for (int i = 0; i < 3; ++i) rep.row_sum_spread = std::max(rep.row_sum_spread, std::abs(rows[i] - ref[i]));
        }
    } else {
        along = tilted_line_ratios(Y0, alpha, basis, rotation_deg);
    }
    rep.x0_spread = spread_of(along);
    rep.x0_invariant = rep.x0_spread < tol;

    std::vector<double> over_h;
    for (double h : {0.5, 1.0, 2.0}) {
        StraightLineSetup s = setup;
        s.h = h;
        s.markers_per_cell = 16;
        over_h.push_back(straight_line_ratios(Y0 * h, alpha, basis, s).front());
    }
    rep.h_spread = spread_of(over_h);
    rep.h_invariant = rep.h_spread < tol;
    return rep;
}

void write_ratio_profile_csv(const RatioProfile& profile, const std::string& path)
{
    std::ofstream out;
    open_csv(out, path, "y0,ratio");
    for (std::size_t i = 0; i < profile.y0.size(); ++i) out << profile.y0[i] << ',' << profile.ratio[i] << '\n';
}

void write_alpha_sweep_csv(const AlphaSweep& sweep, const std::string& path)
{
    std::ofstream out;
    open_csv(out, path, "alpha,delta");
    for (std::size_t i = 0; i < sweep.alpha.size(); ++i) out << sweep.alpha[i] << ',' << sweep.delta[i] << '\n';
}

void write_histogram_csv(const RatioHistogram& hist, const std::string& path)
{
    std::ofstream out;
    open_csv(out, path, "bin_center,count");
    for (std::size_t i = 0; i < hist.count.size(); ++i) out << hist.bin_center[i] << ',' << hist.count[i] << '\n';
}

}  // namespace mlsib::analysis
