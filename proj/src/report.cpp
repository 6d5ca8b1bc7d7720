#include "mlsib/report.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace mlsib {

ForceCoefficients force_coefficients(const Vec3& body_force, double u_ref, double d_ref, int dim, int drag_axis,
                                     double drag_sign)
{
    if (drag_axis < 0 || drag_axis >= dim) throw ConfigError("drag axis outside the grid dimension");
    if (!(std::abs(u_ref) > 0.0)) throw ConfigError("reference velocity must be non-zero");
    if (!(d_ref > 0.0)) throw ConfigError("reference length must be positive");
    const double area = dim == 3 ? std::numbers::pi * d_ref * d_ref / 4.0 : d_ref;
    const double q = 0.5 * u_ref * u_ref * area;
    ForceCoefficients fc;
    fc.c = (1.0 / q) * body_force;
    fc.cd = drag_sign * fc.c[drag_axis];
    fc.cl = fc.c[(drag_axis + 1) % dim];
    return fc;
}

ForceCoefficients force_coefficients(const std::vector<Vec3>& marker_force, const std::vector<double>& volume,
                                     double u_ref, double d_ref, int dim)
{
    if (marker_force.size() != volume.size()) throw ConfigError("force and volume arrays differ in length");
    Vec3 total{0.0, 0.0, 0.0};
    for (std::size_t l = 0; l < marker_force.size(); ++l) total = total - volume[l] * marker_force[l];
    return force_coefficients(total, u_ref, d_ref, dim);
}

ResidualNorms residual_norms(const MarkerSet& markers, const std::vector<Vec3>& residual, double u_ref)
{
    ResidualNorms r;
    if (residual.empty()) return r;
    if (residual.size() != markers.size()) throw ConfigError("residual and marker counts differ");
    for (std::size_t l = 0; l < residual.size(); ++l) {
        const Vec3& v = residual[l];
        const Vec3& n = markers.normal[l];
        const double vn = dot(v, n);
        r.l1 += norm(v);
        r.un += std::abs(vn);
        r.ut += norm(v - vn * n);
    }
    const double s = 1.0 / (static_cast<double>(residual.size()) * u_ref);
    r.l1 *= s;
    r.un *= s;
    r.ut *= s;
    return r;
}

std::optional<double> strouhal(const std::vector<double>& signal, double dt, double d_ref, double u_ref,
                               double transient)
{
    if (!(dt > 0.0)) throw ConfigError("sampling interval must be positive");
    const std::size_t start = static_cast<std::size_t>(std::floor(transient * static_cast<double>(signal.size())));
    if (signal.size() < start + 4) return std::nullopt;
    double mean = 0.0, lo = signal[start], hi = signal[start];
    for (std::size_t i = start; i < signal.size(); ++i) {
        mean += signal[i];
        lo = std::min(lo, signal[i]);
        hi = std::max(hi, signal[i]);
    }
    mean /= static_cast<double>(signal.size() - start);
    if (!(hi - lo > 1e-8 * std::max(1.0, std::abs(mean)))) return std::nullopt;

    std::vector<double> crossings;
    for (std::size_t i = start + 1; i < signal.size(); ++i) {
        const double a = signal[i - 1] - mean;
        const double b = signal[i] - mean;
        if (a < 0.0 && b >= 0.0) crossings.push_back((static_cast<double>(i - 1) + a / (a - b)) * dt);
    }
    if (crossings.size() < 6) return std::nullopt;
    const double period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    return d_ref / (period * u_ref);
}

bool RunReport::all_finite() const
{
    for (const auto& s : steps) {
        const double v[] = {s.time, s.dt, s.cd, s.cl, s.residual.l1, s.residual.un, s.residual.ut,
                            s.Z[0], s.Z[1], s.Z[2], s.mass_imbalance, s.max_divergence, s.kinetic_energy};
        for (double x : v)
            if (!std::isfinite(x)) return false;
    }
    return std::isfinite(mean_cd) && std::isfinite(mean_cl);
}

void write_report_csv(const RunReport& report, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(10);
    out << "# schema=1\n"
        << "step,time,dt,cd,cl,fx,fy,fz,res_l1,res_un,res_ut,leakage,z_x,z_y,z_z,seconds,forcing_seconds,"
           "mass_imbalance,max_divergence,kinetic_energy\n";
    for (const auto& s : report.steps) {
        out << s.step << ',' << s.time << ',' << s.dt << ',' << s.cd << ',' << s.cl << ',' << s.body_force[0] << ','
            << s.body_force[1] << ',' << s.body_force[2] << ',' << s.residual.l1 << ',' << s.residual.un << ','
            << s.residual.ut << ',' << s.leakage << ',' << s.Z[0] << ',' << s.Z[1] << ',' << s.Z[2] << ',' << s.seconds << ','
            << s.forcing_seconds << ',' << s.mass_imbalance << ',' << s.max_divergence << ',' << s.kinetic_energy
            << '\n';
    }
}

void write_summary_csv(const RunReport& r, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(10);
    out << "# schema=1\nkey,value\n";
    out << "case," << r.case_id << '\n';
    out << "scheme," << r.scheme << '\n';
    out << "completed," << (r.completed ? 1 : 0) << '\n';
    if (!r.abort_reason.empty()) out << "abort_reason,\"" << r.abort_reason << "\"\n";
    out << "steps," << r.steps.size() << '\n';
    out << "mean_cd," << r.mean_cd << '\n';
    out << "mean_cl," << r.mean_cl << '\n';
    out << "max_cd," << r.max_cd << '\n';
    out << "strouhal," << (r.strouhal ? std::to_string(*r.strouhal) : std::string("absent")) << '\n';
    out << "mean_res_l1," << r.mean_residual.l1 << '\n';
    out << "mean_res_un," << r.mean_residual.un << '\n';
    out << "mean_res_ut," << r.mean_residual.ut << '\n';
    out << "final_res_l1," << r.final_residual.l1 << '\n';
    out << "mean_leakage," << r.leakage << '\n';
    out << "max_divergence," << r.max_divergence << '\n';
    out << "mean_step_seconds," << r.mean_step_seconds << '\n';
    out << "markers," << r.markers << '\n';
    out << "fallback_count," << r.fallback_count << '\n';
    out << "z_degenerate," << r.Z_degenerate << '\n';
    out << "warnings," << r.warnings << '\n';
}

}  // namespace mlsib
