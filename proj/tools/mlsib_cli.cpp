#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "mlsib/analysis.hpp"
#include "mlsib/cases.hpp"
#include "mlsib/checkpoint.hpp"
#include "mlsib/config.hpp"
#include "mlsib/studies.hpp"

using namespace mlsib;

namespace {

std::vector<ForcingScheme> parse_schemes(const std::vector<std::string>& names)
{
    std::vector<ForcingScheme> out;
    for (const auto& n : names) out.push_back(parse_scheme(n));
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MLS immersed-boundary solver and analysis tools"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run a case from a TOML config");
    run->add_option("config", config_path, "Case config")->required();
    run->add_option("-o,--output", out_dir, "Override the output directory");
    run->add_flag("-q,--quiet", quiet, "No progress output");

    double alpha = 2.0 / 3.0;
    std::string basis = "linear";
    int y0_steps = 41;
    int markers = 32;
    auto* ratio = app.add_subcommand("analyze-ratio", "F/F* over a one-cell sweep of the straight boundary");
    ratio->add_option("--alpha", alpha, "Weight parameter")->check(CLI::Range(1e-6, 2.0));
    ratio->add_option("--basis", basis, "constant or linear");
    ratio->add_option("--y0-steps", y0_steps, "Samples of Y0 over one cell")->check(CLI::Range(2, 100000));
    ratio->add_option("--markers-per-cell", markers, "Marker density")->check(CLI::Range(1, 100000));
    ratio->add_option("-o,--output", out_dir, "Output directory");

    double amin = 0.3, amax = 1.2;
    int asteps = 19;
    auto* sweep = app.add_subcommand("sweep-alpha", "Delta(F/F*) against alpha");
    sweep->add_option("--min", amin, "Smallest alpha");
    sweep->add_option("--max", amax, "Largest alpha");
    sweep->add_option("--steps", asteps, "Number of alpha samples")->check(CLI::Range(1, 100000));
    sweep->add_option("--basis", basis, "constant or linear");
    sweep->add_option("--y0-steps", y0_steps, "Samples of Y0 over one cell")->check(CLI::Range(2, 100000));
    sweep->add_option("-o,--output", out_dir, "Output directory");

    std::string checkpoint_path;
    analysis::HistogramOptions hopts;
    auto* hist = app.add_subcommand("histogram", "F/F* histogram from a checkpoint");
    hist->add_option("checkpoint", checkpoint_path, "Checkpoint written by run")->required();
    hist->add_option("--bins", hopts.bins, "Bin count")->check(CLI::Range(1, 100000));
    hist->add_option("--lo", hopts.lo, "Lower edge");
    hist->add_option("--hi", hopts.hi, "Upper edge");
    hist->add_option("-o,--output", out_dir, "Output directory");

    std::vector<double> grids;
    std::vector<std::string> schemes{"baseline", "corrected"};
    auto* conv = app.add_subcommand("convergence", "Residual against grid spacing");
    conv->add_option("config", config_path, "Case config")->required();
    conv->add_option("--grids", grids, "Grid spacings")->required();
    conv->add_option("--schemes", schemes, "Forcing schemes");
    conv->add_option("-o,--output", out_dir, "Output directory");

    BenchOptions bopts;
    std::vector<std::string> bench_schemes{"baseline", "corrected", "hybrid(2)", "iterative(10)"};
    auto* bench = app.add_subcommand("bench", "Relative wall-clock per step of forcing schemes");
    bench->add_option("config", config_path, "Case config")->required();
    bench->add_option("--schemes", bench_schemes, "Forcing schemes");
    bench->add_option("--warmup", bopts.warmup_steps, "Steps before timing");
    bench->add_option("--steps", bopts.measure_steps, "Timed steps per repeat");
    bench->add_option("--repeats", bopts.repeats, "Interleaved repeats");
    bench->add_option("-o,--output", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto dir = [&](const std::string& fallback) {
        const std::string d = out_dir.empty() ? fallback : out_dir;
        std::filesystem::create_directories(d);
        return d;
    };

    try {
        if (*run) {
            CaseConfig cfg = load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            RunOptions opts;
            opts.log = quiet ? nullptr : &std::cout;
            const RunReport r = run_case(cfg, opts);
            std::cout << "case " << r.case_id << " (" << r.scheme << "): " << r.steps.size() << " steps";
            if (r.markers > 0)
                std::cout << ", mean C_D " << r.mean_cd << ", mean L1 residual " << r.mean_residual.l1
                          << ", St " << (r.strouhal ? std::to_string(*r.strouhal) : std::string("absent"));
            std::cout << "\noutputs in " << cfg.output_dir << '\n';
        } else if (*ratio) {
            const auto p = analysis::ratio_profile(alpha, basis_from_string(basis), y0_steps, markers);
            const std::string d = dir("out/ratio");
            analysis::write_ratio_profile_csv(p, d + "/ratio_profile.csv");
            std::cout << "delta(F/F*) = " << p.delta() << " at alpha = " << alpha << " (" << basis << ")\n";
        } else if (*sweep) {
            const auto s = analysis::delta_ratio_sweep(amin, amax, asteps, basis_from_string(basis), y0_steps);
            const std::string d = dir("out/sweep");
            analysis::write_alpha_sweep_csv(s, d + "/alpha_sweep.csv");
            std::cout << "alpha minimising delta(F/F*): " << s.argmin() << '\n';
        } else if (*hist) {
            const Checkpoint cp = read_checkpoint(checkpoint_path);
            const auto h = histogram_from_checkpoint(cp, hopts);
            const std::string d = dir(std::filesystem::path(checkpoint_path).parent_path().string());
            analysis::write_histogram_csv(h, d + "/histogram.csv");
            std::cout << "peak " << h.peak << ", " << 100.0 * h.fraction_in_window << "% within +-15%, "
                      << (h.single_peaked ? "single-peaked" : "multi-peaked") << ", " << h.excluded
                      << " markers excluded\n";
        } else if (*conv) {
            const CaseConfig cfg = load_config(config_path);
            const auto t = convergence_study(cfg, grids, parse_schemes(schemes), &std::cout);
            const std::string d = dir(cfg.output_dir);
            write_convergence_csv(t, d + "/convergence.csv");
            for (std::size_t i = 0; i < t.schemes.size(); ++i)
                std::cout << "slope " << t.schemes[i] << ": " << t.slopes[i] << '\n';
        } else if (*bench) {
            const CaseConfig cfg = load_config(config_path);
            const auto rows = scheme_benchmark(cfg, parse_schemes(bench_schemes), bopts, &std::cout);
            const std::string d = dir(cfg.output_dir);
            write_bench_csv(rows, d + "/bench.csv");
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
