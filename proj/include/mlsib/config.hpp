#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlsib/coupling.hpp"
#include "mlsib/grid.hpp"
#include "mlsib/mls.hpp"
#include "mlsib/solver.hpp"

namespace mlsib {

inline const std::vector<std::string>& case_ids()
{
    static const std::vector<std::string> ids{"straight-line-analysis", "taylor-green",     "cylinder-2d",
                                              "sphere-3d",              "oscillating-body", "immersed-channel"};
    return ids;
}

struct FaceConfig {
    std::string kind = "periodic";  // periodic | inflow | outflow | wall
    Vec3 velocity{0.0, 0.0, 0.0};
    bool operator==(const FaceConfig&) const = default;
};

// Immersed geometry. `shape` is sphere, cylinder, channel-walls, stl or none.
struct BodyConfig {
    std::string shape = "none";
    Vec3 center{0.0, 0.0, 0.0};
    double diameter = 1.0;
    int facets = 0;              // sphere frequency or polygon segments; 0 picks edge ~ marker_spacing * h
    double marker_spacing = 1.0; // target marker edge in units of h
    std::string stl_path;
    // channel-walls: walls at y = wall_y[0], wall_y[1], spanning x in wall_x.
    std::array<double, 2> wall_y{0.0, 0.0};
    std::array<double, 2> wall_x{0.0, 0.0};
    bool operator==(const BodyConfig&) const = default;
};

struct MotionConfig {
    Vec3 velocity{0.0, 0.0, 0.0};
    Vec3 amplitude{0.0, 0.0, 0.0};
    double omega = 0.0;
    bool operator==(const MotionConfig&) const = default;
};

struct CaseConfig {
    std::string case_id = "taylor-green";
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    GridConfig grid{};
    FluidParams fluid{};
    std::array<std::array<FaceConfig, 2>, 3> faces{};
    // Inflow restricted to y in this band when band[1] > band[0].
    std::array<double, 2> inflow_band{0.0, 0.0};

    BodyConfig body{};
    MotionConfig motion{};

    ForcingScheme scheme = ForcingScheme::corrected();
    double alpha = 2.0 / 3.0;
    Basis basis = Basis::Linear;
    ForcingTiming timing = ForcingTiming::PerSubstep;
    bool residual_diagnostics = true;

    double t_end = 1.0;
    int max_steps = 0;         // 0 = unlimited
    int report_every = 1;
    double average_from = 0.0; // start of the averaging window for steady quantities
    bool write_checkpoint = true;

    double u_ref = 1.0;
    double d_ref = 1.0;

    // straight-line-analysis
    int y0_steps = 41;
    int markers_per_cell = 32;
    std::array<double, 2> alpha_range{0.3, 1.2};
    int alpha_steps = 19;

    bool operator==(const CaseConfig& o) const;

    // Throws ConfigError when a value is out of range or a file is missing.
    void validate() const;
    BoundarySpec boundary_spec() const;
};

CaseConfig parse_config(const std::string& toml_text);
CaseConfig load_config(const std::string& path);
std::string serialize_config(const CaseConfig& cfg);

// Reference configuration for a case id, the same values the shipped
// configs/ files carry.
CaseConfig default_config(const std::string& case_id);

}  // namespace mlsib
