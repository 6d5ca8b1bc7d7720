#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlsib/grid.hpp"
#include "mlsib/mls.hpp"
#include "mlsib/surface.hpp"

namespace mlsib {

// Little-endian binary layout:
//   char[8]  magic "MLSIBCK" + NUL
//   u32      version (1)
//   i32      dim, cells[3]
//   f64      spacing[3], origin[3]
//   u8       periodic[3], padding
//   f64      support_ratio, time
//   i64      step
//   u32      field count, then per field:
//              u8 name length, name bytes, i32 extent[3], i32 ghost[3],
//              u64 value count, f64 values (ghosts included, x fastest)
//   u64      marker count, then if non-zero:
//              f64 alpha, u8 basis (0 constant, 1 linear), i32 marker dim,
//              per marker 13 f64: X[3], area, normal[3], volume, F[3]
// Fields are written in the order u, v, [w], p.
struct Checkpoint {
    GridConfig grid{};
    FlowState state;
    std::int64_t step = 0;
    MarkerSet markers;
    std::vector<Vec3> force;  // desired force F of the last forcing pass
    double alpha = 2.0 / 3.0;
    Basis basis = Basis::Linear;
};

void write_checkpoint(const std::string& path, const Checkpoint& cp);
// Throws ParseError (with byte offset) on bad magic, version or truncation.
Checkpoint read_checkpoint(const std::string& path);

}  // namespace mlsib
