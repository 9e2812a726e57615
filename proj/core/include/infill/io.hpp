#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infill/analysis.hpp"
#include "infill/grid.hpp"
#include "infill/optimizer.hpp"

namespace infill::io {

/// 8-bit binary portable graymap (P5), solid rendered black:
/// pixel = round(255 (1 - rho)), rows written top row first.
void write_density_pgm(const Grid& grid, std::span<const double> rho, const std::string& path);

/// Inverse of write_density_pgm at 8-bit quantization.
std::pair<Grid, std::vector<double>> read_density_pgm(const std::string& path);

/// Raw float64 dump for exact round-trips: "INFILL64" magic, u32 nx, u32 ny
/// (little endian), then nx*ny doubles in element-index order.
void write_density_f64(const Grid& grid, std::span<const double> rho, const std::string& path);
std::pair<Grid, std::vector<double>> read_density_f64(const std::string& path);

/// Dispatch on extension: .f64 exact, .pgm quantized.
std::pair<Grid, std::vector<double>> read_density_any(const std::string& path);

/// Sidecar metadata next to a density file.
struct DensityMeta {
    int nx = 0;
    int ny = 0;
    double alpha = 0.0;
    int iterations = 0;
};
void write_density_meta(const DensityMeta& meta, const std::string& path);
std::optional<DensityMeta> read_density_meta(const std::string& path);

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// Legacy ASCII VTK structured-points dataset carrying the fields as
/// CELL_DATA scalar arrays (10 significant digits).
void write_fields_vtk(const Grid& grid, std::span<const NamedField> fields,
                      const std::string& path);

/// Convergence log, one row per iteration:
/// iter,compliance[,g_local][,g_local_y][,g_total],sharpness,beta,delta,fem_iters,seconds.
/// Optional columns appear when the first record carries them.
void write_trace_csv(std::span<const TraceRecord> trace, const std::string& path);

void write_damage_csv(std::span<const DamageCase> cases, const SweepSummary& summary,
                      const std::string& path);
void write_rotation_csv(std::span<const RotationCase> cases, const SweepSummary& summary,
                        const std::string& path);

}  // namespace infill::io
