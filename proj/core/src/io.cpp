#include "infill/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace infill::io {
namespace {

void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string num(double v) { return fmt("%.10g", v); }

// Skips whitespace and '#' comments in a PGM header.
int next_header_int(std::istream& in, const std::string& path) {
    while (true) {
        const int c = in.peek();
        if (c == EOF) fail(path, "truncated header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) fail(path, "malformed header");
    return value;
}

}  // namespace

void write_density_pgm(const Grid& grid, std::span<const double> rho, const std::string& path) {
    if (rho.size() != static_cast<std::size_t>(grid.num_elements())) {
        throw std::invalid_argument("density field size mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << grid.nx << " " << grid.ny << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(grid.nx));
    for (int j = grid.ny - 1; j >= 0; --j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double v = rho[static_cast<std::size_t>(grid.elem_index(i, j))];
            const double pixel = std::floor(255.0 * (1.0 - v) + 0.5);
            row[static_cast<std::size_t>(i)] =
                static_cast<unsigned char>(pixel < 0.0 ? 0.0 : (pixel > 255.0 ? 255.0 : pixel));
        }
        out.write(reinterpret_cast<const char*>(row.data()), grid.nx);
    }
    if (!out) fail(path, "write failed");
}

std::pair<Grid, std::vector<double>> read_density_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') fail(path, "not a binary PGM (P5)");
    const int nx = next_header_int(in, path);
    const int ny = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (maxval != 255) fail(path, "expected 8-bit graymap (maxval 255)");
    in.get();  // single whitespace after maxval
    Grid grid = build_grid(nx, ny);
    std::vector<double> rho(static_cast<std::size_t>(grid.num_elements()), 0.0);
    std::vector<unsigned char> row(static_cast<std::size_t>(nx));
    for (int j = ny - 1; j >= 0; --j) {
        in.read(reinterpret_cast<char*>(row.data()), nx);
        if (!in) fail(path, "truncated pixel data");
        for (int i = 0; i < nx; ++i) {
            rho[static_cast<std::size_t>(grid.elem_index(i, j))] =
                1.0 - static_cast<double>(row[static_cast<std::size_t>(i)]) / 255.0;
        }
    }
    return {grid, std::move(rho)};
}

void write_density_f64(const Grid& grid, std::span<const double> rho, const std::string& path) {
    if (rho.size() != static_cast<std::size_t>(grid.num_elements())) {
        throw std::invalid_argument("density field size mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write("INFILL64", 8);
    const std::uint32_t dims[2] = {static_cast<std::uint32_t>(grid.nx),
                                   static_cast<std::uint32_t>(grid.ny)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(rho.data()),
              static_cast<std::streamsize>(rho.size() * sizeof(double)));
    if (!out) fail(path, "write failed");
}

std::pair<Grid, std::vector<double>> read_density_f64(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "INFILL64", 8) != 0) fail(path, "not an INFILL64 dump");
    std::uint32_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) fail(path, "truncated header");
    Grid grid = build_grid(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    std::vector<double> rho(static_cast<std::size_t>(grid.num_elements()));
    in.read(reinterpret_cast<char*>(rho.data()),
            static_cast<std::streamsize>(rho.size() * sizeof(double)));
    if (!in) fail(path, "truncated field data");
    return {grid, std::move(rho)};
}

std::pair<Grid, std::vector<double>> read_density_any(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".f64") == 0) {
        return read_density_f64(path);
    }
    return read_density_pgm(path);
}

void write_density_meta(const DensityMeta& meta, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "nx = " << meta.nx << "\n"
        << "ny = " << meta.ny << "\n"
        << "alpha = " << num(meta.alpha) << "\n"
        << "iterations = " << meta.iterations << "\n";
}

std::optional<DensityMeta> read_density_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    DensityMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        if (!(ls >> key >> eq) || eq != "=") continue;
        if (key == "nx") ls >> meta.nx;
        else if (key == "ny") ls >> meta.ny;
        else if (key == "alpha") ls >> meta.alpha;
        else if (key == "iterations") ls >> meta.iterations;
    }
    return meta;
}

void write_fields_vtk(const Grid& grid, std::span<const NamedField> fields,
                      const std::string& path) {
    const std::size_t n = static_cast<std::size_t>(grid.num_elements());
    for (const NamedField& f : fields) {
        if (f.values.size() != n) {
            throw std::invalid_argument("field '" + f.name + "' does not match the grid");
        }
    }
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "# vtk DataFile Version 3.0\n"
        << "porous infill fields\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << grid.nx + 1 << " " << grid.ny + 1 << " 1\n"
        << "ORIGIN 0 0 0\n"
        << "SPACING 1 1 1\n"
        << "CELL_DATA " << grid.num_elements() << "\n";
    for (const NamedField& f : fields) {
        out << "SCALARS " << f.name << " double 1\n"
            << "LOOKUP_TABLE default\n";
        // VTK cell order: x fastest, then y.
        for (int j = 0; j < grid.ny; ++j) {
            for (int i = 0; i < grid.nx; ++i) {
                out << num(f.values[static_cast<std::size_t>(grid.elem_index(i, j))]) << "\n";
            }
        }
    }
    if (!out) fail(path, "write failed");
}

void write_trace_csv(std::span<const TraceRecord> trace, const std::string& path) {
    if (trace.empty()) throw std::invalid_argument("refusing to write an empty trace");
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    const bool has_local = trace.front().g_local.has_value();
    const bool has_local_y = trace.front().g_local_y.has_value();
    const bool has_total = trace.front().g_total.has_value();
    out << "iter,compliance";
    if (has_local) out << ",g_local";
    if (has_local_y) out << ",g_local_y";
    if (has_total) out << ",g_total";
    out << ",sharpness,beta,delta,fem_iters,seconds\n";
    for (const TraceRecord& r : trace) {
        out << r.iteration << "," << num(r.compliance);
        if (has_local) out << "," << num(r.g_local.value_or(0.0));
        if (has_local_y) out << "," << num(r.g_local_y.value_or(0.0));
        if (has_total) out << "," << num(r.g_total.value_or(0.0));
        out << "," << num(r.sharpness) << "," << num(r.beta) << "," << num(r.delta) << ","
            << r.fem_iterations << "," << fmt("%.3f", r.seconds) << "\n";
    }
    if (!out) fail(path, "write failed");
}

void write_damage_csv(std::span<const DamageCase> cases, const SweepSummary& summary,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "case,anchor_i,anchor_j,size,compliance_before,compliance_after,ratio,converged,"
           "residual\n";
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const DamageCase& c = cases[i];
        out << i << "," << c.spec.anchor_i << "," << c.spec.anchor_j << "," << c.spec.size << ","
            << num(c.compliance_before) << "," << num(c.compliance_after) << "," << num(c.ratio)
            << "," << (c.after_info.converged ? 1 : 0) << "," << num(c.after_info.rel_residual)
            << "\n";
    }
    out << "# worst_ratio = " << num(summary.worst_value) << " at case " << summary.worst_index
        << ", mean = " << num(summary.mean) << ", variance = " << num(summary.variance) << "\n";
    if (!out) fail(path, "write failed");
}

void write_rotation_csv(std::span<const RotationCase> cases, const SweepSummary& summary,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << "angle_deg,angle_rad,compliance,ratio,converged,residual\n";
    for (const RotationCase& c : cases) {
        out << num(c.angle * 180.0 / 3.14159265358979323846) << "," << num(c.angle) << ","
            << num(c.compliance) << "," << num(c.ratio) << "," << (c.info.converged ? 1 : 0) << ","
            << num(c.info.rel_residual) << "\n";
    }
    out << "# worst_compliance = " << num(summary.worst_value) << " at case "
        << summary.worst_index << ", mean = " << num(summary.mean) << ", variance = "
        << num(summary.variance) << "\n";
    if (!out) fail(path, "write failed");
}

}  // namespace infill::io
