#pragma once

#include <string>
#include <vector>

#include "infill/optimizer.hpp"

namespace infill {

/// Problem block of a run configuration. Boundary conditions are kept as the
/// selector strings from the file and resolved against the grid when the
/// problem is built.
struct ProblemConfig {
    int nx = 0;
    int ny = 0;
    std::string domain_mask;  // empty = full rectangle; else path to a PGM mask
    std::vector<std::string> fixed;
    std::vector<std::string> loads;
    double passive_shell = 0.0;
    double E0 = 1.0;
    double Emin = 1e-9;
    double nu = 0.3;
    double gamma = 3.0;

    bool operator==(const ProblemConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    int snapshot_every = 0;
    std::vector<std::string> formats = {"csv", "f64", "pgm", "vtk"};  // kept sorted

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    ProblemConfig problem;
    OptimizationConfig optimize;
    OutputConfig output;

    bool operator==(const RunConfig&) const = default;
};

/// Parses the key-value configuration grammar (see the README). All defaults
/// are resolved; unknown sections or keys are hard errors carrying the line
/// number and a nearest-key suggestion.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Renders a fully resolved config; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);

/// Resolves grid, domain mask, passive shell, boundary conditions and
/// material. Selector errors mention the offending selector.
Problem build_problem(const RunConfig& config);

/// Anchor/selector resolution, exposed for the CLI and tests.
/// fixed:  left-edge|right-edge|top-edge|bottom-edge:[x|y|xy]  or  node:i,j:[x|y|xy]
/// load:   <anchor>:<axis>:<magnitude> with anchor one of node:i,j,
///         left-mid|right-mid|top-mid|bottom-mid, or the four corners
///         bottom-left|bottom-right|top-left|top-right.
void apply_fixed_selector(const Grid& grid, const std::string& selector, BoundaryConditions& bcs);
void apply_load_selector(const Grid& grid, const std::string& selector, BoundaryConditions& bcs);

}  // namespace infill
