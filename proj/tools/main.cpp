#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "infill/analysis.hpp"
#include "infill/config.hpp"
#include "infill/io.hpp"
#include "infill/optimizer.hpp"

namespace fs = std::filesystem;
using namespace infill;

namespace {

struct CommonArgs {
    std::string out_dir;
    int threads = 1;
    bool quiet = false;
};

void setup_threads(int threads) {
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, threads));
#else
    (void)threads;
#endif
}

bool wants(const OutputConfig& out, const std::string& format) {
    return std::find(out.formats.begin(), out.formats.end(), format) != out.formats.end();
}

std::string resolved_out_dir(const RunConfig& cfg, const CommonArgs& common) {
    return common.out_dir.empty() ? cfg.output.directory : common.out_dir;
}

void write_density_outputs(const RunConfig& cfg, const Grid& grid,
                           const std::vector<double>& rho, const std::string& dir,
                           const std::string& stem, double alpha, int iterations) {
    if (wants(cfg.output, "pgm")) {
        const std::string img = dir + "/" + stem + ".pgm";
        io::write_density_pgm(grid, rho, img);
        io::write_density_meta({grid.nx, grid.ny, alpha, iterations}, img + ".meta");
    }
    if (wants(cfg.output, "f64")) {
        io::write_density_f64(grid, rho, dir + "/" + stem + ".f64");
    }
}

int run_optimize(const std::string& config_path, const CommonArgs& common, int snapshot_every) {
    RunConfig cfg = parse_config_file(config_path);
    if (snapshot_every >= 0) cfg.output.snapshot_every = snapshot_every;
    const std::string dir = resolved_out_dir(cfg, common);
    fs::create_directories(dir);

    Problem problem = build_problem(cfg);
    InfillOptimizer optimizer(problem, cfg.optimize);

    const bool quiet = common.quiet;
    const int snap = cfg.output.snapshot_every;
    const bool snap_pgm = wants(cfg.output, "pgm");
    auto callback = [&](const TraceRecord& rec, std::span<const double> rho) {
        if (!quiet) {
            std::printf("iter %4d  c = %-12.6g", rec.iteration, rec.compliance);
            if (rec.g_local) std::printf("  g = %-10.4g", *rec.g_local);
            if (rec.g_local_y) std::printf("  g_y = %-10.4g", *rec.g_local_y);
            if (rec.g_total) std::printf("  g1 = %-10.4g", *rec.g_total);
            std::printf("  s = %-8.4g  beta = %-4g  delta = %-8.4g  cg = %d\n", rec.sharpness,
                        rec.beta, rec.delta, rec.fem_iterations);
            std::fflush(stdout);
        }
        if (snap > 0 && snap_pgm && rec.iteration % snap == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "/snapshot_%06d.pgm", rec.iteration);
            io::write_density_pgm(problem.grid, rho, dir + name);
        }
    };

    RunResult result = optimizer.run(callback);
    if (!result.wall_advisory.empty() && !quiet) {
        std::cerr << "advisory: " << result.wall_advisory << "\n";
    }

    if (wants(cfg.output, "csv") && !result.trace.empty()) {
        io::write_trace_csv(result.trace, dir + "/trace.csv");
    }
    const double alpha = cfg.optimize.local_constraint ? cfg.optimize.alpha
                                                       : cfg.optimize.alpha_total.value_or(0.0);
    write_density_outputs(cfg, problem.grid, result.rho, dir, "density", alpha, result.iterations);

    if (wants(cfg.output, "vtk")) {
        const Matrix8 k0 = element_stiffness(problem.material.nu);
        const auto active = active_mask(problem.grid, problem.domain, problem.passive);
        std::vector<double> dc = compliance_sensitivity(problem.grid, k0, problem.material,
                                                        result.rho, result.displacement, active);
        StressField stress = element_stress(problem.grid, result.displacement, result.rho,
                                            problem.material);
        const io::NamedField fields[] = {
            {"rho", result.rho},          {"rho_bar", result.rho_bar},
            {"dc_drho", dc},              {"von_mises", stress.von_mises},
            {"principal_1", stress.principal_1}, {"principal_2", stress.principal_2},
            {"principal_angle", stress.angle},
        };
        io::write_fields_vtk(problem.grid, fields, dir + "/fields.vtk");
    }

    const char* status = "iteration limit";
    switch (result.status) {
        case RunStatus::Converged: status = "converged"; break;
        case RunStatus::IterationLimit: status = "iteration limit"; break;
        case RunStatus::SolverFailure: status = "FEM solver failure"; break;
        case RunStatus::NumericFailure: status = "numeric failure"; break;
    }
    if (!quiet) {
        const double c = result.trace.empty() ? 0.0 : result.trace.back().compliance;
        std::printf("%s after %d iterations, compliance %.6g, outputs in %s\n", status,
                    result.iterations, c, dir.c_str());
    }
    return (result.status == RunStatus::SolverFailure || result.status == RunStatus::NumericFailure)
               ? 2
               : 0;
}

std::vector<double> load_density_checked(const std::string& path, const Grid& grid) {
    auto [file_grid, rho] = io::read_density_any(path);
    if (file_grid.nx != grid.nx || file_grid.ny != grid.ny) {
        throw std::runtime_error(path + ": density is " + std::to_string(file_grid.nx) + "x" +
                                 std::to_string(file_grid.ny) + " but the config grid is " +
                                 std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
    }
    return std::move(rho);
}

int run_damage(const std::string& config_path, const std::string& density_path,
               const CommonArgs& common, int size, const std::string& anchor, int sweep_step) {
    RunConfig cfg = parse_config_file(config_path);
    const std::string dir = resolved_out_dir(cfg, common);
    fs::create_directories(dir);
    Problem problem = build_problem(cfg);
    std::vector<double> rho = load_density_checked(density_path, problem.grid);

    if (size <= 0) size = static_cast<int>(std::lround(2.0 * cfg.optimize.influence_radius));
    size = std::clamp(size, 1, std::min(problem.grid.nx, problem.grid.ny));

    Analyzer analyzer(problem, rho, cfg.optimize.solver_tolerance,
                      cfg.optimize.solver_max_iterations);
    std::vector<DamageCase> cases;
    if (!anchor.empty()) {
        const auto comma = anchor.find(',');
        if (comma == std::string::npos) throw std::runtime_error("--anchor expects i,j");
        DamageSpec spec{std::stoi(anchor.substr(0, comma)), std::stoi(anchor.substr(comma + 1)),
                        size};
        cases.push_back(analyzer.damage(spec));
    } else {
        const int ai = (problem.grid.nx - size) / 2;
        const int step = sweep_step > 0 ? sweep_step : size;
        for (int j = problem.grid.ny - size; j >= 0; j -= step) {
            cases.push_back(analyzer.damage({ai, j, size}));
            if (!common.quiet) {
                const DamageCase& c = cases.back();
                std::printf("damage (%d,%d) size %d: c %.6g -> %.6g (x%.3g)%s\n", c.spec.anchor_i,
                            c.spec.anchor_j, c.spec.size, c.compliance_before, c.compliance_after,
                            c.ratio, c.after_info.converged ? "" : " [solver not converged]");
            }
        }
    }
    const SweepSummary summary = summarize_ratios(cases);
    io::write_damage_csv(cases, summary, dir + "/damage.csv");
    if (!common.quiet) {
        std::printf("baseline compliance %.6g; worst ratio %.4g (case %d); report: %s/damage.csv\n",
                    analyzer.baseline_compliance(), summary.worst_value, summary.worst_index,
                    dir.c_str());
    }
    return 0;
}

int run_rotate(const std::string& config_path, const std::string& density_path,
               const CommonArgs& common, double start_deg, double stop_deg, double step_deg) {
    RunConfig cfg = parse_config_file(config_path);
    const std::string dir = resolved_out_dir(cfg, common);
    fs::create_directories(dir);
    Problem problem = build_problem(cfg);
    std::vector<double> rho = load_density_checked(density_path, problem.grid);

    if (step_deg <= 0.0) throw std::runtime_error("--step must be positive");
    std::vector<double> angles;
    for (double a = start_deg; a <= stop_deg + 1e-9; a += step_deg) {
        angles.push_back(a * 3.14159265358979323846 / 180.0);
    }
    auto cases = force_rotation_sweep(problem, rho, angles, cfg.optimize.solver_tolerance,
                                      cfg.optimize.solver_max_iterations);
    const SweepSummary summary = summarize_compliance(cases);
    io::write_rotation_csv(cases, summary, dir + "/rotation.csv");
    if (!common.quiet) {
        for (const RotationCase& c : cases) {
            std::printf("angle %7.2f deg: c = %.6g (x%.4g)%s\n", c.angle * 180.0 / 3.14159265358979,
                        c.compliance, c.ratio, c.info.converged ? "" : " [solver not converged]");
        }
        std::printf("report: %s/rotation.csv\n", dir.c_str());
    }
    return 0;
}

int run_reference_grid(const std::string& config_path, const CommonArgs& common, double volume,
                       int pitch) {
    RunConfig cfg = parse_config_file(config_path);
    const std::string dir = resolved_out_dir(cfg, common);
    fs::create_directories(dir);
    Problem problem = build_problem(cfg);
    if (pitch <= 0) pitch = std::max(2, static_cast<int>(std::lround(cfg.optimize.influence_radius)));
    std::vector<double> rho = make_regular_grid_infill(problem, volume, pitch);

    double realized = 0.0;
    long long n_domain = 0;
    for (std::size_t e = 0; e < rho.size(); ++e) {
        if (problem.domain.inside[e]) {
            realized += rho[e];
            ++n_domain;
        }
    }
    realized /= static_cast<double>(n_domain);

    write_density_outputs(cfg, problem.grid, rho, dir, "reference", volume, 0);
    if (!common.quiet) {
        std::printf("reference lattice: pitch %d, target volume %.4g, realized %.4g -> %s\n", pitch,
                    volume, realized, dir.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compliance-optimized porous infill on regular 2D grids"};
    app.require_subcommand(1);
    app.fallthrough();  // --threads/--quiet may follow the subcommand

    CommonArgs common;
    app.add_option("--threads", common.threads, "Worker threads for element loops")
        ->capture_default_str();
    app.add_flag("--quiet", common.quiet, "Suppress progress output");

    std::string config_path, density_path, anchor;
    int snapshot_every = -1, size = 0, sweep_step = 0, pitch = 0;
    double start_deg = -90.0, stop_deg = 90.0, step_deg = 5.0, volume = 0.0;

    CLI::App* optimize = app.add_subcommand("optimize", "Run the infill optimization");
    optimize->fallthrough();
    optimize->add_option("config", config_path, "Run configuration file")->required();
    optimize->add_option("--out", common.out_dir, "Output directory (overrides config)");
    optimize->add_option("--snapshot-every", snapshot_every,
                         "Write a density snapshot every k iterations");

    CLI::App* analyze = app.add_subcommand("analyze", "Re-analyze a converged design");
    analyze->require_subcommand(1);
    analyze->fallthrough();
    CLI::App* damage = analyze->add_subcommand("damage", "Damage-tolerance sweep");
    damage->fallthrough();
    damage->add_option("config", config_path, "Run configuration file")->required();
    damage->add_option("density", density_path, "Density field (.f64 exact or .pgm)")->required();
    damage->add_option("--size", size, "Damage square side in voxels (default 2R)");
    damage->add_option("--anchor", anchor, "Single damage case at anchor i,j");
    damage->add_option("--sweep-step", sweep_step, "Vertical sweep step (default: size)");
    damage->add_option("--out", common.out_dir, "Output directory (overrides config)");

    CLI::App* rotate = analyze->add_subcommand("rotate", "Force-rotation robustness sweep");
    rotate->fallthrough();
    rotate->add_option("config", config_path, "Run configuration file")->required();
    rotate->add_option("density", density_path, "Density field (.f64 exact or .pgm)")->required();
    rotate->add_option("--start", start_deg, "Sweep start angle, degrees")->capture_default_str();
    rotate->add_option("--stop", stop_deg, "Sweep stop angle, degrees")->capture_default_str();
    rotate->add_option("--step", step_deg, "Sweep step, degrees")->capture_default_str();
    rotate->add_option("--out", common.out_dir, "Output directory (overrides config)");

    CLI::App* reference = app.add_subcommand("reference", "Generate reference structures");
    reference->require_subcommand(1);
    reference->fallthrough();
    CLI::App* refgrid = reference->add_subcommand("grid", "Regular bar lattice at a target volume");
    refgrid->fallthrough();
    refgrid->add_option("config", config_path, "Run configuration file")->required();
    refgrid->add_option("--volume", volume, "Target volume fraction")->required();
    refgrid->add_option("--pitch", pitch, "Bar pitch in voxels (default: round(R))");
    refgrid->add_option("--out", common.out_dir, "Output directory (overrides config)");

    CLI11_PARSE(app, argc, argv);
    setup_threads(common.threads);

    try {
        if (*optimize) return run_optimize(config_path, common, snapshot_every);
        if (*damage) return run_damage(config_path, density_path, common, size, anchor, sweep_step);
        if (*rotate) return run_rotate(config_path, density_path, common, start_deg, stop_deg, step_deg);
        if (*refgrid) return run_reference_grid(config_path, common, volume, pitch);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
