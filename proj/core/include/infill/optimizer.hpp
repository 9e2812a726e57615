#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infill/constraints.hpp"
#include "infill/fem.hpp"
#include "infill/fields.hpp"
#include "infill/grid.hpp"
#include "infill/mma.hpp"

namespace infill {

/// Everything that defines the mechanical problem: discretization, domain
/// shape, frozen shell, supports, loads and material.
struct Problem {
    Grid grid;
    DomainMask domain;
    PassiveMask passive;
    BoundaryConditions bcs;
    Material material;
};

struct BetaSchedule {
    double initial = 1.0;
    double max = 512.0;
    int period = 40;  // iterations between doublings

    bool operator==(const BetaSchedule&) const = default;
};

struct OptimizationConfig {
    bool local_constraint = true;
    double alpha = 0.6;                   // local volume limit
    std::optional<double> alpha_total;    // optional total volume limit
    double influence_radius = 6.0;        // R, local volume neighborhood
    double filter_radius = 2.0;           // r, smoothing filter
    double aggregation_exponent = 16.0;   // p
    bool anisotropic = false;
    double lobe_long = 0.0;               // 0 -> influence_radius
    double lobe_short = 0.0;              // 0 -> filter_radius
    BetaSchedule beta;
    double change_tolerance = 0.01;       // epsilon on max design change
    int max_iterations = 500;
    double move_limit = 0.2;
    double solver_tolerance = 1e-6;
    int solver_max_iterations = 20000;
    std::optional<double> initial_design;  // default: alpha (or alpha_total)

    double lobe_long_or_default() const { return lobe_long > 0.0 ? lobe_long : influence_radius; }
    double lobe_short_or_default() const { return lobe_short > 0.0 ? lobe_short : filter_radius; }
    void validate() const;  // throws std::invalid_argument

    bool operator==(const OptimizationConfig&) const = default;
};

struct TraceRecord {
    int iteration = 0;
    double compliance = 0.0;
    std::optional<double> g_local;    // aggregated local volume (x lobe if anisotropic)
    std::optional<double> g_local_y;  // y lobe, anisotropic mode only
    std::optional<double> g_total;
    double sharpness = 0.0;
    double beta = 0.0;   // value used during this iteration
    double delta = 0.0;  // max design change produced by this iteration
    int fem_iterations = 0;
    double seconds = 0.0;
};

enum class RunStatus { Converged, IterationLimit, SolverFailure, NumericFailure };

struct RunResult {
    RunStatus status = RunStatus::IterationLimit;
    int iterations = 0;
    std::vector<double> phi;       // final design variables on the full grid
    std::vector<double> rho;       // final projected density
    std::vector<double> rho_bar;   // final local volume fraction (isotropic kernel)
    std::vector<double> displacement;
    std::vector<TraceRecord> trace;
    std::string wall_advisory;     // non-empty when alpha admits wall formation
};

/// Sharpness s = (4/n) sum rho (1 - rho) over masked elements: 0 for a binary
/// field, 1 for an all-0.5 field.
double sharpness(std::span<const double> rho, std::span<const std::uint8_t> mask);

/// Self-adjoint compliance sensitivity for c = 1/2 u^T K u under modified
/// SIMP: dc/drho_e = -(gamma/2) rho^(gamma-1) (E0 - Emin) ue^T k0 ue, zero
/// outside the masked (design) elements.
std::vector<double> compliance_sensitivity(const Grid& grid, const Matrix8& k0,
                                           const Material& mat, std::span<const double> rho,
                                           std::span<const double> u,
                                           std::span<const std::uint8_t> mask);

/// Forward evaluation of the chain phi -> phi_tilde -> rho -> (c, g) together
/// with the full chain-rule gradients. Exposed so the production gradients can
/// be checked against finite differences.
struct GradientProbe {
    double compliance = 0.0;
    std::vector<double> phi_tilde, rho;
    std::vector<double> constraint_values;               // [local][local_y][total]
    std::vector<double> compliance_gradient;             // d c / d phi, full grid
    std::vector<std::vector<double>> constraint_gradients;
    SolveInfo solve_info;
};

/// Driver for the optimization loop: filter, project, solve, measure, adjoint
/// backpropagation, MMA update and beta continuation.
class InfillOptimizer {
public:
    InfillOptimizer(const Problem& problem, const OptimizationConfig& config);

    using IterationCallback =
        std::function<void(const TraceRecord&, std::span<const double> rho)>;

    RunResult run(const IterationCallback& callback = {});

    GradientProbe evaluate(std::span<const double> phi_full, double beta);

    const std::vector<std::uint8_t>& design_mask() const { return active_; }
    int num_design_vars() const { return static_cast<int>(design_elems_.size()); }

private:
    Problem problem_;
    OptimizationConfig config_;
    std::vector<std::uint8_t> in_domain_, active_;
    std::vector<int> design_elems_;  // element ids of design variables
    KernelMap smooth_map_;
    std::vector<KernelMap> volume_maps_;  // 1 isotropic or 2 lobes
    FemSystem fem_;

    struct Forward {
        std::vector<double> phi_tilde, rho;
        std::vector<std::vector<double>> rho_bar;
        double compliance = 0.0;
        SolveInfo solve_info;
    };
    Forward forward(std::span<const double> phi_full, double beta, std::vector<double>& u);
    std::vector<double> compliance_sensitivity_rho(std::span<const double> rho,
                                                   std::span<const double> u) const;
};

RunResult run_optimization(const Problem& problem, const OptimizationConfig& config,
                           const InfillOptimizer::IterationCallback& callback = {});

}  // namespace infill
