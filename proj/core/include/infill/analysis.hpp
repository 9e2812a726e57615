#pragma once

#include <span>
#include <vector>

#include "infill/fem.hpp"
#include "infill/optimizer.hpp"

namespace infill {

/// Axis-aligned square damage region: anchor is the lower-left element,
/// side length in voxels.
struct DamageSpec {
    int anchor_i = 0;
    int anchor_j = 0;
    int size = 1;
};

struct DamageCase {
    DamageSpec spec;
    double compliance_before = 0.0;
    double compliance_after = 0.0;
    double ratio = 0.0;
    SolveInfo before_info, after_info;
};

struct RotationCase {
    double angle = 0.0;  // radians
    double compliance = 0.0;
    double ratio = 0.0;  // against the unrotated load
    SolveInfo info;
};

struct SweepSummary {
    int worst_index = -1;
    double worst_value = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// Re-analysis harness for a fixed design: damage knockdown and load-rotation
/// experiments on the converged density field.
class Analyzer {
public:
    Analyzer(const Problem& problem, std::span<const double> rho,
             double solver_tolerance = 1e-6, int solver_max_iterations = 20000);

    double baseline_compliance() const { return baseline_compliance_; }
    const SolveInfo& baseline_info() const { return baseline_info_; }

    /// Sets rho = 0 (modulus knocked down to Emin) inside the square region
    /// and re-solves. Solver status is carried in the returned case; a
    /// non-converged solve marks a structure effectively disconnected from
    /// its supports. Throws if the region leaves the grid.
    DamageCase damage(const DamageSpec& spec) const;

    /// Rotates every load vector by the angle about its application point and
    /// re-solves with the fixed design. Rotated components that land on a
    /// fixed dof of the same axis do no work and are dropped.
    RotationCase rotate(double angle) const;

private:
    Problem problem_;
    std::vector<double> rho_;
    double tol_;
    int max_iters_;
    FemSystem fem_;
    std::vector<double> baseline_u_;
    double baseline_compliance_ = 0.0;
    SolveInfo baseline_info_;
};

DamageCase damage_eval(const Problem& problem, std::span<const double> rho,
                       const DamageSpec& spec, double solver_tolerance = 1e-6,
                       int solver_max_iterations = 20000);

std::vector<RotationCase> force_rotation_sweep(const Problem& problem,
                                               std::span<const double> rho,
                                               std::span<const double> angles,
                                               double solver_tolerance = 1e-6,
                                               int solver_max_iterations = 20000);

SweepSummary summarize_ratios(std::span<const DamageCase> cases);
SweepSummary summarize_compliance(std::span<const RotationCase> cases);

/// Axis-aligned bar lattice with bars every `pitch` voxels, thickened row by
/// row above the horizontal bars (bottom-up) until the realized volume matches
/// the target within 1% relative. Throws when the pitch/target combination is
/// infeasible. Pitch must be >= 2.
std::vector<double> make_regular_grid_infill(const Problem& problem, double target_volume,
                                             int pitch);

/// Histogram over [0, 1] with uniform bins, restricted to masked elements.
/// Values land in bin floor(v * bins), the right edge in the last bin.
std::vector<long long> histogram(std::span<const double> field, int bins,
                                 std::span<const std::uint8_t> mask);

}  // namespace infill
