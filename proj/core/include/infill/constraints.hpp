#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace infill {

struct ConstraintValue {
    double value = 0.0;
    std::vector<double> gradient;  // per element, zero outside the constrained set
};

/// Aggregated local volume constraint
///   g = ((1/n) sum rho_bar^p)^(1/p) / alpha - 1
/// over the elements marked in `mask` (active, in-domain), with the gradient
///   dg/drho_bar_j = 1/(alpha n) ((1/n) sum rho_bar^p)^(1/p - 1) rho_bar_j^(p-1).
/// An all-zero field yields g = -1 with a zero gradient. Throws for
/// alpha <= 0 or p < 2.
ConstraintValue eval_local(std::span<const double> rho_bar, double alpha, double p,
                           std::span<const std::uint8_t> mask);

/// Total volume constraint g1 = mean(rho) - alpha_total over the elements in
/// `mask` (in-domain), gradient uniformly 1/n. Throws unless
/// 0 < alpha_total <= 1.
ConstraintValue eval_total(std::span<const double> rho, double alpha_total,
                           std::span<const std::uint8_t> mask);

struct WallBoundReport {
    double ratio = 0.0;            // V_wall / V_sphere
    double alpha = 0.0;
    bool walls_suppressed = false; // alpha < ratio
};

/// Advisory feasibility check for suppressing wall-like substructures: a wall
/// of thickness 2r through the influence sphere of radius R occupies
/// V_wall = 2 pi r R^2 - (2/3) pi r^3 of V_sphere = (4/3) pi R^3; walls are
/// suppressed when alpha < V_wall / V_sphere. Requires 0 < r < R.
WallBoundReport wall_bound(double alpha, double R, double r);

}  // namespace infill
