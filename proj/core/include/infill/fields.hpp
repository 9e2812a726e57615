#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "infill/grid.hpp"

namespace infill {

enum class Axis { X = 0, Y = 1 };

/// Translation-invariant neighborhood stencil. Offsets are stored as
/// sign-canonical groups (di, dj >= 0); a group expands to the up-to-four
/// sign combinations, all sharing one weight. Group-wise accumulation keeps
/// stencil sums exactly invariant under x/y mirroring of the field.
struct FilterKernel {
    struct OffsetGroup {
        int di = 0;
        int dj = 0;
        double weight = 1.0;
    };
    double radius = 0.0;
    bool counting = false;  // all weights 1 (local volume measure)
    std::vector<OffsetGroup> groups;
};

/// Smoothing kernel of radius r: offsets with centroid distance d < r and
/// weight 1 - d/r (strictly positive). Throws for r <= 0.
FilterKernel make_smooth_kernel(double r);

/// Local-volume counting kernel: offsets with d <= R, unit weights.
/// Throws for R <= 0.
FilterKernel make_volume_kernel(double R);

/// Axis-aligned anisotropic lobe: offsets with |coordinate along s| <= r_long
/// and |perpendicular coordinate| <= r_short, unit weights.
FilterKernel make_lobe_kernel(Axis s, double r_long, double r_short);

/// A kernel bound to a grid with admissibility masks and precomputed
/// neighborhood weight sums. `source` marks elements that may contribute,
/// `output` marks elements whose average is defined. Throws if an output
/// element ends up with an empty neighborhood.
class KernelMap {
public:
    KernelMap(const Grid& grid, FilterKernel kernel, std::vector<std::uint8_t> source,
              std::vector<std::uint8_t> output);

    /// out_e = sum_i w_ie x_i / sum_i w_ie over admissible neighbors i of e;
    /// zero on non-output elements.
    void average(std::span<const double> x, std::span<double> out) const;

    /// Adjoint of average(): out_i = sum_e w_ie y_e / denom_e over output
    /// elements e whose neighborhood contains i; zero on non-source elements.
    void average_adjoint(std::span<const double> y, std::span<double> out) const;

    const std::vector<double>& weight_sums() const { return denom_; }
    const FilterKernel& kernel() const { return kernel_; }
    const Grid& grid() const { return grid_; }
    bool is_source(int e) const { return source_[static_cast<std::size_t>(e)] != 0; }
    bool is_output(int e) const { return output_[static_cast<std::size_t>(e)] != 0; }

private:
    Grid grid_;
    FilterKernel kernel_;
    std::vector<std::uint8_t> source_;
    std::vector<std::uint8_t> output_;
    std::vector<double> denom_;
};

/// Mask helpers for the two kernel uses: the smoothing filter runs over all
/// in-domain elements; the local volume measure runs over in-domain active
/// elements only (passive neighbors are excluded from the count).
std::vector<std::uint8_t> in_domain_mask(const Grid& grid, const DomainMask& domain);
std::vector<std::uint8_t> active_mask(const Grid& grid, const DomainMask& domain,
                                      const PassiveMask& passive);

/// phi -> phi_tilde, the distance-weighted neighborhood average. Neighborhoods
/// are truncated at the domain boundary and renormalized.
std::vector<double> smooth_filter(const Grid& grid, std::span<const double> phi, double r,
                                  const PassiveMask& passive, const DomainMask& domain);

/// Smoothed Heaviside projection with threshold 1/2:
/// rho = (tanh(b/2) + tanh(b (x - 1/2))) / (2 tanh(b/2)).
/// Exact at 0, 1/2 and 1; strictly increasing; beta > 0.
double project_value(double phi_tilde, double beta);
std::vector<double> project(std::span<const double> phi_tilde, double beta);

/// d rho / d phi_tilde = b (1 - tanh^2(b (x - 1/2))) / (2 tanh(b/2)).
double project_derivative_value(double phi_tilde, double beta);
std::vector<double> project_derivative(std::span<const double> phi_tilde, double beta);

/// rho -> rho_bar, the fraction of material in the R-neighborhood of each
/// active in-domain element (passive and out-of-domain neighbors excluded).
std::vector<double> local_volume(const Grid& grid, std::span<const double> rho, double R,
                                 const PassiveMask& passive, const DomainMask& domain);

/// Per-axis local volume over an anisotropic lobe neighborhood.
std::vector<double> local_volume_aniso(const Grid& grid, std::span<const double> rho, Axis s,
                                       double r_long, double r_short, const PassiveMask& passive,
                                       const DomainMask& domain);

/// Chain-rule backpropagation through project and the smoothing filter:
/// dF/dphi = filter_adjoint( dF/drho .* drho/dphi_tilde ), with passive
/// entries dropped (their density never follows phi).
std::vector<double> backprop_from_density(const KernelMap& smooth_map,
                                          std::span<const double> dF_drho,
                                          std::span<const double> phi_tilde, double beta,
                                          std::span<const std::uint8_t> design_mask);

/// Full chain from a local-volume sensitivity:
/// dF/dphi = filter_adjoint( volume_adjoint(dF/drho_bar) .* drho/dphi_tilde ).
std::vector<double> backprop_from_local_volume(const KernelMap& smooth_map,
                                               const KernelMap& volume_map,
                                               std::span<const double> dF_drho_bar,
                                               std::span<const double> phi_tilde, double beta,
                                               std::span<const std::uint8_t> design_mask);

}  // namespace infill
