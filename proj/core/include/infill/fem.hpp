#pragma once

#include <array>
#include <span>
#include <vector>

#include "infill/grid.hpp"

namespace infill {

/// Modified SIMP material: E(rho) = Emin + rho^gamma (E0 - Emin).
struct Material {
    double E0 = 1.0;
    double Emin = 1e-9;
    double gamma = 3.0;
    double nu = 0.3;
};

using Matrix8 = std::array<std::array<double, 8>, 8>;

/// Stiffness matrix of a unit-square plane-stress bilinear quad with unit
/// Young's modulus. Local dof order follows elem_nodes: (x, y) pairs for the
/// corners (0,0), (1,0), (1,1), (0,1). Throws unless -1 < nu < 0.5.
Matrix8 element_stiffness(double nu);

double young_modulus(double rho, const Material& mat);

/// Per-element moduli for a density field.
std::vector<double> interpolate_moduli(std::span<const double> rho, const Material& mat);

/// out = K(E) u with no boundary treatment. K is never assembled; the product
/// is gathered per node so each output entry is computed independently (safe
/// and deterministic under element-parallel execution).
void apply_stiffness(const Grid& grid, const Matrix8& k0, std::span<const double> moduli,
                     std::span<const double> u, std::span<double> out);

/// Sum of E_e * ue^T k0 ue over elements (twice the strain energy).
double stiffness_energy(const Grid& grid, const Matrix8& k0, std::span<const double> moduli,
                        std::span<const double> u);

/// Per-element quadratic forms ue^T k0 ue (the compliance sensitivities need
/// them without the modulus factor).
void element_energies(const Grid& grid, const Matrix8& k0, std::span<const double> u,
                      std::span<double> out);

struct SolveInfo {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 0.0;
};

/// State solver for Ku = f on the regular grid: matrix-free preconditioned
/// conjugate gradients with a Jacobi preconditioner. Fixed dofs are kept in
/// the numbering as identity rows/columns.
class FemSystem {
public:
    FemSystem(const Grid& grid, const BoundaryConditions& bcs, const Material& mat,
              double rel_tolerance = 1e-6, int max_iterations = 20000);

    void set_densities(std::span<const double> rho);
    void set_moduli(std::vector<double> moduli);
    const std::vector<double>& moduli() const { return moduli_; }
    const std::vector<double>& load_vector() const { return load_; }
    const Grid& grid() const { return grid_; }
    const Material& material() const { return material_; }
    const Matrix8& k0() const { return k0_; }

    /// out = K u with identity rows on fixed dofs.
    void apply(std::span<const double> u, std::span<double> out) const;

    /// PCG solve of Ku = f, warm-started from the incoming u (fixed entries
    /// are forced to zero). Returns the iteration count and final relative
    /// residual; converged == false means the budget ran out.
    SolveInfo solve(std::vector<double>& u) const;

    /// As solve(), but throws std::runtime_error carrying the final residual
    /// when PCG does not reach the tolerance.
    SolveInfo solve_or_throw(std::vector<double>& u) const;

    /// c = 1/2 u^T K u for the current moduli.
    double compliance(std::span<const double> u) const;

    double rel_tolerance() const { return rel_tolerance_; }
    int max_iterations() const { return max_iterations_; }

private:
    Grid grid_;
    Material material_;
    Matrix8 k0_{};
    std::vector<std::uint8_t> fixed_;  // per dof
    std::vector<double> load_;         // full-size f, zero on fixed dofs
    std::vector<double> moduli_;       // per element
    double load_norm_ = 0.0;
    double rel_tolerance_;
    int max_iterations_;

    void assemble_diagonal(std::vector<double>& diag) const;
};

struct StressField {
    std::vector<double> sxx, syy, sxy;
    std::vector<double> principal_1, principal_2;  // signed, principal_1 >= principal_2
    std::vector<double> angle;                     // direction of principal_1, radians
    std::vector<double> von_mises;
};

/// Centroid stress per element from the displacement field, with the modulus
/// interpolated from rho.
StressField element_stress(const Grid& grid, std::span<const double> u,
                           std::span<const double> rho, const Material& mat);

}  // namespace infill
