#pragma once

#include <span>
#include <vector>

namespace infill {

struct MmaOptions {
    double move_limit = 0.2;   // per-update cap on |x_new - x| in units of the box
    double asym_init = 0.5;    // initial asymptote distance, fraction of the box
    double asym_incr = 1.2;    // relaxation when iterates move monotonically
    double asym_decr = 0.7;    // tightening on oscillation
    double albefa = 0.1;       // bound offset from the asymptotes
    double raa0 = 1e-5;        // minimum curvature, relative to the gradient scale
    double xmin = 0.0;
    double xmax = 1.0;
};

/// Method of moving asymptotes for box-constrained problems with a handful of
/// inequality constraints g_k <= 0. Each update builds Svanberg's separable
/// rational approximation around adaptively moved asymptotes and solves its
/// dual with a damped Newton interior-point iteration on the multipliers.
///
/// The objective gradient is normalized internally by its max-norm, so the
/// update is invariant under positive rescaling of the objective.
class MmaSolver {
public:
    MmaSolver(int num_vars, int num_constraints, MmaOptions options = {});

    /// x is updated in place. dg is row-major: dg[k * n + j] = dg_k / dx_j.
    /// Throws std::invalid_argument on size mismatches or non-finite input.
    void update(std::span<double> x, std::span<const double> objective_gradient,
                std::span<const double> constraint_values,
                std::span<const double> constraint_gradients);

    int iteration() const { return iter_; }
    const std::vector<double>& lower_asymptotes() const { return low_; }
    const std::vector<double>& upper_asymptotes() const { return upp_; }
    const std::vector<double>& multipliers() const { return lambda_; }
    const MmaOptions& options() const { return options_; }

private:
    int n_ = 0;
    int m_ = 0;
    MmaOptions options_;
    int iter_ = 0;
    std::vector<double> low_, upp_;
    std::vector<double> xold1_, xold2_;
    std::vector<double> lambda_;

    // subproblem workspace
    std::vector<double> p0_, q0_, pk_, qk_;
    std::vector<double> alfa_, beta_;
    std::vector<double> b_;

    void solve_dual(std::span<double> x);
    void eval_x_of_lambda(std::span<double> x) const;
};

}  // namespace infill
