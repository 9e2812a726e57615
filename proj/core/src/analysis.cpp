#include "infill/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace infill {

Analyzer::Analyzer(const Problem& problem, std::span<const double> rho, double solver_tolerance,
                   int solver_max_iterations)
    : problem_(problem),
      rho_(rho.begin(), rho.end()),
      tol_(solver_tolerance),
      max_iters_(solver_max_iterations),
      fem_(problem.grid, problem.bcs, problem.material, solver_tolerance, solver_max_iterations) {
    if (rho_.size() != static_cast<std::size_t>(problem_.grid.num_elements())) {
        throw std::invalid_argument("density field size mismatch");
    }
    fem_.set_densities(rho_);
    baseline_u_.assign(static_cast<std::size_t>(problem_.grid.num_dofs()), 0.0);
    baseline_info_ = fem_.solve(baseline_u_);
    baseline_compliance_ = fem_.compliance(baseline_u_);
}

DamageCase Analyzer::damage(const DamageSpec& spec) const {
    const Grid& grid = problem_.grid;
    if (spec.size < 1 || spec.anchor_i < 0 || spec.anchor_j < 0 ||
        spec.anchor_i + spec.size > grid.nx || spec.anchor_j + spec.size > grid.ny) {
        throw std::invalid_argument("damage region leaves the grid");
    }
    std::vector<double> damaged = rho_;
    for (int i = spec.anchor_i; i < spec.anchor_i + spec.size; ++i) {
        for (int j = spec.anchor_j; j < spec.anchor_j + spec.size; ++j) {
            const std::size_t e = static_cast<std::size_t>(grid.elem_index(i, j));
            if (problem_.domain.is_inside(static_cast<int>(e))) damaged[e] = 0.0;
        }
    }
    FemSystem fem(grid, problem_.bcs, problem_.material, tol_, max_iters_);
    fem.set_densities(damaged);
    std::vector<double> u = baseline_u_;
    DamageCase out;
    out.spec = spec;
    out.compliance_before = baseline_compliance_;
    out.before_info = baseline_info_;
    out.after_info = fem.solve(u);
    out.compliance_after = fem.compliance(u);
    out.ratio = out.compliance_before > 0.0 ? out.compliance_after / out.compliance_before : 0.0;
    return out;
}

RotationCase Analyzer::rotate(double angle) const {
    const Grid& grid = problem_.grid;
    const double c = std::cos(angle);
    const double s = std::sin(angle);

    // Collapse the load list to per-node vectors, rotate, re-emit components.
    std::vector<std::pair<int, std::array<double, 2>>> per_node;
    for (const Load& l : problem_.bcs.loads) {
        auto it = std::find_if(per_node.begin(), per_node.end(),
                               [&](const auto& p) { return p.first == l.node; });
        if (it == per_node.end()) {
            per_node.push_back({l.node, {0.0, 0.0}});
            it = std::prev(per_node.end());
        }
        it->second[static_cast<std::size_t>(l.axis)] += l.magnitude;
    }

    BoundaryConditions rotated;
    rotated.fixed_dofs = problem_.bcs.fixed_dofs;
    for (const auto& [node, f] : per_node) {
        const double fx = c * f[0] - s * f[1];
        const double fy = s * f[0] + c * f[1];
        for (int axis = 0; axis < 2; ++axis) {
            const double mag = axis == 0 ? fx : fy;
            if (mag == 0.0) continue;
            const int dof = 2 * node + axis;
            if (std::binary_search(rotated.fixed_dofs.begin(), rotated.fixed_dofs.end(), dof)) {
                continue;  // reaction absorbs it, no work done
            }
            rotated.loads.push_back({node, axis, mag});
        }
    }

    FemSystem fem(grid, rotated, problem_.material, tol_, max_iters_);
    fem.set_densities(rho_);
    std::vector<double> u = baseline_u_;
    RotationCase out;
    out.angle = angle;
    out.info = fem.solve(u);
    out.compliance = fem.compliance(u);
    out.ratio = baseline_compliance_ > 0.0 ? out.compliance / baseline_compliance_ : 0.0;
    return out;
}

DamageCase damage_eval(const Problem& problem, std::span<const double> rho, const DamageSpec& spec,
                       double solver_tolerance, int solver_max_iterations) {
    Analyzer a(problem, rho, solver_tolerance, solver_max_iterations);
    return a.damage(spec);
}

std::vector<RotationCase> force_rotation_sweep(const Problem& problem, std::span<const double> rho,
                                               std::span<const double> angles,
                                               double solver_tolerance, int solver_max_iterations) {
    Analyzer a(problem, rho, solver_tolerance, solver_max_iterations);
    std::vector<RotationCase> cases;
    cases.reserve(angles.size());
    for (double angle : angles) cases.push_back(a.rotate(angle));
    return cases;
}

SweepSummary summarize_ratios(std::span<const DamageCase> cases) {
    SweepSummary s;
    if (cases.empty()) return s;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double v = cases[i].ratio;
        sum += v;
        sum2 += v * v;
        if (s.worst_index < 0 || v > s.worst_value) {
            s.worst_index = static_cast<int>(i);
            s.worst_value = v;
        }
    }
    const double n = static_cast<double>(cases.size());
    s.mean = sum / n;
    s.variance = std::max(0.0, sum2 / n - s.mean * s.mean);
    return s;
}

SweepSummary summarize_compliance(std::span<const RotationCase> cases) {
    SweepSummary s;
    if (cases.empty()) return s;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double v = cases[i].compliance;
        sum += v;
        sum2 += v * v;
        if (s.worst_index < 0 || v > s.worst_value) {
            s.worst_index = static_cast<int>(i);
            s.worst_value = v;
        }
    }
    const double n = static_cast<double>(cases.size());
    s.mean = sum / n;
    s.variance = std::max(0.0, sum2 / n - s.mean * s.mean);
    return s;
}

std::vector<double> make_regular_grid_infill(const Problem& problem, double target_volume,
                                             int pitch) {
    if (pitch < 2) throw std::invalid_argument("bar pitch must be at least 2 voxels");
    if (!(target_volume > 0.0 && target_volume <= 1.0)) {
        throw std::invalid_argument("target volume must lie in (0, 1]");
    }
    const Grid& grid = problem.grid;
    const std::size_t n = static_cast<std::size_t>(grid.num_elements());
    std::vector<double> rho(n, 0.0);

    long long n_domain = 0;
    for (std::size_t e = 0; e < n; ++e) {
        if (problem.domain.inside[e]) ++n_domain;
    }
    if (n_domain == 0) throw std::invalid_argument("empty design domain");

    long long solid = 0;
    auto fill = [&](int i, int j) {
        const std::size_t e = static_cast<std::size_t>(grid.elem_index(i, j));
        if (!problem.domain.inside[e] || rho[e] == 1.0) return false;
        rho[e] = 1.0;
        ++solid;
        return true;
    };
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            if (i % pitch == 0 || j % pitch == 0) fill(i, j);
        }
    }

    const double tol = 0.01 * target_volume;
    auto volume = [&]() { return static_cast<double>(solid) / static_cast<double>(n_domain); };
    if (volume() > target_volume + tol) {
        throw std::invalid_argument("base lattice volume " + std::to_string(volume()) +
                                    " already exceeds the target " + std::to_string(target_volume));
    }

    // Thicken horizontal bars one row at a time, bottom-up, alternating above
    // and below, until the target volume is met.
    for (int layer = 1; layer < pitch && volume() < target_volume - tol; ++layer) {
        for (int sign : {1, -1}) {
            if (volume() >= target_volume - tol) break;
            for (int j0 = 0; j0 < grid.ny && volume() < target_volume - tol; j0 += pitch) {
                const int j = j0 + sign * layer;
                if (j < 0 || j >= grid.ny) continue;
                for (int i = 0; i < grid.nx; ++i) {
                    fill(i, j);
                    if (volume() >= target_volume) break;
                }
            }
        }
    }
    if (volume() < target_volume - tol) {
        throw std::invalid_argument("cannot reach target volume " + std::to_string(target_volume) +
                                    " with pitch " + std::to_string(pitch));
    }
    return rho;
}

std::vector<long long> histogram(std::span<const double> field, int bins,
                                 std::span<const std::uint8_t> mask) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
    std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
    for (std::size_t e = 0; e < field.size(); ++e) {
        if (!mask[e]) continue;
        int b = static_cast<int>(std::floor(field[e] * bins));
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    return counts;
}

}  // namespace infill
