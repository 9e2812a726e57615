#include "infill/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace infill {
namespace {

std::vector<KernelMap> build_volume_maps(const Grid& grid, const OptimizationConfig& cfg,
                                         const std::vector<std::uint8_t>& active) {
    std::vector<KernelMap> maps;
    if (cfg.anisotropic) {
        maps.emplace_back(grid, make_lobe_kernel(Axis::X, cfg.lobe_long_or_default(),
                                                 cfg.lobe_short_or_default()),
                          active, active);
        maps.emplace_back(grid, make_lobe_kernel(Axis::Y, cfg.lobe_long_or_default(),
                                                 cfg.lobe_short_or_default()),
                          active, active);
    } else {
        maps.emplace_back(grid, make_volume_kernel(cfg.influence_radius), active, active);
    }
    return maps;
}

}  // namespace

void OptimizationConfig::validate() const {
    if (local_constraint && !(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("local volume limit alpha must lie in (0, 1]");
    }
    if (alpha_total && !(*alpha_total > 0.0 && *alpha_total <= 1.0)) {
        throw std::invalid_argument("total volume limit must lie in (0, 1]");
    }
    if (!local_constraint && !alpha_total) {
        throw std::invalid_argument("at least one volume constraint must be enabled");
    }
    if (!(filter_radius > 0.0)) throw std::invalid_argument("filter radius must be positive");
    if (local_constraint && !anisotropic && !(influence_radius > filter_radius)) {
        throw std::invalid_argument("influence radius R must exceed the filter radius r");
    }
    if (!(aggregation_exponent >= 2.0)) throw std::invalid_argument("p must be >= 2");
    if (!(beta.initial >= 1.0)) throw std::invalid_argument("beta must start at >= 1");
    if (!(beta.max >= beta.initial)) throw std::invalid_argument("beta_max must be >= beta0");
    if (beta.period < 1) throw std::invalid_argument("beta doubling period must be >= 1");
    if (!(change_tolerance > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
    if (!(move_limit > 0.0 && move_limit <= 1.0)) {
        throw std::invalid_argument("move limit must lie in (0, 1]");
    }
    if (!(solver_tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (initial_design && !(*initial_design >= 0.0 && *initial_design <= 1.0)) {
        throw std::invalid_argument("initial design value must lie in [0, 1]");
    }
    if (solver_max_iterations < 1) throw std::invalid_argument("solver iteration budget must be >= 1");
}

double sharpness(std::span<const double> rho, std::span<const std::uint8_t> mask) {
    long long n = 0;
    double sum = 0.0;
    for (std::size_t e = 0; e < rho.size(); ++e) {
        if (!mask[e]) continue;
        ++n;
        sum += rho[e] * (1.0 - rho[e]);
    }
    if (n == 0) return 0.0;
    return 4.0 * sum / static_cast<double>(n);
}

InfillOptimizer::InfillOptimizer(const Problem& problem, const OptimizationConfig& config)
    : problem_(problem),
      config_(config),
      in_domain_(in_domain_mask(problem.grid, problem.domain)),
      active_(active_mask(problem.grid, problem.domain, problem.passive)),
      smooth_map_(problem.grid, make_smooth_kernel(config.filter_radius), in_domain_, in_domain_),
      volume_maps_(build_volume_maps(problem.grid, config, active_)),
      fem_(problem.grid, problem.bcs, problem.material, config.solver_tolerance,
           config.solver_max_iterations) {
    config_.validate();
    const std::size_t n = static_cast<std::size_t>(problem_.grid.num_elements());
    if (problem_.domain.inside.size() != n || problem_.passive.is_passive.size() != n) {
        throw std::invalid_argument("mask sizes must match the grid");
    }
    for (std::size_t e = 0; e < n; ++e) {
        if (active_[e]) design_elems_.push_back(static_cast<int>(e));
    }
    if (design_elems_.empty()) throw std::invalid_argument("no active design elements");
}

InfillOptimizer::Forward InfillOptimizer::forward(std::span<const double> phi_full, double beta,
                                                  std::vector<double>& u) {
    Forward f;
    const std::size_t n = static_cast<std::size_t>(problem_.grid.num_elements());
    f.phi_tilde.assign(n, 0.0);
    smooth_map_.average(phi_full, f.phi_tilde);
    f.rho = project(f.phi_tilde, beta);
    for (std::size_t e = 0; e < n; ++e) {
        if (!in_domain_[e]) {
            f.rho[e] = 0.0;
        } else if (problem_.passive.is_passive[e]) {
            f.rho[e] = 1.0;
        }
    }
    fem_.set_densities(f.rho);
    f.solve_info = fem_.solve(u);
    f.compliance = fem_.compliance(u);
    if (config_.local_constraint) {
        for (const KernelMap& map : volume_maps_) {
            std::vector<double> rb(n, 0.0);
            map.average(f.rho, rb);
            f.rho_bar.push_back(std::move(rb));
        }
    }
    return f;
}

std::vector<double> compliance_sensitivity(const Grid& grid, const Matrix8& k0,
                                           const Material& mat, std::span<const double> rho,
                                           std::span<const double> u,
                                           std::span<const std::uint8_t> mask) {
    const std::size_t n = static_cast<std::size_t>(grid.num_elements());
    std::vector<double> q(n);
    element_energies(grid, k0, u, q);
    std::vector<double> out(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        if (!mask[e]) continue;
        out[e] = -0.5 * mat.gamma * std::pow(rho[e], mat.gamma - 1.0) * (mat.E0 - mat.Emin) * q[e];
    }
    return out;
}

std::vector<double> InfillOptimizer::compliance_sensitivity_rho(std::span<const double> rho,
                                                                std::span<const double> u) const {
    return compliance_sensitivity(problem_.grid, fem_.k0(), problem_.material, rho, u, active_);
}

GradientProbe InfillOptimizer::evaluate(std::span<const double> phi_full, double beta) {
    std::vector<double> u(static_cast<std::size_t>(problem_.grid.num_dofs()), 0.0);
    Forward f = forward(phi_full, beta, u);

    GradientProbe probe;
    probe.compliance = f.compliance;
    probe.solve_info = f.solve_info;
    probe.compliance_gradient = backprop_from_density(
        smooth_map_, compliance_sensitivity_rho(f.rho, u), f.phi_tilde, beta, active_);
    if (config_.local_constraint) {
        for (std::size_t k = 0; k < volume_maps_.size(); ++k) {
            ConstraintValue c = eval_local(f.rho_bar[k], config_.alpha,
                                           config_.aggregation_exponent, active_);
            probe.constraint_values.push_back(c.value);
            probe.constraint_gradients.push_back(backprop_from_local_volume(
                smooth_map_, volume_maps_[k], c.gradient, f.phi_tilde, beta, active_));
        }
    }
    if (config_.alpha_total) {
        ConstraintValue c = eval_total(f.rho, *config_.alpha_total, in_domain_);
        probe.constraint_values.push_back(c.value);
        probe.constraint_gradients.push_back(
            backprop_from_density(smooth_map_, c.gradient, f.phi_tilde, beta, active_));
    }
    probe.phi_tilde = std::move(f.phi_tilde);
    probe.rho = std::move(f.rho);
    return probe;
}

RunResult InfillOptimizer::run(const IterationCallback& callback) {
    using clock = std::chrono::steady_clock;
    const std::size_t n = static_cast<std::size_t>(problem_.grid.num_elements());
    const std::size_t nd = design_elems_.size();

    RunResult result;
    if (config_.local_constraint && !config_.anisotropic &&
        config_.filter_radius < config_.influence_radius) {
        const WallBoundReport rep =
            wall_bound(config_.alpha, config_.influence_radius, config_.filter_radius);
        if (!rep.walls_suppressed) {
            result.wall_advisory =
                "alpha = " + std::to_string(config_.alpha) + " admits wall-like structures " +
                "(V_wall/V_sphere = " + std::to_string(rep.ratio) + "); raise r or lower alpha " +
                "to suppress walls";
        }
    }

    // Design variables: active elements only. Passive elements stay at
    // rho = 1, outside elements at 0, both excluded from the update.
    std::vector<double> phi_full(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        if (problem_.passive.is_passive[e] && in_domain_[e]) phi_full[e] = 1.0;
    }
    const double phi_init = config_.initial_design.value_or(
        config_.local_constraint ? config_.alpha : *config_.alpha_total);
    for (int e : design_elems_) phi_full[static_cast<std::size_t>(e)] = phi_init;

    const int num_constraints = (config_.local_constraint ? (config_.anisotropic ? 2 : 1) : 0) +
                                (config_.alpha_total ? 1 : 0);
    MmaOptions mma_opts;
    mma_opts.move_limit = config_.move_limit;
    MmaSolver mma(static_cast<int>(nd), num_constraints, mma_opts);

    std::vector<double> u(static_cast<std::size_t>(problem_.grid.num_dofs()), 0.0);
    std::vector<double> x(nd), x_prev(nd), df(nd), dg(nd * static_cast<std::size_t>(num_constraints));
    std::vector<double> gval(static_cast<std::size_t>(num_constraints));

    double beta = config_.beta.initial;
    double delta = 1.0;
    int iter = 0;
    double first_compliance = 0.0;
    result.status = RunStatus::IterationLimit;

    std::vector<double> rho_latest;
    while (delta > config_.change_tolerance && iter < config_.max_iterations) {
        ++iter;
        const auto t0 = clock::now();

        Forward f = forward(phi_full, beta, u);
        if (!f.solve_info.converged) {
            result.status = RunStatus::SolverFailure;
            break;
        }
        if (!std::isfinite(f.compliance)) {
            result.status = RunStatus::NumericFailure;
            break;
        }
        if (iter == 1) first_compliance = f.compliance > 0.0 ? f.compliance : 1.0;

        // Sensitivities, all chained back to phi space.
        std::vector<double> dc_dphi = backprop_from_density(
            smooth_map_, compliance_sensitivity_rho(f.rho, u), f.phi_tilde, beta, active_);

        std::vector<std::vector<double>> dg_dphi;
        int ci = 0;
        TraceRecord rec;
        if (config_.local_constraint) {
            for (std::size_t k = 0; k < volume_maps_.size(); ++k) {
                ConstraintValue c = eval_local(f.rho_bar[k], config_.alpha,
                                               config_.aggregation_exponent, active_);
                gval[static_cast<std::size_t>(ci)] = c.value;
                dg_dphi.push_back(backprop_from_local_volume(smooth_map_, volume_maps_[k],
                                                             c.gradient, f.phi_tilde, beta,
                                                             active_));
                if (k == 0) rec.g_local = c.value;
                else rec.g_local_y = c.value;
                ++ci;
            }
        }
        if (config_.alpha_total) {
            ConstraintValue c = eval_total(f.rho, *config_.alpha_total, in_domain_);
            gval[static_cast<std::size_t>(ci)] = c.value;
            dg_dphi.push_back(
                backprop_from_density(smooth_map_, c.gradient, f.phi_tilde, beta, active_));
            rec.g_total = c.value;
            ++ci;
        }

        // Pack the active subset for MMA; compliance scaled by its first
        // value to keep the subproblem well conditioned.
        const double obj_scale = 1.0 / first_compliance;
        for (std::size_t v = 0; v < nd; ++v) {
            const std::size_t e = static_cast<std::size_t>(design_elems_[v]);
            x[v] = phi_full[e];
            df[v] = dc_dphi[e] * obj_scale;
        }
        for (int k = 0; k < num_constraints; ++k) {
            const std::vector<double>& src = dg_dphi[static_cast<std::size_t>(k)];
            for (std::size_t v = 0; v < nd; ++v) {
                dg[static_cast<std::size_t>(k) * nd + v] =
                    src[static_cast<std::size_t>(design_elems_[v])];
            }
        }

        x_prev = x;
        mma.update(x, df, gval, dg);

        delta = 0.0;
        for (std::size_t v = 0; v < nd; ++v) {
            delta = std::max(delta, std::fabs(x[v] - x_prev[v]));
            phi_full[static_cast<std::size_t>(design_elems_[v])] = x[v];
        }

        rec.iteration = iter;
        rec.compliance = f.compliance;
        rec.sharpness = sharpness(f.rho, in_domain_);
        rec.beta = beta;
        rec.delta = delta;
        rec.fem_iterations = f.solve_info.iterations;
        rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        result.trace.push_back(rec);
        rho_latest = std::move(f.rho);
        if (callback) callback(rec, rho_latest);

        // beta continuation: double on schedule or on stagnation until capped.
        if (beta < config_.beta.max &&
            (iter % config_.beta.period == 0 || delta < config_.change_tolerance)) {
            beta = std::min(2.0 * beta, config_.beta.max);
            delta = 1.0;
        }
    }

    if (result.status == RunStatus::IterationLimit && delta <= config_.change_tolerance) {
        result.status = RunStatus::Converged;
    }

    // Final pass phi -> phi_tilde -> rho at the final beta.
    Forward f = forward(phi_full, beta, u);
    result.iterations = iter;
    result.phi = std::move(phi_full);
    result.rho = f.rho;
    result.displacement = u;
    {
        std::vector<double> rb(n, 0.0);
        KernelMap iso(problem_.grid, make_volume_kernel(config_.influence_radius), active_, active_);
        iso.average(f.rho, rb);
        result.rho_bar = std::move(rb);
    }
    return result;
}

RunResult run_optimization(const Problem& problem, const OptimizationConfig& config,
                           const InfillOptimizer::IterationCallback& callback) {
    InfillOptimizer opt(problem, config);
    return opt.run(callback);
}

}  // namespace infill
