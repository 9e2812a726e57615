// Acceptance suite: exercises the published behavior end to end and prints
// one PASS/FAIL line per criterion. Heavy optimization runs are shared
// between criteria. Run with --only k[,k...] to restrict, --work-dir DIR for
// file outputs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "infill/analysis.hpp"
#include "infill/config.hpp"
#include "infill/constraints.hpp"
#include "infill/io.hpp"
#include "infill/optimizer.hpp"

using namespace infill;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Outcome> outcomes;

void report(int id, bool pass, const std::string& detail) {
    outcomes.push_back({id, pass, detail});
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

Problem cantilever(int nx, int ny) {
    Problem p;
    p.grid = build_grid(nx, ny);
    p.domain = DomainMask::all_inside(p.grid);
    p.passive = PassiveMask::none(p.grid);
    for (int j = 0; j <= ny; ++j) p.bcs.add_fixed_node(p.grid, 0, j, true, true);
    p.bcs.loads.push_back({p.grid.node_index(nx, ny / 2), 1, -1.0});
    p.bcs.normalize();
    return p;
}

Problem half_mbb(int nx, int ny) {
    Problem p;
    p.grid = build_grid(nx, ny);
    p.domain = DomainMask::all_inside(p.grid);
    p.passive = PassiveMask::none(p.grid);
    for (int j = 0; j <= ny; ++j) p.bcs.add_fixed_node(p.grid, 0, j, true, false);
    p.bcs.add_fixed_node(p.grid, nx, 0, false, true);
    p.bcs.loads.push_back({p.grid.node_index(0, ny), 1, -1.0});
    p.bcs.normalize();
    return p;
}

OptimizationConfig paper_defaults() {
    OptimizationConfig cfg;  // alpha 0.6, R 6, r 2, p 16, beta 1->512/40, eps 0.01
    return cfg;
}

double mean_density(const Problem& p, const std::vector<double>& rho) {
    double sum = 0.0;
    long long n = 0;
    for (std::size_t e = 0; e < rho.size(); ++e) {
        if (p.domain.inside[e]) {
            sum += rho[e];
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

struct TimedRun {
    RunResult result;
    double seconds = 0.0;
};

TimedRun timed_run(const char* label, const Problem& p, const OptimizationConfig& cfg) {
    std::fprintf(stderr, "[acceptance] optimizing %s ...\n", label);
    const auto t0 = std::chrono::steady_clock::now();
    TimedRun out;
    out.result = run_optimization(p, cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "[acceptance] %s: %d iterations, c = %.6g, %.1f s\n", label,
                 out.result.iterations,
                 out.result.trace.empty() ? 0.0 : out.result.trace.back().compliance, out.seconds);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// trace CSV with the wall-clock column removed: the seconds column is the one
// inherently nondeterministic field in the schema
std::string strip_seconds_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        out << (comma == std::string::npos ? line : line.substr(0, comma)) << "\n";
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    std::string work_dir = "acceptance_work";
    std::vector<int> only;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--work-dir") == 0 && a + 1 < argc) {
            work_dir = argv[++a];
        } else if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
            std::istringstream ss(argv[++a]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.push_back(std::stoi(tok));
        }
    }
    fs::create_directories(work_dir);
    auto enabled = [&](int id) {
        return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
    };

    const bool need_fig2 = enabled(1) || enabled(2) || enabled(3) || enabled(8);

    // ---- shared heavy runs -------------------------------------------------
    TimedRun fig2_local, fig2_total;
    if (need_fig2) {
        const Problem p = cantilever(400, 200);
        fig2_local = timed_run("fig2 local 400x200", p, paper_defaults());

        if (enabled(1)) {
            OptimizationConfig total = paper_defaults();
            total.local_constraint = false;
            total.alpha_total = 0.56;
            fig2_total = timed_run("fig2 total 400x200", p, total);
        }
    }

    // criterion 1: Fig. 2 reproduction -----------------------------------
    if (enabled(1)) {
        const double c_local = fig2_local.result.trace.back().compliance;
        const double c_total = fig2_total.result.trace.back().compliance;
        const double ratio = c_local / c_total;
        const bool local_ok = c_local >= 0.85 * 76.86 && c_local <= 1.15 * 76.86;
        const bool total_ok = c_total >= 0.85 * 57.13 && c_total <= 1.15 * 57.13;
        const bool ratio_ok = ratio >= 1.15 && ratio <= 1.55;
        const bool time_ok = fig2_local.seconds <= 900.0;
        report(1, local_ok && total_ok && ratio_ok && time_ok,
               "c_local = " + fmt("%.2f", c_local) + " (76.86 +/- 15%), c_total = " +
                   fmt("%.2f", c_total) + " (57.13 +/- 15%), ratio = " + fmt("%.3f", ratio) +
                   " in [1.15, 1.55], local run " + fmt("%.0f", fig2_local.seconds) +
                   " s <= 900 s");
    }

    // criterion 2: local volume limit honored at convergence --------------
    if (enabled(2)) {
        const Problem p = cantilever(400, 200);
        const auto active = active_mask(p.grid, p.domain, p.passive);
        long long n = 0, within = 0;
        for (std::size_t e = 0; e < fig2_local.result.rho_bar.size(); ++e) {
            if (!active[e]) continue;
            ++n;
            if (fig2_local.result.rho_bar[e] <= 0.6 + 0.02) ++within;
        }
        const double frac = static_cast<double>(within) / static_cast<double>(n);
        const ConstraintValue g = eval_local(fig2_local.result.rho_bar, 0.6, 16.0, active);
        report(2, frac >= 0.95 && g.value <= 1e-3,
               fmt("%.2f", 100.0 * frac) + "% of active elements have rho_bar <= 0.62 (need >= 95%), aggregated g = " +
                   fmt("%.3e", g.value) + " <= 1e-3");
    }

    // criterion 3: total volume control ------------------------------------
    if (enabled(3)) {
        const Problem p400 = cantilever(400, 200);
        const double rho_avg = mean_density(p400, fig2_local.result.rho);
        const bool implicit_ok = rho_avg >= 0.52 && rho_avg <= 0.60;

        // the alpha_total trend is resolution independent; run it at 160x80
        const Problem p = cantilever(160, 80);
        OptimizationConfig base = paper_defaults();
        TimedRun local_only = timed_run("c3 local-only 160x80", p, base);
        OptimizationConfig with_05 = base;
        with_05.alpha_total = 0.5;
        TimedRun run_05 = timed_run("c3 alpha_total 0.5", p, with_05);
        OptimizationConfig with_04 = base;
        with_04.alpha_total = 0.4;
        TimedRun run_04 = timed_run("c3 alpha_total 0.4", p, with_04);

        const double v05 = mean_density(p, run_05.result.rho);
        const double v04 = mean_density(p, run_04.result.rho);
        const double c_base = local_only.result.trace.back().compliance;
        const double c_05 = run_05.result.trace.back().compliance;
        const double c_04 = run_04.result.trace.back().compliance;
        const bool limits_ok = std::fabs(v05 - 0.5) <= 1e-3 && std::fabs(v04 - 0.4) <= 1e-3;
        const bool trend_ok = c_base < c_05 && c_05 < c_04;
        report(3, implicit_ok && limits_ok && trend_ok,
               "rho_avg(400x200, alpha 0.6) = " + fmt("%.3f", rho_avg) +
                   " in [0.52, 0.60]; 160x80 volumes " + fmt("%.4f", v05) + "/" + fmt("%.4f", v04) +
                   " within 1e-3 of 0.5/0.4; compliance " + fmt("%.1f", c_base) + " < " +
                   fmt("%.1f", c_05) + " < " + fmt("%.1f", c_04));
    }

    // criteria 4 + 5 share matched-volume design pairs ----------------------
    if (enabled(4)) {
        const Problem p = half_mbb(200, 100);
        OptimizationConfig local_cfg = paper_defaults();
        local_cfg.alpha = 0.4;
        TimedRun local_run = timed_run("c4 half-MBB local alpha 0.4", p, local_cfg);
        const double matched = mean_density(p, local_run.result.rho);

        OptimizationConfig total_cfg = paper_defaults();
        total_cfg.local_constraint = false;
        total_cfg.alpha_total = matched;
        TimedRun total_run = timed_run("c4 half-MBB total matched", p, total_cfg);

        // damage sweep: 2R square, x-centered, relocated vertically (the
        // exact spot is unpublished, so the worst case over the sweep is used)
        const int size = 12;
        const int ai = (p.grid.nx - size) / 2;
        auto sweep = [&](const std::vector<double>& rho) {
            Analyzer a(p, rho, 1e-6, 60000);
            std::vector<DamageCase> cases;
            for (int j = p.grid.ny - size; j >= 0; j -= size) {
                cases.push_back(a.damage({ai, j, size}));
            }
            return cases;
        };
        const auto local_cases = sweep(local_run.result.rho);
        const auto total_cases = sweep(total_run.result.rho);
        const double f_local = summarize_ratios(local_cases).worst_value;
        const double f_total = summarize_ratios(total_cases).worst_value;
        bool solver_ok = true;
        for (const auto& c : local_cases) solver_ok = solver_ok && c.after_info.converged;
        for (const auto& c : total_cases) solver_ok = solver_ok && c.after_info.converged;
        report(4,
               solver_ok && f_local >= 1.2 && f_local <= 2.0 && f_total >= 8.0 &&
                   f_local < f_total,
               "worst damage factor: local = " + fmt("%.2f", f_local) +
                   " in [1.2, 2.0], total = " + fmt("%.2f", f_total) +
                   " >= 8, matched volume " + fmt("%.3f", matched) +
                   (solver_ok ? "" : " [solver failures]"));
    }

    if (enabled(5)) {
        // rotating the half-MBB load would push it onto its own symmetry
        // plane, so the rotation experiment runs on the documented cantilever
        // benchmark at the same scale
        const Problem p = cantilever(200, 100);
        OptimizationConfig local_cfg = paper_defaults();
        local_cfg.alpha = 0.5;
        TimedRun local_run = timed_run("c5 cantilever local alpha 0.5", p, local_cfg);
        const double matched = mean_density(p, local_run.result.rho);

        OptimizationConfig total_cfg = paper_defaults();
        total_cfg.local_constraint = false;
        total_cfg.alpha_total = matched;
        TimedRun total_run = timed_run("c5 cantilever total matched", p, total_cfg);

        std::vector<double> angles;
        for (int deg = -90; deg <= 90; deg += 15) {
            angles.push_back(deg * 3.14159265358979323846 / 180.0);
        }
        const auto local_cases = force_rotation_sweep(p, local_run.result.rho, angles, 1e-6, 60000);
        const auto total_cases = force_rotation_sweep(p, total_run.result.rho, angles, 1e-6, 60000);
        const std::size_t zero = angles.size() / 2;   // angle 0
        const std::size_t pos90 = angles.size() - 1;  // +90 deg

        auto valley = [&](const std::vector<RotationCase>& cases) {
            std::size_t arg = 0;
            double worst = 0.0;
            for (std::size_t k = 0; k < cases.size(); ++k) {
                if (cases[k].compliance < cases[arg].compliance) arg = k;
                worst = std::max(worst, cases[k].compliance);
            }
            // minimum at or next to the design angle, maxima at the rim
            const bool min_near_zero = arg + 1 >= zero && arg <= zero + 1;
            const double rim = std::max(cases.front().compliance, cases.back().compliance);
            return min_near_zero && rim >= 0.95 * worst;
        };
        const bool cross_at_0 = total_cases[zero].compliance < local_cases[zero].compliance;
        const bool cross_at_90 = local_cases[pos90].compliance < total_cases[pos90].compliance;
        const bool valleys = valley(local_cases) && valley(total_cases);
        report(5, cross_at_0 && cross_at_90 && valleys,
               "c(0): total " + fmt("%.1f", total_cases[zero].compliance) + " < local " +
                   fmt("%.1f", local_cases[zero].compliance) + "; c(90): local " +
                   fmt("%.1f", local_cases[pos90].compliance) + " < total " +
                   fmt("%.1f", total_cases[pos90].compliance) +
                   (valleys ? "; both curves valley-shaped" : "; valley shape violated"));
    }

    // criterion 6: gradient suite ------------------------------------------
    if (enabled(6)) {
        const auto t0 = std::chrono::steady_clock::now();
        const Problem p = cantilever(10, 6);
        OptimizationConfig cfg = paper_defaults();
        cfg.alpha = 0.6;
        cfg.alpha_total = 0.55;
        cfg.influence_radius = 3.0;
        cfg.filter_radius = 1.5;
        cfg.solver_tolerance = 1e-12;
        cfg.solver_max_iterations = 100000;
        InfillOptimizer opt(p, cfg);
        const auto active = active_mask(p.grid, p.domain, p.passive);

        std::mt19937 rng(2026);
        double worst = 0.0;
        const double h = 1e-6;
        for (int instance = 0; instance < 20; ++instance) {
            std::vector<double> phi(static_cast<std::size_t>(p.grid.num_elements()));
            for (auto& v : phi) v = 0.1 + 0.8 * (static_cast<double>(rng()) / 4294967296.0);
            const double beta = (instance % 2 == 0) ? 1.0 : 8.0;
            const GradientProbe probe = opt.evaluate(phi, beta);
            for (int e = 0; e < p.grid.num_elements(); ++e) {
                if (!active[static_cast<std::size_t>(e)]) continue;
                std::vector<double> plus = phi, minus = phi;
                plus[static_cast<std::size_t>(e)] += h;
                minus[static_cast<std::size_t>(e)] -= h;
                const GradientProbe pp = opt.evaluate(plus, beta);
                const GradientProbe pm = opt.evaluate(minus, beta);
                auto rel = [&](double fd, double an) {
                    if (std::fabs(fd) < 1e-12 && std::fabs(an) < 1e-12) return 0.0;
                    return std::fabs(fd - an) / std::max(std::fabs(fd), std::fabs(an));
                };
                worst = std::max(worst, rel((pp.compliance - pm.compliance) / (2.0 * h),
                                            probe.compliance_gradient[static_cast<std::size_t>(e)]));
                for (std::size_t k = 0; k < probe.constraint_values.size(); ++k) {
                    worst = std::max(worst,
                                     rel((pp.constraint_values[k] - pm.constraint_values[k]) /
                                             (2.0 * h),
                                         probe.constraint_gradients[k][static_cast<std::size_t>(e)]));
                }
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report(6, worst < 1e-4 && secs <= 60.0,
               "20 instances 10x6, beta in {1,8}: max relative gradient error = " +
                   fmt("%.3e", worst) + " < 1e-4, " + fmt("%.1f", secs) + " s <= 60 s");
    }

    // criterion 7: oracle equivalence ----------------------------------------
    if (enabled(7)) {
        // matrix-free PCG against a dense direct solve (Gaussian elimination
        // written here, no shared code with the library path)
        bool fem_ok = true;
        double worst_rel = 0.0;
        std::mt19937 rng(7);
        for (int trial = 0; trial < 3; ++trial) {
            const int nx = 8 + 2 * trial;
            const int ny = std::min(12, 6 + 2 * trial);
            const Problem p = cantilever(std::min(12, nx), ny);
            FemSystem fem(p.grid, p.bcs, p.material, 1e-10, 100000);
            std::vector<double> rho(static_cast<std::size_t>(p.grid.num_elements()));
            for (auto& v : rho) v = static_cast<double>(rng()) / 4294967296.0;
            fem.set_densities(rho);
            std::vector<double> u;
            fem_ok = fem_ok && fem.solve(u).converged;

            const int n = p.grid.num_dofs();
            std::vector<double> K(static_cast<std::size_t>(n) * n, 0.0);
            const Matrix8 k0 = element_stiffness(p.material.nu);
            for (int i = 0; i < p.grid.nx; ++i) {
                for (int j = 0; j < p.grid.ny; ++j) {
                    const auto nodes = p.grid.elem_nodes(i, j);
                    int dofs[8];
                    for (int a2 = 0; a2 < 4; ++a2) {
                        dofs[2 * a2] = 2 * nodes[static_cast<std::size_t>(a2)];
                        dofs[2 * a2 + 1] = 2 * nodes[static_cast<std::size_t>(a2)] + 1;
                    }
                    const double E = fem.moduli()[static_cast<std::size_t>(p.grid.elem_index(i, j))];
                    for (int r = 0; r < 8; ++r) {
                        for (int c = 0; c < 8; ++c) {
                            K[static_cast<std::size_t>(dofs[r]) * n + dofs[c]] += E * k0[r][c];
                        }
                    }
                }
            }
            std::vector<double> b(static_cast<std::size_t>(n), 0.0);
            for (const Load& l : p.bcs.loads) b[static_cast<std::size_t>(2 * l.node + l.axis)] = l.magnitude;
            for (int d : p.bcs.fixed_dofs) {
                for (int c = 0; c < n; ++c) {
                    K[static_cast<std::size_t>(d) * n + c] = 0.0;
                    K[static_cast<std::size_t>(c) * n + d] = 0.0;
                }
                K[static_cast<std::size_t>(d) * n + d] = 1.0;
                b[static_cast<std::size_t>(d)] = 0.0;
            }
            // plain Gaussian elimination with partial pivoting
            std::vector<int> perm(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) perm[static_cast<std::size_t>(r)] = r;
            for (int col = 0; col < n; ++col) {
                int piv = col;
                for (int r = col + 1; r < n; ++r) {
                    if (std::fabs(K[static_cast<std::size_t>(r) * n + col]) >
                        std::fabs(K[static_cast<std::size_t>(piv) * n + col]))
                        piv = r;
                }
                if (piv != col) {
                    for (int c = 0; c < n; ++c) {
                        std::swap(K[static_cast<std::size_t>(piv) * n + c],
                                  K[static_cast<std::size_t>(col) * n + c]);
                    }
                    std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
                }
                const double d = K[static_cast<std::size_t>(col) * n + col];
                for (int r = col + 1; r < n; ++r) {
                    const double f = K[static_cast<std::size_t>(r) * n + col] / d;
                    if (f == 0.0) continue;
                    for (int c = col; c < n; ++c) {
                        K[static_cast<std::size_t>(r) * n + c] -=
                            f * K[static_cast<std::size_t>(col) * n + c];
                    }
                    b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
                }
            }
            std::vector<double> uref(static_cast<std::size_t>(n));
            for (int r = n - 1; r >= 0; --r) {
                double s = b[static_cast<std::size_t>(r)];
                for (int c = r + 1; c < n; ++c) {
                    s -= K[static_cast<std::size_t>(r) * n + c] * uref[static_cast<std::size_t>(c)];
                }
                uref[static_cast<std::size_t>(r)] = s / K[static_cast<std::size_t>(r) * n + r];
            }
            double num = 0.0, den = 0.0;
            for (int d = 0; d < n; ++d) {
                num += (u[static_cast<std::size_t>(d)] - uref[static_cast<std::size_t>(d)]) *
                       (u[static_cast<std::size_t>(d)] - uref[static_cast<std::size_t>(d)]);
                den += uref[static_cast<std::size_t>(d)] * uref[static_cast<std::size_t>(d)];
            }
            worst_rel = std::max(worst_rel, std::sqrt(num / den));
        }
        fem_ok = fem_ok && worst_rel < 1e-7;

        // p-norm constraint against a 30-digit decimal evaluation
        double worst_pnorm = 0.0;
        for (int n_el : {10, 50, 100}) {
            std::vector<double> rb(static_cast<std::size_t>(n_el));
            for (auto& v : rb) v = static_cast<double>(rng()) / 4294967296.0;
            std::vector<std::uint8_t> mask(rb.size(), 1);
            const double g = eval_local(rb, 0.6, 16.0, mask).value;
            using big = boost::multiprecision::cpp_bin_float_50;
            big sum = 0;
            for (double v : rb) sum += boost::multiprecision::pow(big(v), big(16));
            const big ref =
                boost::multiprecision::pow(sum / big(n_el), big(1) / big(16)) / big(0.6) - big(1);
            worst_pnorm = std::max(worst_pnorm, std::fabs(g - static_cast<double>(ref)));
        }
        report(7, fem_ok && worst_pnorm < 1e-12,
               "PCG vs dense solve: rel error " + fmt("%.3e", worst_rel) +
                   " < 1e-7; p-norm vs extended precision: " + fmt("%.3e", worst_pnorm) +
                   " < 1e-12");
    }

    // criterion 8: convergence and sharpness ---------------------------------
    if (enabled(8)) {
        const auto& trace = fig2_local.result.trace;
        const double final_sharpness = trace.back().sharpness;
        bool schedule_ok = true;
        for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
            const bool trigger = (trace[i].iteration % 40 == 0 || trace[i].delta < 0.01) &&
                                 trace[i].beta < 512.0;
            const double expected = trigger ? std::min(2.0 * trace[i].beta, 512.0) : trace[i].beta;
            if (trace[i + 1].beta != expected) schedule_ok = false;
        }
        bool plateau_ok = trace.size() > 40;
        double plateau_change = 0.0;
        if (plateau_ok) {
            const double c_end = trace.back().compliance;
            const double c_prev = trace[trace.size() - 41].compliance;
            plateau_change = std::fabs(c_end - c_prev) / c_prev;
            plateau_ok = plateau_change <= 0.02;
        }
        report(8, final_sharpness <= 0.05 && schedule_ok && plateau_ok,
               "final sharpness = " + fmt("%.4f", final_sharpness) +
                   " <= 0.05; beta doublings " + (schedule_ok ? "on schedule" : "OFF SCHEDULE") +
                   "; compliance plateau over last 40 iterations: " +
                   fmt("%.2f", 100.0 * plateau_change) + "% <= 2%");
    }

    // criterion 9: wall bound and feature-size trend --------------------------
    if (enabled(9)) {
        const WallBoundReport rep = wall_bound(0.5, 6.0, 3.0);
        const bool formula_ok = std::fabs(rep.ratio - 0.6875) < 1e-12;

        const Problem p = cantilever(160, 80);
        OptimizationConfig r2 = paper_defaults();
        r2.alpha = 0.5;
        r2.filter_radius = 2.0;
        TimedRun run_r2 = timed_run("c9 r = 2", p, r2);
        OptimizationConfig r3 = r2;
        r3.filter_radius = 3.0;
        TimedRun run_r3 = timed_run("c9 r = 3", p, r3);

        const double c2 = run_r2.result.trace.back().compliance;
        const double c3 = run_r3.result.trace.back().compliance;
        double max_diff = 0.0;
        for (std::size_t e = 0; e < run_r2.result.rho.size(); ++e) {
            max_diff = std::max(max_diff, std::fabs(run_r2.result.rho[e] - run_r3.result.rho[e]));
        }
        const bool designs_differ = max_diff > 0.5;
        const bool stiffness_ok = c3 <= 1.25 * c2;
        report(9, formula_ok && designs_differ && stiffness_ok,
               "wall bound(r = R/2) = " + fmt("%.10f", rep.ratio) +
                   " == 0.6875; r 2->3: compliance " + fmt("%.1f", c2) + " -> " + fmt("%.1f", c3) +
                   " (" + fmt("%+.1f", 100.0 * (c3 / c2 - 1.0)) + "% <= +25%), designs differ (max |drho| = " +
                   fmt("%.2f", max_diff) + ")");
    }

    // criterion 10: determinism ----------------------------------------------
    if (enabled(10)) {
        const Problem p = cantilever(80, 40);
        OptimizationConfig cfg = paper_defaults();
        cfg.max_iterations = 80;

        auto emit = [&](const RunResult& res, const std::string& tag) {
            const std::string base = work_dir + "/det_" + tag;
            io::write_trace_csv(res.trace, base + "_trace.csv");
            io::write_density_pgm(p.grid, res.rho, base + ".pgm");
            io::write_density_f64(p.grid, res.rho, base + ".f64");
            return base;
        };
        const RunResult a = run_optimization(p, cfg);
        const RunResult b = run_optimization(p, cfg);
        const std::string base_a = emit(a, "a");
        const std::string base_b = emit(b, "b");

        const bool pgm_same = slurp(base_a + ".pgm") == slurp(base_b + ".pgm");
        const bool f64_same = slurp(base_a + ".f64") == slurp(base_b + ".f64");
        const std::string trace_a = slurp(base_a + "_trace.csv");
        const std::string trace_b = slurp(base_b + "_trace.csv");
        const bool trace_same = strip_seconds_column(trace_a) == strip_seconds_column(trace_b);
        report(10, pgm_same && f64_same && trace_same,
               std::string("two identical runs: density image ") +
                   (pgm_same ? "byte-identical" : "DIFFERS") + ", f64 dump " +
                   (f64_same ? "byte-identical" : "DIFFERS") + ", trace CSV " +
                   (trace_same ? "byte-identical (wall-clock column excluded)" : "DIFFERS"));
    }

    int failed = 0;
    for (const Outcome& o : outcomes) failed += o.pass ? 0 : 1;
    std::printf("%zu criteria run, %d failed\n", outcomes.size(), failed);
    return failed == 0 ? 0 : 1;
}
