#include "infill/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace infill {
namespace {

// Summation order used for all 8-entry element dots. The grouping pairs dofs
// that swap under x- or y-mirroring of the element, so a mirrored problem
// produces bit-identical (sign-flipped) results and symmetric designs stay
// exactly symmetric over long runs.
inline double dot8(const std::array<double, 8>& row, const double* ue) {
    const double t0 = row[0] * ue[0], t1 = row[1] * ue[1], t2 = row[2] * ue[2],
                 t3 = row[3] * ue[3], t4 = row[4] * ue[4], t5 = row[5] * ue[5],
                 t6 = row[6] * ue[6], t7 = row[7] * ue[7];
    return ((t0 + t6) + (t1 + t7)) + ((t2 + t4) + (t3 + t5));
}

inline double dot8(const double* a, const double* b) {
    const double t0 = a[0] * b[0], t1 = a[1] * b[1], t2 = a[2] * b[2], t3 = a[3] * b[3],
                 t4 = a[4] * b[4], t5 = a[5] * b[5], t6 = a[6] * b[6], t7 = a[7] * b[7];
    return ((t0 + t6) + (t1 + t7)) + ((t2 + t4) + (t3 + t5));
}

inline void gather_element(const double* u, int base, int step, double* ue) {
    const int n1 = 2 * base;
    const int n2 = 2 * (base + step);
    const int n3 = 2 * (base + step + 1);
    const int n4 = 2 * (base + 1);
    ue[0] = u[n1];
    ue[1] = u[n1 + 1];
    ue[2] = u[n2];
    ue[3] = u[n2 + 1];
    ue[4] = u[n3];
    ue[5] = u[n3 + 1];
    ue[6] = u[n4];
    ue[7] = u[n4 + 1];
}

}  // namespace

Matrix8 element_stiffness(double nu) {
    if (!(nu > -1.0 && nu < 0.5)) {
        throw std::invalid_argument("Poisson ratio must lie in (-1, 0.5), got " +
                                    std::to_string(nu));
    }
    const double k0 = 0.5 - nu / 6.0;
    const double k1 = 0.125 + nu * 0.125;
    const double k2 = -0.25 - nu / 12.0;
    const double k3 = -0.125 + 3.0 * nu / 8.0;
    const double k4 = -0.25 + nu / 12.0;
    const double k5 = -k1;
    const double k6 = nu / 6.0;
    const double k7 = -k3;
    const double k[8] = {k0, k1, k2, k3, k4, k5, k6, k7};
    static const int pattern[8][8] = {
        {0, 1, 2, 3, 4, 5, 6, 7},
        {1, 0, 7, 6, 5, 4, 3, 2},
        {2, 7, 0, 5, 6, 3, 4, 1},
        {3, 6, 5, 0, 7, 2, 1, 4},
        {4, 5, 6, 7, 0, 1, 2, 3},
        {5, 4, 3, 2, 1, 0, 7, 6},
        {6, 3, 4, 1, 2, 7, 0, 5},
        {7, 2, 1, 4, 3, 6, 5, 0}};
    const double scale = 1.0 / (1.0 - nu * nu);
    Matrix8 m{};
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            m[r][c] = scale * k[pattern[r][c]];
        }
    }
    return m;
}

double young_modulus(double rho, const Material& mat) {
    return mat.Emin + std::pow(rho, mat.gamma) * (mat.E0 - mat.Emin);
}

std::vector<double> interpolate_moduli(std::span<const double> rho, const Material& mat) {
    std::vector<double> E(rho.size());
    for (std::size_t e = 0; e < rho.size(); ++e) E[e] = young_modulus(rho[e], mat);
    return E;
}

void apply_stiffness(const Grid& grid, const Matrix8& k0, std::span<const double> moduli,
                     std::span<const double> u, std::span<double> out) {
    if (u.size() != static_cast<std::size_t>(grid.num_dofs()) || out.size() != u.size()) {
        throw std::invalid_argument("apply_stiffness: dof vector size mismatch");
    }
    const int nx = grid.nx;
    const int ny = grid.ny;
    const int step = ny + 1;
    const double* uptr = u.data();
    const double* E = moduli.data();

    // Two passes per column pair: element products E_e (k0 ue) land in small
    // rolling column buffers (8 rows x ny, L1 resident), then each node sums
    // its four corner contributions in the mirror-invariant order
    // ((SW+NE)+(NW+SE)); absent elements contribute exact zeros.
#pragma omp parallel
    {
        int nthreads = 1, tid = 0;
#ifdef _OPENMP
        nthreads = omp_get_num_threads();
        tid = omp_get_thread_num();
#endif
        const int total = nx + 1;
        const int chunk = (total + nthreads - 1) / nthreads;
        const int lo = std::min(total, tid * chunk);
        const int hi = std::min(total, lo + chunk);

        std::vector<double> col0(8 * static_cast<std::size_t>(ny), 0.0);
        std::vector<double> col1(8 * static_cast<std::size_t>(ny), 0.0);
        double* west = col0.data();
        double* east = col1.data();

        auto fill_column = [&](int i, double* buf) {
            if (i < 0 || i >= nx) {
                std::fill(buf, buf + 8 * static_cast<std::size_t>(ny), 0.0);
                return;
            }
            const double* Ei = E + static_cast<std::size_t>(i) * ny;
            const double* ulo = uptr + 2 * static_cast<std::size_t>(i) * step;
            const double* uhi = uptr + 2 * static_cast<std::size_t>(i + 1) * step;
            for (int j = 0; j < ny; ++j) {
                double ue[8];
                ue[0] = ulo[2 * j];
                ue[1] = ulo[2 * j + 1];
                ue[2] = uhi[2 * j];
                ue[3] = uhi[2 * j + 1];
                ue[4] = uhi[2 * j + 2];
                ue[5] = uhi[2 * j + 3];
                ue[6] = ulo[2 * j + 2];
                ue[7] = ulo[2 * j + 3];
                const double Ee = Ei[j];
                double* v = buf + 8 * static_cast<std::size_t>(j);
                for (int r = 0; r < 8; ++r) v[r] = Ee * dot8(k0[r], ue);
            }
        };

        for (int i = lo; i < hi; ++i) {
            if (i == lo) {
                fill_column(i - 1, west);
            } else {
                std::swap(west, east);
            }
            fill_column(i, east);
            double* column_out = out.data() + 2 * static_cast<std::size_t>(i) * step;
            for (int j = 0; j <= ny; ++j) {
                double cx_sw = 0.0, cy_sw = 0.0, cx_se = 0.0, cy_se = 0.0;
                double cx_nw = 0.0, cy_nw = 0.0, cx_ne = 0.0, cy_ne = 0.0;
                if (j > 0) {
                    const double* w = west + 8 * static_cast<std::size_t>(j - 1);
                    const double* e = east + 8 * static_cast<std::size_t>(j - 1);
                    cx_sw = w[4];  // node is corner n3 of the west-south element
                    cy_sw = w[5];
                    cx_se = e[6];  // corner n4 of the east-south element
                    cy_se = e[7];
                }
                if (j < ny) {
                    const double* w = west + 8 * static_cast<std::size_t>(j);
                    const double* e = east + 8 * static_cast<std::size_t>(j);
                    cx_nw = w[2];  // corner n2 of the west-north element
                    cy_nw = w[3];
                    cx_ne = e[0];  // corner n1 of the east-north element
                    cy_ne = e[1];
                }
                column_out[2 * j] = (cx_sw + cx_ne) + (cx_nw + cx_se);
                column_out[2 * j + 1] = (cy_sw + cy_ne) + (cy_nw + cy_se);
            }
        }
    }
}

void element_energies(const Grid& grid, const Matrix8& k0, std::span<const double> u,
                      std::span<double> out) {
    const int nx = grid.nx;
    const int ny = grid.ny;
    const int step = ny + 1;
    const double* uptr = u.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double ue[8], v[8];
            gather_element(uptr, i * step + j, step, ue);
            // Remove the mean translation first: k0 annihilates it exactly,
            // and without it u^T k0 u cancels catastrophically whenever the
            // element rides on a large rigid displacement. The grouped means
            // keep the centering mirror invariant.
            const double mx = 0.25 * ((ue[0] + ue[6]) + (ue[2] + ue[4]));
            const double my = 0.25 * ((ue[1] + ue[7]) + (ue[3] + ue[5]));
            ue[0] -= mx;
            ue[2] -= mx;
            ue[4] -= mx;
            ue[6] -= mx;
            ue[1] -= my;
            ue[3] -= my;
            ue[5] -= my;
            ue[7] -= my;
            for (int r = 0; r < 8; ++r) v[r] = dot8(k0[r], ue);
            out[i * ny + j] = dot8(ue, v);
        }
    }
}

double stiffness_energy(const Grid& grid, const Matrix8& k0, std::span<const double> moduli,
                        std::span<const double> u) {
    std::vector<double> q(static_cast<std::size_t>(grid.num_elements()));
    element_energies(grid, k0, u, q);
    // Neumaier-compensated sum: the compliance feeds finite-difference
    // gradient checks, where plain accumulation noise would dominate.
    double sum = 0.0, comp = 0.0;
    for (std::size_t e = 0; e < q.size(); ++e) {
        const double term = moduli[e] * q[e];
        const double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

FemSystem::FemSystem(const Grid& grid, const BoundaryConditions& bcs, const Material& mat,
                     double rel_tolerance, int max_iterations)
    : grid_(grid),
      material_(mat),
      k0_(element_stiffness(mat.nu)),
      rel_tolerance_(rel_tolerance),
      max_iterations_(max_iterations) {
    bcs.validate(grid);
    if (bcs.fixed_dofs.size() < 3) {
        throw std::invalid_argument("need at least 3 fixed dofs to remove rigid-body motion");
    }
    fixed_.assign(static_cast<std::size_t>(grid.num_dofs()), 0);
    for (int d : bcs.fixed_dofs) fixed_[static_cast<std::size_t>(d)] = 1;
    load_.assign(static_cast<std::size_t>(grid.num_dofs()), 0.0);
    for (const Load& l : bcs.loads) load_[static_cast<std::size_t>(2 * l.node + l.axis)] += l.magnitude;
    double n2 = 0.0;
    for (double v : load_) n2 += v * v;
    load_norm_ = std::sqrt(n2);
    moduli_.assign(static_cast<std::size_t>(grid.num_elements()), mat.E0);
}

void FemSystem::set_densities(std::span<const double> rho) {
    if (rho.size() != moduli_.size()) throw std::invalid_argument("density field size mismatch");
    for (std::size_t e = 0; e < rho.size(); ++e) moduli_[e] = young_modulus(rho[e], material_);
}

void FemSystem::set_moduli(std::vector<double> moduli) {
    if (moduli.size() != static_cast<std::size_t>(grid_.num_elements())) {
        throw std::invalid_argument("moduli size mismatch");
    }
    moduli_ = std::move(moduli);
}

void FemSystem::apply(std::span<const double> u, std::span<double> out) const {
    apply_stiffness(grid_, k0_, moduli_, u, out);
    for (std::size_t d = 0; d < fixed_.size(); ++d) {
        if (fixed_[d]) out[d] = u[d];
    }
}

void FemSystem::assemble_diagonal(std::vector<double>& diag) const {
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    const double* E = moduli_.data();
    diag.assign(static_cast<std::size_t>(grid_.num_dofs()), 0.0);
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
            double dx_sw = 0.0, dy_sw = 0.0, dx_se = 0.0, dy_se = 0.0;
            double dx_nw = 0.0, dy_nw = 0.0, dx_ne = 0.0, dy_ne = 0.0;
            if (i > 0 && j > 0) {
                const double Ee = E[(i - 1) * ny + (j - 1)];
                dx_sw = Ee * k0_[4][4];
                dy_sw = Ee * k0_[5][5];
            }
            if (i < nx && j > 0) {
                const double Ee = E[i * ny + (j - 1)];
                dx_se = Ee * k0_[6][6];
                dy_se = Ee * k0_[7][7];
            }
            if (i > 0 && j < ny) {
                const double Ee = E[(i - 1) * ny + j];
                dx_nw = Ee * k0_[2][2];
                dy_nw = Ee * k0_[3][3];
            }
            if (i < nx && j < ny) {
                const double Ee = E[i * ny + j];
                dx_ne = Ee * k0_[0][0];
                dy_ne = Ee * k0_[1][1];
            }
            const int dof = 2 * (i * (ny + 1) + j);
            diag[static_cast<std::size_t>(dof)] = (dx_sw + dx_ne) + (dx_nw + dx_se);
            diag[static_cast<std::size_t>(dof) + 1] = (dy_sw + dy_ne) + (dy_nw + dy_se);
        }
    }
    for (std::size_t d = 0; d < fixed_.size(); ++d) {
        if (fixed_[d]) diag[d] = 1.0;
    }
}

SolveInfo FemSystem::solve(std::vector<double>& u) const {
    const std::size_t n = static_cast<std::size_t>(grid_.num_dofs());
    if (u.size() != n) u.assign(n, 0.0);
    SolveInfo info;
    if (load_norm_ == 0.0) {
        u.assign(n, 0.0);
        info.converged = true;
        return info;
    }
    for (std::size_t d = 0; d < n; ++d) {
        if (fixed_[d]) u[d] = 0.0;
    }

    std::vector<double> diag;
    assemble_diagonal(diag);
    std::vector<double> invdiag(n);
    for (std::size_t d = 0; d < n; ++d) invdiag[d] = 1.0 / diag[d];

    std::vector<double> r(n), p(n), Ap(n);
    apply(u, Ap);
    double rr = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        r[d] = load_[d] - Ap[d];
        rr += r[d] * r[d];
    }

    double rnorm = std::sqrt(rr);
    const double target = rel_tolerance_ * load_norm_;
    if (rnorm <= target) {
        info.converged = true;
        info.rel_residual = rnorm / load_norm_;
        return info;
    }

    double rz = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        p[d] = r[d] * invdiag[d];
        rz += r[d] * p[d];
    }

    int it = 0;
    while (it < max_iterations_) {
        ++it;
        apply(p, Ap);
        double pAp = 0.0;
        for (std::size_t d = 0; d < n; ++d) pAp += p[d] * Ap[d];
        if (!(pAp > 0.0)) break;  // lost positive definiteness, bail out
        const double alpha = rz / pAp;
        rr = 0.0;
        double rz_new = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            u[d] += alpha * p[d];
            const double rd = r[d] - alpha * Ap[d];
            r[d] = rd;
            rr += rd * rd;
            rz_new += rd * rd * invdiag[d];
        }
        rnorm = std::sqrt(rr);
        if (rnorm <= target) break;
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t d = 0; d < n; ++d) p[d] = r[d] * invdiag[d] + beta * p[d];
    }
    info.iterations = it;
    info.rel_residual = rnorm / load_norm_;
    info.converged = rnorm <= target;
    return info;
}

SolveInfo FemSystem::solve_or_throw(std::vector<double>& u) const {
    SolveInfo info = solve(u);
    if (!info.converged) {
        throw std::runtime_error("PCG did not converge in " + std::to_string(info.iterations) +
                                 " iterations, relative residual " +
                                 std::to_string(info.rel_residual));
    }
    return info;
}

double FemSystem::compliance(std::span<const double> u) const {
    // Variational form f^T u - 1/2 u^T K u: identical to 1/2 u^T K u at the
    // solution of Ku = f, but the error is quadratic in the solver residual
    // instead of linear, which keeps finite-difference gradient checks clean.
    double fu = 0.0;
    for (std::size_t d = 0; d < load_.size(); ++d) fu += load_[d] * u[d];
    return fu - 0.5 * stiffness_energy(grid_, k0_, moduli_, u);
}

StressField element_stress(const Grid& grid, std::span<const double> u,
                           std::span<const double> rho, const Material& mat) {
    const int nx = grid.nx;
    const int ny = grid.ny;
    const int step = ny + 1;
    const std::size_t n = static_cast<std::size_t>(grid.num_elements());
    StressField s;
    s.sxx.resize(n);
    s.syy.resize(n);
    s.sxy.resize(n);
    s.principal_1.resize(n);
    s.principal_2.resize(n);
    s.angle.resize(n);
    s.von_mises.resize(n);

    const double nu = mat.nu;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double ue[8];
            gather_element(u.data(), i * step + j, step, ue);
            // Centroid strains of the bilinear quad (shape derivatives +-1/2).
            const double exx = 0.5 * ((ue[2] - ue[0]) + (ue[4] - ue[6]));
            const double eyy = 0.5 * ((ue[7] - ue[1]) + (ue[5] - ue[3]));
            const double gxy = 0.5 * ((ue[6] - ue[0]) + (ue[4] - ue[2])) +
                               0.5 * ((ue[3] - ue[1]) + (ue[5] - ue[7]));
            const std::size_t e = static_cast<std::size_t>(i * ny + j);
            const double Ee = young_modulus(rho[e], mat);
            const double c = Ee / (1.0 - nu * nu);
            const double sxx = c * (exx + nu * eyy);
            const double syy = c * (nu * exx + eyy);
            const double sxy = c * 0.5 * (1.0 - nu) * gxy;
            s.sxx[e] = sxx;
            s.syy[e] = syy;
            s.sxy[e] = sxy;
            const double mean = 0.5 * (sxx + syy);
            const double radius = std::hypot(0.5 * (sxx - syy), sxy);
            s.principal_1[e] = mean + radius;
            s.principal_2[e] = mean - radius;
            s.angle[e] = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
            s.von_mises[e] = std::sqrt(sxx * sxx - sxx * syy + syy * syy + 3.0 * sxy * sxy);
        }
    }
    return s;
}

}  // namespace infill
