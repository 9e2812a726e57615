#include "infill/mma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace infill {
namespace {

// Gaussian elimination with partial pivoting for the tiny (m x m) dual Newton
// systems. A is row-major and overwritten.
bool solve_small(std::vector<double>& A, std::vector<double>& b, int m) {
    for (int col = 0; col < m; ++col) {
        int piv = col;
        double best = std::fabs(A[static_cast<std::size_t>(col) * m + col]);
        for (int r = col + 1; r < m; ++r) {
            const double v = std::fabs(A[static_cast<std::size_t>(r) * m + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return false;
        if (piv != col) {
            for (int c = 0; c < m; ++c) {
                std::swap(A[static_cast<std::size_t>(piv) * m + c],
                          A[static_cast<std::size_t>(col) * m + c]);
            }
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        const double d = A[static_cast<std::size_t>(col) * m + col];
        for (int r = col + 1; r < m; ++r) {
            const double f = A[static_cast<std::size_t>(r) * m + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < m; ++c) {
                A[static_cast<std::size_t>(r) * m + c] -= f * A[static_cast<std::size_t>(col) * m + c];
            }
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < m; ++c) {
            s -= A[static_cast<std::size_t>(r) * m + c] * b[static_cast<std::size_t>(c)];
        }
        b[static_cast<std::size_t>(r)] = s / A[static_cast<std::size_t>(r) * m + r];
    }
    return true;
}

}  // namespace

MmaSolver::MmaSolver(int num_vars, int num_constraints, MmaOptions options)
    : n_(num_vars), m_(num_constraints), options_(options) {
    if (n_ < 1) throw std::invalid_argument("MMA needs at least one variable");
    if (m_ < 1) throw std::invalid_argument("MMA needs at least one constraint");
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t m = static_cast<std::size_t>(m_);
    low_.assign(n, options_.xmin);
    upp_.assign(n, options_.xmax);
    xold1_.assign(n, 0.0);
    xold2_.assign(n, 0.0);
    lambda_.assign(m, 1.0);
    p0_.resize(n);
    q0_.resize(n);
    pk_.resize(n * m);
    qk_.resize(n * m);
    alfa_.resize(n);
    beta_.resize(n);
    b_.resize(m);
}

void MmaSolver::update(std::span<double> x, std::span<const double> df0,
                       std::span<const double> g, std::span<const double> dg) {
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t m = static_cast<std::size_t>(m_);
    if (x.size() != n || df0.size() != n || g.size() != m || dg.size() != n * m) {
        throw std::invalid_argument("MMA update: size mismatch");
    }
    for (double v : df0) {
        if (!std::isfinite(v)) throw std::invalid_argument("MMA update: non-finite objective gradient");
    }
    for (double v : g) {
        if (!std::isfinite(v)) throw std::invalid_argument("MMA update: non-finite constraint value");
    }
    for (double v : dg) {
        if (!std::isfinite(v)) throw std::invalid_argument("MMA update: non-finite constraint gradient");
    }

    ++iter_;
    const double range = options_.xmax - options_.xmin;

    // Asymptote adaptation.
    if (iter_ <= 2) {
        for (std::size_t j = 0; j < n; ++j) {
            low_[j] = x[j] - options_.asym_init * range;
            upp_[j] = x[j] + options_.asym_init * range;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double trend = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
            double fac = 1.0;
            if (trend > 0.0) fac = options_.asym_incr;
            else if (trend < 0.0) fac = options_.asym_decr;
            double lo = x[j] - fac * (xold1_[j] - low_[j]);
            double up = x[j] + fac * (upp_[j] - xold1_[j]);
            lo = std::clamp(lo, x[j] - 10.0 * range, x[j] - 0.01 * range);
            up = std::clamp(up, x[j] + 0.01 * range, x[j] + 10.0 * range);
            low_[j] = lo;
            upp_[j] = up;
        }
    }

    // Objective scale; the raa0 floor rides on it so a rescaled objective
    // yields the same subproblem solution.
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(df0[j]));
    const double inv_scale = scale > 0.0 ? 1.0 / scale : 1.0;
    const double raa = options_.raa0 / range;

    for (std::size_t j = 0; j < n; ++j) {
        const double uxj = upp_[j] - x[j];
        const double xlj = x[j] - low_[j];
        alfa_[j] = std::max({options_.xmin, low_[j] + options_.albefa * xlj,
                             x[j] - options_.move_limit * range});
        beta_[j] = std::min({options_.xmax, upp_[j] - options_.albefa * uxj,
                             x[j] + options_.move_limit * range});

        const double df = df0[j] * inv_scale;
        const double dfp = std::max(df, 0.0);
        const double dfm = std::max(-df, 0.0);
        p0_[j] = (1.001 * dfp + 0.001 * dfm + raa) * uxj * uxj;
        q0_[j] = (0.001 * dfp + 1.001 * dfm + raa) * xlj * xlj;
    }

    for (std::size_t k = 0; k < m; ++k) {
        double bk = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double uxj = upp_[j] - x[j];
            const double xlj = x[j] - low_[j];
            const double d = dg[k * n + j];
            const double dp = std::max(d, 0.0);
            const double dm = std::max(-d, 0.0);
            const double mixed = 0.001 * (dp + dm) + raa;
            const double pkj = (dp + mixed) * uxj * uxj;
            const double qkj = (dm + mixed) * xlj * xlj;
            pk_[k * n + j] = pkj;
            qk_[k * n + j] = qkj;
            bk += pkj / uxj + qkj / xlj;
        }
        b_[k] = bk - g[k];
    }

    xold2_ = xold1_;
    std::copy(x.begin(), x.end(), xold1_.begin());

    solve_dual(x);
}

void MmaSolver::eval_x_of_lambda(std::span<double> x) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t m = static_cast<std::size_t>(m_);
    for (std::size_t j = 0; j < n; ++j) {
        double pl = p0_[j];
        double ql = q0_[j];
        for (std::size_t k = 0; k < m; ++k) {
            pl += lambda_[k] * pk_[k * n + j];
            ql += lambda_[k] * qk_[k * n + j];
        }
        const double sp = std::sqrt(pl);
        const double sq = std::sqrt(ql);
        double xj = (low_[j] * sp + upp_[j] * sq) / (sp + sq);
        x[j] = std::clamp(xj, alfa_[j], beta_[j]);
    }
}

void MmaSolver::solve_dual(std::span<double> x) {
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t m = static_cast<std::size_t>(m_);
    std::fill(lambda_.begin(), lambda_.end(), 1.0);

    std::vector<double> grad(m), hess(m * m), step(m);
    std::vector<double> plam(n), qlam(n);

    auto eval_grad_hess = [&](bool with_hess) {
        eval_x_of_lambda(x);
        for (std::size_t j = 0; j < n; ++j) {
            plam[j] = p0_[j];
            qlam[j] = q0_[j];
            for (std::size_t k = 0; k < m; ++k) {
                plam[j] += lambda_[k] * pk_[k * n + j];
                qlam[j] += lambda_[k] * qk_[k * n + j];
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            double gk = -b_[k];
            for (std::size_t j = 0; j < n; ++j) {
                const double ux = upp_[j] - x[j];
                const double xl = x[j] - low_[j];
                gk += pk_[k * n + j] / ux + qk_[k * n + j] / xl;
            }
            grad[k] = gk;
        }
        if (!with_hess) return;
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] <= alfa_[j] || x[j] >= beta_[j]) continue;  // clamped: dx/dlambda = 0
            const double ux = upp_[j] - x[j];
            const double xl = x[j] - low_[j];
            const double curv = 2.0 * (plam[j] / (ux * ux * ux) + qlam[j] / (xl * xl * xl));
            if (!(curv > 0.0)) continue;
            for (std::size_t k = 0; k < m; ++k) {
                const double Gk = pk_[k * n + j] / (ux * ux) - qk_[k * n + j] / (xl * xl);
                for (std::size_t l = k; l < m; ++l) {
                    const double Gl = pk_[l * n + j] / (ux * ux) - qk_[l * n + j] / (xl * xl);
                    hess[k * m + l] -= Gk * Gl / curv;
                }
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t l = 0; l < k; ++l) hess[k * m + l] = hess[l * m + k];
        }
    };

    double mu = 1.0;
    const double mu_min = 1e-10;
    int total_newton = 0;
    const int max_newton = 400;

    while (mu > mu_min && total_newton < max_newton) {
        for (int inner = 0; inner < 60 && total_newton < max_newton; ++inner) {
            eval_grad_hess(true);
            double res = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                res = std::max(res, std::fabs(grad[k] + mu / lambda_[k]));
            }
            if (res <= 0.9 * mu) break;
            ++total_newton;

            std::vector<double> A(hess);
            for (std::size_t k = 0; k < m; ++k) {
                A[k * m + k] -= mu / (lambda_[k] * lambda_[k]);
                A[k * m + k] -= 1e-12 * (1.0 + std::fabs(A[k * m + k]));
                step[k] = -(grad[k] + mu / lambda_[k]);
            }
            if (!solve_small(A, step, m_)) {
                for (std::size_t k = 0; k < m; ++k) step[k] = grad[k] > 0.0 ? lambda_[k] : -0.5 * lambda_[k];
            }
            // Damped step: stay strictly inside lambda > 0.
            double t = 1.0;
            for (std::size_t k = 0; k < m; ++k) {
                if (step[k] < 0.0) t = std::min(t, -0.99 * lambda_[k] / step[k]);
            }
            for (std::size_t k = 0; k < m; ++k) lambda_[k] += t * step[k];
        }
        mu *= 0.1;
    }
    eval_x_of_lambda(x);
}

}  // namespace infill
