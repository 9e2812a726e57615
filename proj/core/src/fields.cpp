#include "infill/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace infill {
namespace {

// Accumulates the four sign combinations of a canonical offset group in the
// order ((+,+) + (-,-)) + ((+,-) + (-,+)), which is invariant under x/y
// mirroring (pairs swap, two-term sums commute).
template <typename Sample>
inline void accumulate_group(const FilterKernel::OffsetGroup& g, int i, int j, Sample&& sample,
                             double& num, double& den) {
    double na = 0.0, da = 0.0, nb = 0.0, db = 0.0, nc = 0.0, dc = 0.0, nd = 0.0, dd = 0.0;
    sample(i + g.di, j + g.dj, g.weight, na, da);
    if (g.di != 0 || g.dj != 0) sample(i - g.di, j - g.dj, g.weight, nb, db);
    if (g.di != 0 && g.dj != 0) {
        sample(i + g.di, j - g.dj, g.weight, nc, dc);
        sample(i - g.di, j + g.dj, g.weight, nd, dd);
    }
    num += (na + nb) + (nc + nd);
    den += (da + db) + (dc + dd);
}

}  // namespace

FilterKernel make_smooth_kernel(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("filter radius must be positive");
    FilterKernel k;
    k.radius = r;
    const int reach = static_cast<int>(std::ceil(r));
    for (int di = 0; di <= reach; ++di) {
        for (int dj = 0; dj <= reach; ++dj) {
            const double d = std::hypot(static_cast<double>(di), static_cast<double>(dj));
            if (d < r) k.groups.push_back({di, dj, 1.0 - d / r});
        }
    }
    return k;
}

FilterKernel make_volume_kernel(double R) {
    if (!(R > 0.0)) throw std::invalid_argument("influence radius must be positive");
    FilterKernel k;
    k.radius = R;
    k.counting = true;
    const int reach = static_cast<int>(std::floor(R));
    for (int di = 0; di <= reach; ++di) {
        for (int dj = 0; dj <= reach; ++dj) {
            const double d = std::hypot(static_cast<double>(di), static_cast<double>(dj));
            if (d <= R) k.groups.push_back({di, dj, 1.0});
        }
    }
    return k;
}

FilterKernel make_lobe_kernel(Axis s, double r_long, double r_short) {
    if (!(r_long > 0.0) || !(r_short > 0.0)) {
        throw std::invalid_argument("lobe extents must be positive");
    }
    FilterKernel k;
    k.radius = r_long;
    k.counting = true;
    const int reach_i = static_cast<int>(std::floor(s == Axis::X ? r_long : r_short));
    const int reach_j = static_cast<int>(std::floor(s == Axis::X ? r_short : r_long));
    for (int di = 0; di <= reach_i; ++di) {
        for (int dj = 0; dj <= reach_j; ++dj) {
            k.groups.push_back({di, dj, 1.0});
        }
    }
    return k;
}

KernelMap::KernelMap(const Grid& grid, FilterKernel kernel, std::vector<std::uint8_t> source,
                     std::vector<std::uint8_t> output)
    : grid_(grid), kernel_(std::move(kernel)), source_(std::move(source)), output_(std::move(output)) {
    const std::size_t n = static_cast<std::size_t>(grid_.num_elements());
    if (source_.size() != n || output_.size() != n) {
        throw std::invalid_argument("kernel masks must cover the grid");
    }
    denom_.assign(n, 0.0);
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t e = static_cast<std::size_t>(i * ny + j);
            if (!output_[e]) continue;
            double num = 0.0, den = 0.0;
            auto sample = [&](int ni, int nj, double w, double& nacc, double& dacc) {
                if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) return;
                const std::size_t idx = static_cast<std::size_t>(ni * ny + nj);
                if (!source_[idx]) return;
                nacc = 0.0;
                dacc = w;
            };
            for (const auto& g : kernel_.groups) accumulate_group(g, i, j, sample, num, den);
            if (den <= 0.0) {
                throw std::runtime_error("kernel neighborhood of element (" + std::to_string(i) +
                                         ", " + std::to_string(j) + ") is empty after exclusions");
            }
            denom_[e] = den;
        }
    }
}

void KernelMap::average(std::span<const double> x, std::span<double> out) const {
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    const double* xp = x.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t e = static_cast<std::size_t>(i * ny + j);
            if (!output_[e]) {
                out[e] = 0.0;
                continue;
            }
            double num = 0.0, den = 0.0;
            auto sample = [&](int ni, int nj, double w, double& nacc, double&) {
                if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) return;
                const std::size_t idx = static_cast<std::size_t>(ni * ny + nj);
                if (!source_[idx]) return;
                nacc = w * xp[idx];
            };
            for (const auto& g : kernel_.groups) accumulate_group(g, i, j, sample, num, den);
            out[e] = num / denom_[e];
        }
    }
}

void KernelMap::average_adjoint(std::span<const double> y, std::span<double> out) const {
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    const std::size_t n = static_cast<std::size_t>(grid_.num_elements());
    // Scale once by the forward denominators, then the adjoint is a plain
    // weighted gather over the (symmetric) neighborhood.
    std::vector<double> scaled(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        if (output_[e]) scaled[e] = y[e] / denom_[e];
    }
    const double* sp = scaled.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t e = static_cast<std::size_t>(i * ny + j);
            if (!source_[e]) {
                out[e] = 0.0;
                continue;
            }
            double num = 0.0, den = 0.0;
            auto sample = [&](int ni, int nj, double w, double& nacc, double&) {
                if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) return;
                const std::size_t idx = static_cast<std::size_t>(ni * ny + nj);
                if (!output_[idx]) return;
                nacc = w * sp[idx];
            };
            for (const auto& g : kernel_.groups) accumulate_group(g, i, j, sample, num, den);
            out[e] = num;
        }
    }
}

std::vector<std::uint8_t> in_domain_mask(const Grid& grid, const DomainMask& domain) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(grid.num_elements()), 0);
    for (std::size_t e = 0; e < m.size(); ++e) m[e] = domain.inside[e];
    return m;
}

std::vector<std::uint8_t> active_mask(const Grid& grid, const DomainMask& domain,
                                      const PassiveMask& passive) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(grid.num_elements()), 0);
    for (std::size_t e = 0; e < m.size(); ++e) {
        m[e] = (domain.inside[e] && !passive.is_passive[e]) ? 1 : 0;
    }
    return m;
}

std::vector<double> smooth_filter(const Grid& grid, std::span<const double> phi, double r,
                                  const PassiveMask& passive, const DomainMask& domain) {
    (void)passive;  // the smoothing filter sees passive elements as ordinary sources
    auto mask = in_domain_mask(grid, domain);
    KernelMap map(grid, make_smooth_kernel(r), mask, mask);
    std::vector<double> out(phi.size());
    map.average(phi, out);
    return out;
}

double project_value(double phi_tilde, double beta) {
    const double th = std::tanh(0.5 * beta);
    const double v = (th + std::tanh(beta * (phi_tilde - 0.5))) / (2.0 * th);
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

std::vector<double> project(std::span<const double> phi_tilde, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("projection sharpness beta must be positive");
    std::vector<double> out(phi_tilde.size());
    const double th = std::tanh(0.5 * beta);
    const double inv = 1.0 / (2.0 * th);
    for (std::size_t e = 0; e < out.size(); ++e) {
        const double v = (th + std::tanh(beta * (phi_tilde[e] - 0.5))) * inv;
        out[e] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    return out;
}

double project_derivative_value(double phi_tilde, double beta) {
    const double t = std::tanh(beta * (phi_tilde - 0.5));
    return beta * (1.0 - t * t) / (2.0 * std::tanh(0.5 * beta));
}

std::vector<double> project_derivative(std::span<const double> phi_tilde, double beta) {
    std::vector<double> out(phi_tilde.size());
    for (std::size_t e = 0; e < out.size(); ++e) {
        out[e] = project_derivative_value(phi_tilde[e], beta);
    }
    return out;
}

std::vector<double> local_volume(const Grid& grid, std::span<const double> rho, double R,
                                 const PassiveMask& passive, const DomainMask& domain) {
    auto mask = active_mask(grid, domain, passive);
    KernelMap map(grid, make_volume_kernel(R), mask, mask);
    std::vector<double> out(rho.size());
    map.average(rho, out);
    return out;
}

std::vector<double> local_volume_aniso(const Grid& grid, std::span<const double> rho, Axis s,
                                       double r_long, double r_short, const PassiveMask& passive,
                                       const DomainMask& domain) {
    auto mask = active_mask(grid, domain, passive);
    KernelMap map(grid, make_lobe_kernel(s, r_long, r_short), mask, mask);
    std::vector<double> out(rho.size());
    map.average(rho, out);
    return out;
}

std::vector<double> backprop_from_density(const KernelMap& smooth_map,
                                          std::span<const double> dF_drho,
                                          std::span<const double> phi_tilde, double beta,
                                          std::span<const std::uint8_t> design_mask) {
    const std::size_t n = dF_drho.size();
    std::vector<double> mid(n, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        if (design_mask[e]) mid[e] = dF_drho[e] * project_derivative_value(phi_tilde[e], beta);
    }
    std::vector<double> out(n);
    smooth_map.average_adjoint(mid, out);
    return out;
}

std::vector<double> backprop_from_local_volume(const KernelMap& smooth_map,
                                               const KernelMap& volume_map,
                                               std::span<const double> dF_drho_bar,
                                               std::span<const double> phi_tilde, double beta,
                                               std::span<const std::uint8_t> design_mask) {
    std::vector<double> dF_drho(dF_drho_bar.size());
    volume_map.average_adjoint(dF_drho_bar, dF_drho);
    return backprop_from_density(smooth_map, dF_drho, phi_tilde, beta, design_mask);
}

}  // namespace infill
