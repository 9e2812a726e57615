#include "infill/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace infill {

Grid build_grid(int nx, int ny) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("grid dimensions must be positive, got " +
                                    std::to_string(nx) + "x" + std::to_string(ny));
    }
    return Grid{nx, ny};
}

int DomainMask::count() const {
    return static_cast<int>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

int PassiveMask::count() const {
    return static_cast<int>(std::count(is_passive.begin(), is_passive.end(), std::uint8_t{1}));
}

void BoundaryConditions::add_fixed_node(const Grid& grid, int i, int j, bool fix_x, bool fix_y) {
    const int node = grid.node_index(i, j);
    if (fix_x) fixed_dofs.push_back(2 * node);
    if (fix_y) fixed_dofs.push_back(2 * node + 1);
}

void BoundaryConditions::normalize() {
    std::sort(fixed_dofs.begin(), fixed_dofs.end());
    fixed_dofs.erase(std::unique(fixed_dofs.begin(), fixed_dofs.end()), fixed_dofs.end());
}

void BoundaryConditions::validate(const Grid& grid) const {
    if (fixed_dofs.empty()) {
        throw std::invalid_argument("boundary conditions must fix at least one dof");
    }
    const int ndof = grid.num_dofs();
    for (int d : fixed_dofs) {
        if (d < 0 || d >= ndof) {
            throw std::invalid_argument("fixed dof " + std::to_string(d) + " out of range");
        }
    }
    for (const Load& load : loads) {
        if (load.node < 0 || load.node >= grid.num_nodes()) {
            throw std::invalid_argument("load node " + std::to_string(load.node) + " out of range");
        }
        if (load.axis != 0 && load.axis != 1) {
            throw std::invalid_argument("load axis must be 0 or 1");
        }
        const int dof = 2 * load.node + load.axis;
        if (std::binary_search(fixed_dofs.begin(), fixed_dofs.end(), dof)) {
            throw std::invalid_argument("load applied to fixed dof " + std::to_string(dof));
        }
    }
}

std::vector<std::uint8_t> domain_boundary_elements(const Grid& grid, const DomainMask& domain) {
    std::vector<std::uint8_t> flag(static_cast<std::size_t>(grid.num_elements()), 0);
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const int e = grid.elem_index(i, j);
            if (!domain.is_inside(e)) continue;
            bool on_border = (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1);
            if (!on_border) {
                on_border = !domain.is_inside(grid.elem_index(i - 1, j)) ||
                            !domain.is_inside(grid.elem_index(i + 1, j)) ||
                            !domain.is_inside(grid.elem_index(i, j - 1)) ||
                            !domain.is_inside(grid.elem_index(i, j + 1));
            }
            flag[static_cast<std::size_t>(e)] = on_border ? 1 : 0;
        }
    }
    return flag;
}

PassiveMask passive_from_distance(const Grid& grid,
                                  const std::vector<std::uint8_t>& boundary_flag,
                                  double t,
                                  const DomainMask& domain) {
    if (t < 0.0) throw std::invalid_argument("shell thickness must be non-negative");
    if (boundary_flag.size() != static_cast<std::size_t>(grid.num_elements())) {
        throw std::invalid_argument("boundary flags must cover the grid");
    }
    PassiveMask mask = PassiveMask::none(grid);
    mask.shell_thickness = t;
    if (t == 0.0) return mask;

    std::vector<std::pair<int, int>> boundary;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            if (boundary_flag[static_cast<std::size_t>(grid.elem_index(i, j))]) {
                boundary.emplace_back(i, j);
            }
        }
    }
    const double t2 = t * t;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const int e = grid.elem_index(i, j);
            if (!domain.is_inside(e)) continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [bi, bj] : boundary) {
                const double dx = static_cast<double>(i - bi);
                const double dy = static_cast<double>(j - bj);
                best = std::min(best, dx * dx + dy * dy);
                if (best == 0.0) break;
            }
            if (best < t2) mask.is_passive[static_cast<std::size_t>(e)] = 1;
        }
    }
    return mask;
}

}  // namespace infill
