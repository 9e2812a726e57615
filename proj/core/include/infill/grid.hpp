#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace infill {

/// Regular grid of unit-square elements. Elements and nodes are indexed
/// column-major with y running fastest:
///   element (i, j) -> i * ny + j          for i in [0, nx), j in [0, ny)
///   node    (i, j) -> i * (ny + 1) + j    for i in [0, nx], j in [0, ny]
/// Node k carries dofs 2k (x) and 2k + 1 (y). Positions and lengths are in
/// voxel units; the centroid of element (i, j) is (i + 0.5, j + 0.5).
struct Grid {
    int nx = 0;
    int ny = 0;

    int num_elements() const { return nx * ny; }
    int num_nodes() const { return (nx + 1) * (ny + 1); }
    int num_dofs() const { return 2 * num_nodes(); }

    int elem_index(int i, int j) const { return i * ny + j; }
    int node_index(int i, int j) const { return i * (ny + 1) + j; }

    int elem_i(int e) const { return e / ny; }
    int elem_j(int e) const { return e % ny; }

    /// Corner nodes of element (i, j), counterclockwise from the lower-left:
    /// (i, j), (i+1, j), (i+1, j+1), (i, j+1).
    std::array<int, 4> elem_nodes(int i, int j) const {
        const int base = node_index(i, j);
        const int step = ny + 1;
        return {base, base + step, base + step + 1, base + 1};
    }
};

/// Throws std::invalid_argument unless nx, ny >= 1.
Grid build_grid(int nx, int ny);

/// Per-element membership of the (possibly non-rectangular) design domain.
/// Elements outside are treated as void and excluded from all constraints.
struct DomainMask {
    std::vector<std::uint8_t> inside;

    static DomainMask all_inside(const Grid& grid) {
        DomainMask m;
        m.inside.assign(static_cast<std::size_t>(grid.num_elements()), 1);
        return m;
    }
    bool is_inside(int e) const { return inside[static_cast<std::size_t>(e)] != 0; }
    int count() const;
};

/// Elements frozen at rho = 1 (the shell below the part surface). Passive
/// elements are excluded from design updates and from local-volume counting.
struct PassiveMask {
    std::vector<std::uint8_t> is_passive;
    double shell_thickness = 0.0;

    static PassiveMask none(const Grid& grid) {
        PassiveMask m;
        m.is_passive.assign(static_cast<std::size_t>(grid.num_elements()), 0);
        return m;
    }
    bool passive(int e) const { return is_passive[static_cast<std::size_t>(e)] != 0; }
    int count() const;
};

struct Load {
    int node = 0;
    int axis = 0;  // 0 = x, 1 = y
    double magnitude = 0.0;
};

struct BoundaryConditions {
    std::vector<int> fixed_dofs;  // sorted, unique
    std::vector<Load> loads;

    void add_fixed_node(const Grid& grid, int i, int j, bool fix_x, bool fix_y);
    void normalize();  // sort + dedupe fixed_dofs
    /// Throws std::invalid_argument on an empty fixed set, out-of-range
    /// indices, or a load applied to a fixed dof of the same axis.
    void validate(const Grid& grid) const;
};

/// Marks in-domain elements that sit on the domain outline: adjacent (in the
/// 4-neighborhood) to an outside element or to the grid border.
std::vector<std::uint8_t> domain_boundary_elements(const Grid& grid, const DomainMask& domain);

/// Passive-shell generation: an element becomes passive when the Euclidean
/// distance from its centroid to the nearest boundary-flagged element
/// centroid is below the shell thickness t. Exact brute-force distance
/// transform; t = 0 yields an all-active mask. Outside elements stay active
/// (they are void and never enter the design).
PassiveMask passive_from_distance(const Grid& grid,
                                  const std::vector<std::uint8_t>& boundary_flag,
                                  double t,
                                  const DomainMask& domain);

}  // namespace infill
