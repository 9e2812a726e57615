#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "infill/fields.hpp"
#include "infill/grid.hpp"
#include "oracles.hpp"

using namespace infill;

namespace {

// Enumeration oracle: plain double loop over all offsets, no grouping.
double oracle_weighted_average(const Grid& g, const std::vector<double>& x, int ei, int ej,
                               double radius, bool counting,
                               const std::vector<std::uint8_t>& admissible) {
    double num = 0.0, den = 0.0;
    const int reach = static_cast<int>(std::ceil(radius));
    for (int di = -reach; di <= reach; ++di) {
        for (int dj = -reach; dj <= reach; ++dj) {
            const double d = std::hypot(double(di), double(dj));
            double w;
            if (counting) {
                if (d > radius) continue;
                w = 1.0;
            } else {
                if (d >= radius) continue;
                w = 1.0 - d / radius;
            }
            const int ni = ei + di, nj = ej + dj;
            if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
            const std::size_t idx = static_cast<std::size_t>(g.elem_index(ni, nj));
            if (!admissible[idx]) continue;
            num += w * x[idx];
            den += w;
        }
    }
    return num / den;
}

}  // namespace

TEST_CASE("smoothing filter basics") {
    const Grid g = build_grid(9, 9);
    const DomainMask domain = DomainMask::all_inside(g);
    const PassiveMask passive = PassiveMask::none(g);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());

    SUBCASE("constant fields are fixed points") {
        std::vector<double> phi(n, 0.37);
        const auto out = smooth_filter(g, phi, 2.0, passive, domain);
        for (double v : out) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
    }

    SUBCASE("single interior spike, r = 2") {
        std::vector<double> phi(n, 0.0);
        phi[static_cast<std::size_t>(g.elem_index(4, 4))] = 1.0;
        const auto out = smooth_filter(g, phi, 2.0, passive, domain);
        // enumerate offsets with d < 2, weights 1 - d/2; the spike keeps w0 = 1
        const double sum_w = 1.0 + 4.0 * 0.5 + 4.0 * (1.0 - std::sqrt(2.0) / 2.0);
        CHECK(out[static_cast<std::size_t>(g.elem_index(4, 4))] ==
              doctest::Approx(1.0 / sum_w).epsilon(1e-13));
        const auto all = in_domain_mask(g, domain);
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                CHECK(out[static_cast<std::size_t>(g.elem_index(i, j))] ==
                      doctest::Approx(oracle_weighted_average(g, phi, i, j, 2.0, false, all))
                          .epsilon(1e-13));
            }
        }
    }

    SUBCASE("radius below one is the identity") {
        std::mt19937 rng(1);
        std::vector<double> phi = oracles::random_field(g.num_elements(), rng);
        const auto out = smooth_filter(g, phi, 0.8, passive, domain);
        for (std::size_t e = 0; e < n; ++e) CHECK(out[e] == phi[e]);
    }

    SUBCASE("non-positive radius is rejected") {
        CHECK_THROWS_AS(make_smooth_kernel(0.0), std::invalid_argument);
        CHECK_THROWS_AS(make_smooth_kernel(-2.0), std::invalid_argument);
    }

    SUBCASE("order preservation and range") {
        std::mt19937 rng(2);
        std::vector<double> a = oracles::random_field(g.num_elements(), rng);
        std::vector<double> b(a.size());
        for (std::size_t e = 0; e < n; ++e) {
            b[e] = std::min(1.0, a[e] + 0.2 * (static_cast<double>(rng()) / 4294967296.0));
        }
        const auto fa = smooth_filter(g, a, 2.5, passive, domain);
        const auto fb = smooth_filter(g, b, 2.5, passive, domain);
        for (std::size_t e = 0; e < n; ++e) {
            CHECK(fa[e] <= fb[e] + 1e-15);
            CHECK(fa[e] >= 0.0);
            CHECK(fa[e] <= 1.0);
        }
    }
}

TEST_CASE("Heaviside projection") {
    SUBCASE("exact fixpoints at 0, 1/2 and 1") {
        for (double beta : {1.0, 2.0, 8.0, 64.0, 512.0}) {
            CHECK(project_value(0.0, beta) == 0.0);
            CHECK(project_value(0.5, beta) == 0.5);
            CHECK(project_value(1.0, beta) == 1.0);
        }
    }

    SUBCASE("approaches the hard threshold for large beta") {
        CHECK(project_value(0.4, 512.0) < 1e-6);
        CHECK(project_value(0.6, 512.0) > 1.0 - 1e-6);
    }

    SUBCASE("strictly increasing in phi_tilde") {
        for (double beta : {1.0, 8.0}) {
            double prev = -1.0;
            for (double x = 0.0; x <= 1.0; x += 0.01) {
                const double v = project_value(x, beta);
                CHECK(v > prev);
                prev = v;
            }
        }
    }

    SUBCASE("monotone in beta away from the fixpoints") {
        for (double x : {0.6, 0.75, 0.9}) {
            CHECK(project_value(x, 8.0) > project_value(x, 2.0));
        }
        for (double x : {0.1, 0.25, 0.4}) {
            CHECK(project_value(x, 8.0) < project_value(x, 2.0));
        }
    }

    SUBCASE("derivative at the threshold") {
        for (double beta : {1.0, 4.0, 16.0}) {
            CHECK(project_derivative_value(0.5, beta) ==
                  doctest::Approx(beta / (2.0 * std::tanh(beta / 2.0))).epsilon(1e-14));
        }
    }

    SUBCASE("rejects non-positive beta") {
        std::vector<double> x(3, 0.5);
        CHECK_THROWS_AS(project(x, 0.0), std::invalid_argument);
    }
}

TEST_CASE("local volume measure") {
    const Grid g = build_grid(5, 5);
    const DomainMask domain = DomainMask::all_inside(g);
    const PassiveMask passive = PassiveMask::none(g);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());

    SUBCASE("constant field maps to itself") {
        std::vector<double> rho(n, 0.42);
        const auto out = local_volume(g, rho, 1.5, passive, domain);
        for (double v : out) CHECK(v == doctest::Approx(0.42).epsilon(1e-14));
    }

    SUBCASE("all solid maps to one") {
        std::vector<double> rho(n, 1.0);
        const auto out = local_volume(g, rho, 2.4, passive, domain);
        for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("single solid element at the center, R = 1.5") {
        std::vector<double> rho(n, 0.0);
        rho[static_cast<std::size_t>(g.elem_index(2, 2))] = 1.0;
        const auto out = local_volume(g, rho, 1.5, passive, domain);
        // Enumerating offsets with d <= 1.5 brings in the self, the four axis
        // neighbors and the four diagonals (sqrt(2) <= 1.5): nine members.
        const auto all = in_domain_mask(g, domain);
        const double expect = oracle_weighted_average(g, rho, 2, 2, 1.5, true, all);
        CHECK(expect == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
        CHECK(out[static_cast<std::size_t>(g.elem_index(2, 2))] ==
              doctest::Approx(expect).epsilon(1e-14));
    }

    SUBCASE("passive neighbors are excluded from the count") {
        PassiveMask shell = PassiveMask::none(g);
        for (int i = 0; i < 5; ++i) {
            shell.is_passive[static_cast<std::size_t>(g.elem_index(i, 0))] = 1;
        }
        std::vector<double> rho(n, 0.0);
        for (int i = 0; i < 5; ++i) rho[static_cast<std::size_t>(g.elem_index(i, 0))] = 1.0;
        const auto out = local_volume(g, rho, 1.2, shell, domain);
        // active neighborhoods see only active (empty) elements
        for (int i = 0; i < 5; ++i) {
            for (int j = 1; j < 5; ++j) {
                CHECK(out[static_cast<std::size_t>(g.elem_index(i, j))] == 0.0);
            }
        }
    }

    SUBCASE("rejects non-positive radius") {
        CHECK_THROWS_AS(make_volume_kernel(0.0), std::invalid_argument);
    }
}

TEST_CASE("anisotropic lobes") {
    const Grid g = build_grid(9, 9);
    const DomainMask domain = DomainMask::all_inside(g);
    const PassiveMask passive = PassiveMask::none(g);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());

    SUBCASE("constant field is axis independent") {
        std::vector<double> rho(n, 0.3);
        const auto ox = local_volume_aniso(g, rho, Axis::X, 3.0, 1.0, passive, domain);
        const auto oy = local_volume_aniso(g, rho, Axis::Y, 3.0, 1.0, passive, domain);
        for (std::size_t e = 0; e < n; ++e) {
            CHECK(ox[e] == doctest::Approx(0.3).epsilon(1e-14));
            CHECK(oy[e] == doctest::Approx(0.3).epsilon(1e-14));
        }
    }

    SUBCASE("a thin horizontal bar fills the x lobe but not the y lobe") {
        std::vector<double> rho(n, 0.0);
        for (int i = 0; i < 9; ++i) rho[static_cast<std::size_t>(g.elem_index(i, 4))] = 1.0;
        const auto ox = local_volume_aniso(g, rho, Axis::X, 3.0, 1.0, passive, domain);
        const auto oy = local_volume_aniso(g, rho, Axis::Y, 3.0, 1.0, passive, domain);
        const std::size_t center = static_cast<std::size_t>(g.elem_index(4, 4));
        // x lobe: 7x3 box with one full solid row; y lobe: 3x7 box with 3 solid
        CHECK(ox[center] == doctest::Approx(7.0 / 21.0).epsilon(1e-14));
        CHECK(oy[center] == doctest::Approx(3.0 / 21.0).epsilon(1e-14));
        CHECK(ox[center] > oy[center]);
    }

    SUBCASE("the isotropic kernel used for both axes reproduces local_volume") {
        std::mt19937 rng(4);
        std::vector<double> rho = oracles::random_field(g.num_elements(), rng);
        const auto mask = active_mask(g, domain, passive);
        KernelMap iso(g, make_volume_kernel(2.5), mask, mask);
        std::vector<double> via_map(n, 0.0);
        iso.average(rho, via_map);
        const auto direct = local_volume(g, rho, 2.5, passive, domain);
        for (std::size_t e = 0; e < n; ++e) CHECK(via_map[e] == direct[e]);
    }
}

TEST_CASE("forward/adjoint consistency of the kernel maps") {
    const Grid g = build_grid(8, 6);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());
    std::mt19937 rng(9);

    // irregular masks: a domain hole and a passive strip
    DomainMask domain = DomainMask::all_inside(g);
    domain.inside[static_cast<std::size_t>(g.elem_index(3, 3))] = 0;
    domain.inside[static_cast<std::size_t>(g.elem_index(4, 3))] = 0;
    PassiveMask passive = PassiveMask::none(g);
    for (int i = 0; i < g.nx; ++i) {
        passive.is_passive[static_cast<std::size_t>(g.elem_index(i, 0))] = 1;
    }

    const auto dom = in_domain_mask(g, domain);
    const auto act = active_mask(g, domain, passive);

    for (const KernelMap& map : {KernelMap(g, make_smooth_kernel(2.0), dom, dom),
                                 KernelMap(g, make_volume_kernel(2.2), act, act),
                                 KernelMap(g, make_lobe_kernel(Axis::Y, 3.0, 1.0), act, act)}) {
        const std::vector<double> a = oracles::random_field(g.num_elements(), rng, -1.0, 1.0);
        const std::vector<double> b = oracles::random_field(g.num_elements(), rng, -1.0, 1.0);
        std::vector<double> Aa(n, 0.0), Atb(n, 0.0);
        map.average(a, Aa);
        map.average_adjoint(b, Atb);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t e = 0; e < n; ++e) {
            lhs += Aa[e] * b[e];
            rhs += a[e] * Atb[e];
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("counting-average adjoint fixes interior constants") {
    const Grid g = build_grid(11, 11);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());
    const auto mask = in_domain_mask(g, DomainMask::all_inside(g));
    KernelMap map(g, make_volume_kernel(2.0), mask, mask);
    std::vector<double> ones(n, 1.0), out(n, 0.0);
    map.average_adjoint(ones, out);
    // interior stencils are doubly stochastic: every weight sum equals the
    // neighborhood size, so the adjoint keeps a constant field constant there
    CHECK(out[static_cast<std::size_t>(g.elem_index(5, 5))] ==
          doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("stencil sums are bitwise mirror invariant") {
    const Grid g = build_grid(7, 6);
    const std::size_t n = static_cast<std::size_t>(g.num_elements());
    std::mt19937 rng(21);
    std::vector<double> x = oracles::random_field(g.num_elements(), rng);
    std::vector<double> xm(n);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            xm[static_cast<std::size_t>(g.elem_index(i, g.ny - 1 - j))] =
                x[static_cast<std::size_t>(g.elem_index(i, j))];
        }
    }
    const auto mask = in_domain_mask(g, DomainMask::all_inside(g));
    KernelMap map(g, make_smooth_kernel(2.5), mask, mask);
    std::vector<double> fx(n, 0.0), fxm(n, 0.0);
    map.average(x, fx);
    map.average(xm, fxm);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            CHECK(fx[static_cast<std::size_t>(g.elem_index(i, j))] ==
                  fxm[static_cast<std::size_t>(g.elem_index(i, g.ny - 1 - j))]);
        }
    }
}
