#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "infill/mma.hpp"

using namespace infill;

TEST_CASE("stationary point with inactive constraints is a fixed point") {
    MmaSolver mma(5, 1);
    std::vector<double> x(5, 0.45);
    const std::vector<double> x0 = x;
    const std::vector<double> df(5, 0.0);
    const std::vector<double> g = {-0.5};
    const std::vector<double> dg(5, 0.0);
    mma.update(x, df, g, dg);
    for (std::size_t j = 0; j < x.size(); ++j) {
        CHECK(x[j] == doctest::Approx(x0[j]).epsilon(1e-9));
    }
}

TEST_CASE("one-variable problem converges to the constraint boundary") {
    // min x  s.t.  x >= 0.3, written as g = 0.3 - x <= 0
    MmaSolver mma(1, 1);
    std::vector<double> x = {0.9};
    for (int it = 0; it < 30; ++it) {
        const std::vector<double> df = {1.0};
        const std::vector<double> g = {0.3 - x[0]};
        const std::vector<double> dg = {-1.0};
        mma.update(x, df, g, dg);
    }
    CHECK(x[0] == doctest::Approx(0.3).epsilon(1e-4));

    // complementarity at the solution: lambda > 0 and g ~ 0
    CHECK(std::fabs(mma.multipliers()[0] * (0.3 - x[0])) < 1e-8);
}

TEST_CASE("two-variable quadratic with a linear constraint") {
    // min x1^2 + x2^2  s.t.  x1 + x2 >= 1 -> optimum (0.5, 0.5)
    MmaSolver mma(2, 1);
    std::vector<double> x = {0.9, 0.2};
    for (int it = 0; it < 60; ++it) {
        const std::vector<double> df = {2.0 * x[0], 2.0 * x[1]};
        const std::vector<double> g = {1.0 - x[0] - x[1]};
        const std::vector<double> dg = {-1.0, -1.0};
        mma.update(x, df, g, dg);
    }
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::fabs(mma.multipliers()[0] * (1.0 - x[0] - x[1])) < 1e-8);
}

TEST_CASE("asymptotes strictly bracket the iterate after every update") {
    MmaSolver mma(4, 2);
    std::vector<double> x = {0.2, 0.5, 0.8, 0.35};
    for (int it = 0; it < 25; ++it) {
        const std::vector<double> df = {std::sin(0.3 * it), -1.0, 0.5, -0.2};
        const std::vector<double> g = {x[0] + x[1] - 1.1, 0.4 - x[2]};
        const std::vector<double> dg = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0};
        mma.update(x, df, g, dg);
        for (std::size_t j = 0; j < x.size(); ++j) {
            CHECK(mma.lower_asymptotes()[j] < x[j]);
            CHECK(x[j] < mma.upper_asymptotes()[j]);
            CHECK(x[j] >= 0.0);
            CHECK(x[j] <= 1.0);
        }
    }
}

TEST_CASE("update is invariant under positive objective rescaling") {
    for (double scale : {7.3, 1e4, 1e-5}) {
        MmaSolver a(3, 1), b(3, 1);
        std::vector<double> xa = {0.3, 0.6, 0.8};
        std::vector<double> xb = xa;
        for (int it = 0; it < 5; ++it) {
            std::vector<double> df = {-1.0 / (0.2 + xa[0]), 0.4 * xa[1], -0.7};
            std::vector<double> dfs = df;
            for (double& v : dfs) v *= scale;
            const std::vector<double> ga = {xa[0] + xa[1] + xa[2] - 1.5};
            const std::vector<double> gb = {xb[0] + xb[1] + xb[2] - 1.5};
            const std::vector<double> dg = {1.0, 1.0, 1.0};
            a.update(xa, df, ga, dg);
            b.update(xb, dfs, gb, dg);
            for (std::size_t j = 0; j < xa.size(); ++j) {
                CHECK(std::fabs(xa[j] - xb[j]) < 1e-10);
            }
        }
    }
}

TEST_CASE("rejects malformed input") {
    MmaSolver mma(2, 1);
    std::vector<double> x = {0.5, 0.5};
    const std::vector<double> g = {0.0};
    const std::vector<double> dg = {1.0, 1.0};

    std::vector<double> bad_df = {1.0, std::nan("")};
    CHECK_THROWS_AS(mma.update(x, bad_df, g, dg), std::invalid_argument);

    const std::vector<double> df = {1.0, 1.0};
    std::vector<double> bad_g = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(mma.update(x, df, bad_g, dg), std::invalid_argument);

    std::vector<double> wrong_size = {1.0};
    CHECK_THROWS_AS(mma.update(x, wrong_size, g, dg), std::invalid_argument);
}
