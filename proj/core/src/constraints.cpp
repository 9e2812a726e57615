#include "infill/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace infill {

ConstraintValue eval_local(std::span<const double> rho_bar, double alpha, double p,
                           std::span<const std::uint8_t> mask) {
    if (!(alpha > 0.0)) throw std::invalid_argument("local volume limit alpha must be positive");
    if (!(p >= 2.0)) throw std::invalid_argument("aggregation exponent p must be >= 2");

    ConstraintValue out;
    out.gradient.assign(rho_bar.size(), 0.0);

    long long n = 0;
    double sum = 0.0;
    for (std::size_t e = 0; e < rho_bar.size(); ++e) {
        if (!mask[e]) continue;
        ++n;
        sum += std::pow(rho_bar[e], p);
    }
    if (n == 0) throw std::invalid_argument("local volume constraint over an empty element set");

    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    if (mean == 0.0) {
        out.value = -1.0;
        return out;
    }
    const double norm = std::pow(mean, 1.0 / p);
    out.value = norm / alpha - 1.0;
    const double common = std::pow(mean, 1.0 / p - 1.0) / (alpha * nn);
    for (std::size_t e = 0; e < rho_bar.size(); ++e) {
        if (mask[e]) out.gradient[e] = common * std::pow(rho_bar[e], p - 1.0);
    }
    return out;
}

ConstraintValue eval_total(std::span<const double> rho, double alpha_total,
                           std::span<const std::uint8_t> mask) {
    if (!(alpha_total > 0.0) || alpha_total > 1.0) {
        throw std::invalid_argument("total volume limit must lie in (0, 1]");
    }
    ConstraintValue out;
    out.gradient.assign(rho.size(), 0.0);
    long long n = 0;
    double sum = 0.0;
    for (std::size_t e = 0; e < rho.size(); ++e) {
        if (!mask[e]) continue;
        ++n;
        sum += rho[e];
    }
    if (n == 0) throw std::invalid_argument("total volume constraint over an empty element set");
    const double nn = static_cast<double>(n);
    out.value = sum / nn - alpha_total;
    const double g = 1.0 / nn;
    for (std::size_t e = 0; e < rho.size(); ++e) {
        if (mask[e]) out.gradient[e] = g;
    }
    return out;
}

WallBoundReport wall_bound(double alpha, double R, double r) {
    if (!(r > 0.0) || !(r < R)) {
        throw std::invalid_argument("wall bound requires 0 < r < R");
    }
    const double v_wall = 2.0 * r * R * R - (2.0 / 3.0) * r * r * r;   // / pi
    const double v_sphere = (4.0 / 3.0) * R * R * R;                   // / pi
    WallBoundReport rep;
    rep.ratio = v_wall / v_sphere;
    rep.alpha = alpha;
    rep.walls_suppressed = alpha < rep.ratio;
    return rep;
}

}  // namespace infill
