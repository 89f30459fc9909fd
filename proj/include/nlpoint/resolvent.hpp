#pragma once

// Resolvent of the fixed-center Hamiltonian: (h + lambda)^{-1} f splits
// into a smooth free part plus screened Coulomb tails hung on the centers,
// with the charges solving the boundary linear system. Also the spherical
// boundary probe that reads the 1/rho and constant coefficients of the
// field back off a computed output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nlpoint/errors.hpp"
#include "nlpoint/pointop.hpp"
#include "nlpoint/spectral.hpp"

namespace nlpoint {

// Field decomposition (h + lambda)^{-1} f = smooth_part + sum_i q_i
// g^lambda(. - x_i). The output keeps the source handle and quadrature
// budget it was computed with, so downstream probes can reuse them.
struct ResolventOutput {
    std::vector<double> charges;
    std::function<double(const Vec3&)> smooth_part;
    double lambda = 0.0;
    std::function<double(const Vec3&)> source;
    QuadratureSpec quad;
};

struct ProbeResult {
    double charge_estimate;
    double regular_estimate;
    double fit_residual;
};

inline ResolventOutput resolvent_apply(const CenterConfig& config, double lambda,
                                       std::function<double(const Vec3&)> f,
                                       const QuadratureSpec& quad = {}) {
    validate_config(config);
    if (!(lambda > 0.0)) throw DomainError("resolvent_apply requires lambda > 0");
    if (!f) throw DomainError("resolvent_apply: empty source handle");

    ResolventOutput out;
    out.lambda = lambda;
    out.source = f;
    out.quad = quad;
    out.smooth_part = [f, lambda, quad](const Vec3& x) {
        return free_resolvent_apply(f, lambda, x, quad);
    };
    if (config.centers.empty()) return out;  // free Hamiltonian

    const double threshold = lower_bound(config);
    if (!(lambda > threshold))
        throw BelowSpectrumError("resolvent_apply: lambda " + detail::short_float(lambda)
                                 + " not above the spectral threshold "
                                 + detail::short_float(threshold));

    std::vector<double> rhs(config.centers.size());
    for (std::size_t i = 0; i < config.centers.size(); ++i)
        rhs[i] = free_resolvent_apply(f, lambda, config.centers[i], quad);
    out.charges = solve_charges(boundary_matrix(config, lambda), rhs);
    return out;
}

inline double field_value(const ResolventOutput& out, const CenterConfig& config,
                          const Vec3& x) {
    if (out.charges.size() != config.centers.size())
        throw DomainError("field_value: output does not match the configuration");
    double value = out.smooth_part(x);
    for (std::size_t i = 0; i < config.centers.size(); ++i)
        value += out.charges[i] * g_lambda(distance(x, config.centers[i]), out.lambda);
    return value;
}

namespace detail {

// Average of g^lambda(|x - y|) over the sphere |x - c| = rho, for a source
// at distance r from c. Newtonian-average identity for the screened kernel.
inline double yukawa_sphere_average(double r, double rho, double s) {
    const double lo = std::min(r, rho);
    const double hi = std::max(r, rho);
    return std::exp(-s * hi) * std::sinh(s * lo) / (s * r * rho);
}

} // namespace detail

// Spherical averages of the full field at the given radii around center i,
// least-squares fitted to c_{-1}/rho + c_0. The smooth part's average over
// the probe sphere reduces to a single radial integral against the
// sphere-averaged source, so no 3-D quadrature is needed. The fit residual
// (rms) is reported alongside the coefficients.
inline ProbeResult boundary_probe(const ResolventOutput& out, const CenterConfig& config,
                                  std::size_t i, std::span<const double> radii) {
    validate_config(config);
    if (i >= config.centers.size()) throw DomainError("boundary_probe: index out of range");
    if (out.charges.size() != config.centers.size())
        throw DomainError("boundary_probe: output does not match the configuration");
    if (radii.size() < 2) throw DomainError("boundary_probe: need at least two radii");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(radii[k] > 0.0)) throw DomainError("boundary_probe: radii must be positive");
        if (k > 0 && !(radii[k] < radii[k - 1]))
            throw DomainError("boundary_probe: radii must decrease strictly");
    }
    const double sep = min_separation(config);
    if (!(radii[0] < 0.5 * sep))
        throw DomainError("boundary_probe: largest radius must stay below half the center separation");
    if (!out.source) throw DomainError("boundary_probe: output carries no source handle");

    const Vec3 center = config.centers[i];
    const double s = std::sqrt(out.lambda);
    const double r_max = 50.0 / s;
    QuadratureSpec angular{0.25 * out.quad.rel_tol, 0.25 * out.quad.abs_tol * out.lambda,
                           out.quad.max_intervals};
    detail::SphereAverager average(angular);
    QuadratureSpec radial{0.5 * out.quad.rel_tol, 0.5 * out.quad.abs_tol,
                          out.quad.max_intervals};

    std::vector<double> averages(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double rho = radii[k];
        auto integrand = [&](double r) {
            if (r <= 0.0) return 0.0;
            return r * r * average(out.source, center, r)
                   * detail::yukawa_sphere_average(r, rho, s);
        };
        std::vector<double> breakpoints{0.0};
        for (double b = r_max / 512.0; b < r_max; b *= 2.0) breakpoints.push_back(b);
        breakpoints.push_back(r_max);
        if (rho < r_max) {
            breakpoints.push_back(rho);  // kink of the sphere average
            std::sort(breakpoints.begin(), breakpoints.end());
            breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                              breakpoints.end());
        }
        double value = integrate_segments(integrand, breakpoints, radial);
        value += out.charges[i] * std::exp(-s * rho) / rho;
        for (std::size_t j = 0; j < config.centers.size(); ++j) {
            if (j == i) continue;
            const double rij = distance(center, config.centers[j]);
            value += out.charges[j] * detail::yukawa_sphere_average(rij, rho, s);
        }
        averages[k] = value;
    }

    // normal equations of the two-parameter fit y = c_{-1}/rho + c_0
    double s11 = 0.0, s10 = 0.0, s00 = 0.0, b1 = 0.0, b0 = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double u = 1.0 / radii[k];
        s11 += u * u;
        s10 += u;
        s00 += 1.0;
        b1 += u * averages[k];
        b0 += averages[k];
    }
    const double det = s11 * s00 - s10 * s10;
    if (!(std::fabs(det) > 0.0)) throw DomainError("boundary_probe: degenerate radii set");
    const double charge = (b1 * s00 - b0 * s10) / det;
    const double regular = (s11 * b0 - s10 * b1) / det;

    double rss = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double dev = charge / radii[k] + regular - averages[k];
        rss += dev * dev;
    }
    return {charge, regular, std::sqrt(rss / static_cast<double>(radii.size()))};
}

} // namespace nlpoint
