#pragma once

// Discrete spectrum of the fixed-center model through the boundary matrix:
// an energy -lambda* exists exactly where M(lambda*) becomes singular, and
// M'(lambda) = (2 sqrt(lambda))^{-1} E with E_ij = e^{-sqrt(lambda) r_ij}
// positive definite, so every eigencurve of M is strictly increasing in
// lambda. That makes sorted eigenvalue curves monotone too, gives each
// curve at most one root, and certifies the bisection brackets below.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "nlpoint/errors.hpp"
#include "nlpoint/pointop.hpp"

namespace nlpoint {

struct SpectralResult {
    std::vector<double> energies;                    // sorted ascending, each < 0
    std::vector<std::vector<double>> charge_vectors; // unit null vectors of M(-E)
    double lambda0 = 0.0;                            // h >= -lambda0
};

namespace detail {

struct EigenPairs {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // columns aligned with values
};

inline EigenPairs boundary_spectrum(const CenterConfig& config, double lambda) {
    const BoundaryMatrix m = boundary_matrix_at(config, lambda);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries);
    if (es.info() != Eigen::Success)
        throw Error("boundary matrix eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double sorted_eigenvalue(const CenterConfig& config, std::size_t k, double lambda) {
    return boundary_spectrum(config, lambda).values[static_cast<Eigen::Index>(k)];
}

} // namespace detail

// k-th smallest eigenvalue of M(lambda) along the grid. Sorted order is
// the continuity matching for the values: curves of the analytic family
// can only trade sorted positions where they are equal, so the k-th sorted
// value is itself a continuous, nondecreasing function of lambda. Vector
// identity through degeneracies is resolved where it matters, in the null
// vectors reported by bound_states.
inline std::vector<double> eigencurve(const CenterConfig& config, std::size_t k,
                                      std::span<const double> lambda_grid) {
    validate_config(config);
    if (config.centers.empty()) throw DomainError("eigencurve: at least one center required");
    if (k >= config.centers.size()) throw DomainError("eigencurve: index out of range");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0)) throw DomainError("eigencurve: grid values must be positive");
        if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
            throw DomainError("eigencurve: grid must increase strictly");
    }
    std::vector<double> curve;
    curve.reserve(lambda_grid.size());
    for (double lambda : lambda_grid)
        curve.push_back(detail::sorted_eigenvalue(config, k, lambda));
    return curve;
}

// All bound states: the k-th sorted eigencurve has a root iff it starts
// negative at lambda = 0, and monotonicity localizes that root uniquely.
// The expansion cap is defensive only; the diagonal alpha_i + sqrt(lambda)
// grows without bound while the off-diagonal entries stay bounded by
// 1/min_separation, so every curve eventually turns positive.
inline SpectralResult bound_states(const CenterConfig& config, double lambda_max) {
    validate_config(config);
    if (config.centers.empty())
        throw DomainError("bound_states: at least one center required");
    if (!(lambda_max > 0.0)) throw DomainError("bound_states requires lambda_max > 0");
    const std::size_t n = config.centers.size();

    const detail::EigenPairs at_zero = detail::boundary_spectrum(config, 0.0);
    std::vector<std::pair<double, std::size_t>> roots; // (lambda*, curve index)
    for (std::size_t k = 0; k < n; ++k) {
        if (!(at_zero.values[static_cast<Eigen::Index>(k)] < 0.0)) continue;
        double hi = lambda_max;
        int expansions = 0;
        while (detail::sorted_eigenvalue(config, k, hi) < 0.0) {
            if (++expansions > 60)
                throw MaxExpansionExceeded("eigencurve still negative at the expansion cap");
            hi *= 2.0;
        }
        double lo = 0.0;
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (detail::sorted_eigenvalue(config, k, mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        roots.emplace_back(0.5 * (lo + hi), k);
    }

    std::sort(roots.begin(), roots.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    SpectralResult result;
    for (const auto& [lambda_star, k] : roots) {
        const detail::EigenPairs pairs = detail::boundary_spectrum(config, lambda_star);
        result.energies.push_back(-lambda_star);
        const auto col = pairs.vectors.col(static_cast<Eigen::Index>(k));
        result.charge_vectors.emplace_back(col.data(), col.data() + n);
    }
    result.lambda0 = roots.empty() ? 0.0 : roots.front().first;
    return result;
}

// Semiboundedness threshold: h >= -lambda0, with lambda0 the infimum of
// lambda with M(lambda) positive definite. By monotonicity that is the
// deepest eigencurve root, or 0 when M(0) already has no negative
// eigenvalue. The identification of the threshold with the deepest root is
// the standard resolvent-theory reading for fixed centers.
inline double lower_bound(const CenterConfig& config) {
    return bound_states(config, 1.0).lambda0;
}

// Two-body scattering length a = -1/alpha; the unitary limit alpha = 0
// maps to signed infinity, and an infinite strength scatters trivially.
inline double scattering_length(double alpha) {
    if (std::isinf(alpha)) return 0.0;
    return -1.0 / alpha;
}

} // namespace nlpoint
