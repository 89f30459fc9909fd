#pragma once

#include <cmath>
#include <span>

#include "nlpoint/errors.hpp"
#include "nlpoint/geometry.hpp"
#include "nlpoint/macdonald.hpp"
#include "nlpoint/theta.hpp"

// Green's kernels of -Delta + lambda in 3N dimensions, the screened-Coulomb
// pair g^lambda / delta_{lambda,theta}, and the pointwise coefficient
// functions of the many-body boundary condition. Units: hbar = 1 and the
// light-particle operator is -Delta (mass 1/2), so sqrt(lambda) is an
// inverse length.

namespace nlpoint {

struct MassModel {
    double m_light = 0.5;  // light mass m; the default matches the -Delta normalization
    double eta = 1.0;      // mass ratio m/M
};

inline double g_lambda(double r, double lambda) {
    if (!(r > 0.0)) throw DomainError("g_lambda requires r > 0");
    if (!(lambda > 0.0)) throw DomainError("g_lambda requires lambda > 0");
    return std::exp(-std::sqrt(lambda) * r) / r;
}

inline double delta_lambda_theta(const ThetaProfile& profile, double r, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("delta_lambda_theta requires lambda > 0");
    return (theta_eval(profile, r) - std::exp(-std::sqrt(lambda) * r)) / r;
}

// (-Delta + lambda)^{-1} kernel on R^{3N} between particle configurations:
//   (2 pi)^{-3N/2} (sqrt(lambda)/d)^{3N/2 - 1} K_{3N/2-1}(sqrt(lambda) d).
inline double green_free_kernel(std::span<const Vec3> x, std::span<const Vec3> y,
                                double lambda) {
    if (x.empty() || x.size() != y.size())
        throw DomainError("green_free_kernel requires matching nonempty configurations");
    if (!(lambda > 0.0)) throw DomainError("green_free_kernel requires lambda > 0");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += norm_sq(x[i] - y[i]);
    if (d2 == 0.0) throw DomainError("green_free_kernel: coincident configurations");
    const double dim = 3.0 * static_cast<double>(x.size());
    const double order = 0.5 * dim - 1.0;
    const double d = std::sqrt(d2);
    const double s = std::sqrt(lambda);
    return std::pow(2.0 * detail::kPi, -0.5 * dim) * std::pow(s / d, order)
           * macdonald_k(MacdonaldOrder(order), s * d);
}

// Kernel of the (N+1)-body operator with one light particle at x and N heavy
// ones at X, after scaling the heavy coordinates by the mass ratio eta:
// the metric becomes |x-y|^2 + eta |X-Y|^2 and the Macdonald order (3N+1)/2.
inline double green_mass_kernel(Vec3 x, std::span<const Vec3> X, Vec3 y,
                                std::span<const Vec3> Y, const MassModel& model,
                                double lambda) {
    if (X.empty() || X.size() != Y.size())
        throw DomainError("green_mass_kernel requires matching nonempty heavy configurations");
    if (!(model.eta > 0.0) || !(model.m_light > 0.0))
        throw DomainError("green_mass_kernel requires positive masses");
    if (!(lambda > 0.0)) throw DomainError("green_mass_kernel requires lambda > 0");
    const std::size_t n_heavy = X.size();
    double rho2 = norm_sq(x - y);
    for (std::size_t i = 0; i < n_heavy; ++i) rho2 += model.eta * norm_sq(X[i] - Y[i]);
    if (rho2 == 0.0) throw DomainError("green_mass_kernel: coincident configurations");
    const double order = 0.5 * (3.0 * static_cast<double>(n_heavy) + 1.0);
    const double rho = std::sqrt(rho2);
    const double s = std::sqrt(2.0 * model.m_light * lambda);
    return std::pow(model.eta, -1.5 * static_cast<double>(n_heavy))
           * std::pow(2.0 * detail::kPi, -1.5 * static_cast<double>(n_heavy + 1))
           * std::pow(s / rho, order) * macdonald_k(MacdonaldOrder(order), s * rho);
}

// Position-dependent coupling of the N-boson boundary condition at charge
// location z with the remaining N-2 particles as spectators:
//   A(z) = alpha + gamma sum_k theta(|y_k - z|)/|y_k - z|
//                + (gamma/2) sum_{k<l} theta(|y_k - y_l|)/|y_k - y_l|.
inline double a_function(Vec3 z, std::span<const Vec3> spectators, double alpha,
                         double gamma, const ThetaProfile& profile) {
    if (!(gamma >= 0.0)) throw DomainError("a_function requires gamma >= 0");
    double acc = alpha;
    for (std::size_t k = 0; k < spectators.size(); ++k) {
        const double rk = distance(spectators[k], z);
        if (rk == 0.0) throw DomainError("a_function: spectator coincides with z");
        acc += gamma * theta_eval(profile, rk) / rk;
        for (std::size_t l = k + 1; l < spectators.size(); ++l) {
            const double rkl = distance(spectators[k], spectators[l]);
            if (rkl == 0.0) throw DomainError("a_function: coincident spectators");
            acc += 0.5 * gamma * theta_eval(profile, rkl) / rkl;
        }
    }
    return acc;
}

// Pointwise action of the boundary operator B on supplied charge values:
//   (B xi)_i(z) = alpha_i xi_i + gamma sum_{k != i} theta(|x_k - z|)/|x_k - z| xi_k,
// where others lists the centers x_k for k != i in ascending k order.
inline double b_apply_point(std::size_t i, std::span<const double> xi_values, Vec3 z,
                            std::span<const Vec3> others, std::span<const double> alphas,
                            double gamma, const ThetaProfile& profile) {
    const std::size_t n = xi_values.size();
    if (alphas.size() != n || others.size() + 1 != n || i >= n)
        throw DomainError("b_apply_point: inconsistent argument sizes");
    if (!(gamma >= 0.0)) throw DomainError("b_apply_point requires gamma >= 0");
    double acc = alphas[i] * xi_values[i];
    std::size_t slot = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        const double rk = distance(others[slot], z);
        ++slot;
        if (rk == 0.0) throw DomainError("b_apply_point: center coincides with z");
        acc += gamma * theta_eval(profile, rk) / rk * xi_values[k];
    }
    return acc;
}

// Dirichlet-form weight: phi(x_1..x_N) = (1/4pi) sum_{i<j} e^{-m_D r_ij}/r_ij.
inline double phi_weight(std::span<const Vec3> config, double m_D) {
    if (!(m_D >= 0.0)) throw DomainError("phi_weight requires m_D >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        for (std::size_t j = i + 1; j < config.size(); ++j) {
            const double r = distance(config[i], config[j]);
            if (r == 0.0) throw DomainError("phi_weight: coincident points");
            acc += std::exp(-m_D * r) / r;
        }
    }
    return acc / (4.0 * detail::kPi);
}

} // namespace nlpoint
