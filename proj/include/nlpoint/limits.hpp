#pragma once

// Two centers merging into one, the theta == 0 pathology where the pair
// falls to the center, and the proof-level integral identities.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "nlpoint/constants.hpp"
#include "nlpoint/errors.hpp"
#include "nlpoint/pointop.hpp"
#include "nlpoint/quadrature.hpp"
#include "nlpoint/spectral.hpp"
#include "nlpoint/theta.hpp"

namespace nlpoint {

// Outcome of sending the separation to zero: a single effective center, the
// free Hamiltonian, or a combination outside the merge formula's hypotheses.
struct EffectiveAlpha {
    double value;
};
struct FreeLimit {};
struct DegenerateMerge {};
using MergeOutcome = std::variant<EffectiveAlpha, FreeLimit, DegenerateMerge>;

inline MergeOutcome effective_alpha_merge(double alpha1, double alpha2, double theta_prime0) {
    if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || !std::isfinite(theta_prime0))
        throw DomainError("effective_alpha_merge: non-finite input");
    const double denom = alpha1 + alpha2 - 2.0 * theta_prime0;
    if (denom != 0.0)
        return EffectiveAlpha{(alpha1 * alpha2 - theta_prime0 * theta_prime0) / denom};
    if (theta_prime0 == 0.0) return FreeLimit{};
    return DegenerateMerge{};
}

struct MergeScanResult {
    std::vector<double> radii;
    std::vector<double> ground_energies;
    std::vector<double> charge_sums;
    double predicted_alpha = std::numeric_limits<double>::quiet_NaN();
    double predicted_energy = std::numeric_limits<double>::quiet_NaN();
};

// Scans two centers at separations R with a fixed unit Gaussian source
// exp(-|y|^2/2) planted at the merge point. ground_energies records the
// branch that survives the merge: any admissible profile also produces a
// deeper two-center state whose energy escapes to -infinity as R -> 0
// (its eigencurve root runs away with theta(R)/R), so the deepest state is
// the wrong object to follow; the convergent branch is the shallowest one.
// Charges come from the boundary solve at lambda_probe directly; that stays
// meaningful in the spectral gap above the escaping state.
inline MergeScanResult merge_scan(double alpha1, double alpha2, const ThetaProfile& profile,
                                  std::span<const double> radii, double lambda_probe,
                                  const QuadratureSpec& quad = {}) {
    if (radii.empty()) throw DomainError("merge_scan: empty radius list");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(radii[k] > 0.0)) throw DomainError("merge_scan: radii must be positive");
        if (k > 0 && !(radii[k] < radii[k - 1]))
            throw DomainError("merge_scan: radii must decrease strictly");
    }
    if (!(lambda_probe > 0.0)) throw DomainError("merge_scan requires lambda_probe > 0");

    auto f = [](const Vec3& y) { return std::exp(-0.5 * norm_sq(y)); };
    MergeScanResult result;
    result.radii.assign(radii.begin(), radii.end());

    const MergeOutcome outcome = effective_alpha_merge(alpha1, alpha2, profile.derivative_at_zero);
    if (const auto* eff = std::get_if<EffectiveAlpha>(&outcome)) {
        result.predicted_alpha = eff->value;
        if (eff->value < 0.0) result.predicted_energy = -eff->value * eff->value;
    }

    for (double R : radii) {
        CenterConfig config;
        config.centers = {{0.0, 0.0, 0.0}, {R, 0.0, 0.0}};
        config.strengths = {alpha1, alpha2};
        config.profile = profile;

        auto spectrum = bound_states(config, 1.0);
        result.ground_energies.push_back(spectrum.energies.empty()
                                             ? std::numeric_limits<double>::quiet_NaN()
                                             : spectrum.energies.back());

        std::array<double, 2> rhs{free_resolvent_apply(f, lambda_probe, config.centers[0], quad),
                                  free_resolvent_apply(f, lambda_probe, config.centers[1], quad)};
        auto q = solve_charges(boundary_matrix(config, lambda_probe), rhs);
        result.charge_sums.push_back(q[0] + q[1]);
    }
    return result;
}

struct LocalDecayResult {
    std::vector<double> charge_norms;
    std::vector<double> lambdas_used;
};

// Charge decay for the local pathology theta == 0. The requested lambda is
// kept whenever the boundary matrix is usable there; if it sits on (or
// numerically too close to) an eigencurve root the solve refuses, and the
// scan doubles lambda until it succeeds, reporting what it used.
inline LocalDecayResult local_decay_scan(std::array<double, 2> alpha,
                                         std::span<const double> radii, double lambda,
                                         const std::function<double(const Vec3&)>& f,
                                         const QuadratureSpec& quad = {}) {
    if (!(lambda > 0.0)) throw DomainError("local_decay_scan requires lambda > 0");
    if (!f) throw DomainError("local_decay_scan: empty source handle");
    for (double R : radii)
        if (!(R > 0.0)) throw DomainError("local_decay_scan: radii must be positive");

    LocalDecayResult result;
    for (double R : radii) {
        CenterConfig config;
        config.centers = {{0.0, 0.0, 0.0}, {R, 0.0, 0.0}};
        config.strengths = {alpha[0], alpha[1]};
        config.profile = ThetaProfile::local_zero();

        double used = lambda;
        for (int attempt = 0;; ++attempt) {
            try {
                std::array<double, 2> rhs{
                    free_resolvent_apply(f, used, config.centers[0], quad),
                    free_resolvent_apply(f, used, config.centers[1], quad)};
                auto q = solve_charges(boundary_matrix(config, used), rhs);
                result.charge_norms.push_back(std::sqrt(q[0] * q[0] + q[1] * q[1]));
                result.lambdas_used.push_back(used);
                break;
            } catch (const SingularBoundaryMatrix&) {
            } catch (const IllConditioned&) {
            }
            if (attempt >= 60) throw Error("local_decay_scan: no usable lambda found");
            used *= 2.0;
        }
    }
    return result;
}

// ||g^lambda(.-x2) - g^lambda(.-x1)||^2 at separation R, closed form.
inline double g_shift_norm(double R, double lambda) {
    if (!(R > 0.0)) throw DomainError("g_shift_norm requires R > 0");
    if (!(lambda > 0.0)) throw DomainError("g_shift_norm requires lambda > 0");
    const double s = std::sqrt(lambda);
    return 4.0 * detail::kPi / s * (1.0 - std::exp(-s * R));
}

// Same quantity from the momentum side: the kernel transform is
// 4 pi/(p^2+lambda), and the shift contributes 2(1 - sin(pR)/(pR)).
inline double g_shift_norm_quadrature(double R, double lambda, const QuadratureSpec& quad = {}) {
    if (!(R > 0.0)) throw DomainError("g_shift_norm_quadrature requires R > 0");
    if (!(lambda > 0.0)) throw DomainError("g_shift_norm_quadrature requires lambda > 0");
    const double s = std::sqrt(lambda);
    auto flat = [lambda](double p) {
        const double d = p * p + lambda;
        return p * p / (d * d);
    };
    const std::array<double, 4> head{0.0, s, 2.0 * s, 4.0 * s};
    const double plain = integrate_half_line(flat, head, s, quad);
    auto damped = [lambda](double p) {
        const double d = p * p + lambda;
        return p / (d * d);
    };
    // p/(p^2+lambda)^2 peaks at sqrt(lambda/3) and decays monotonically after
    const double sine = sine_integral_half_line(damped, R, std::sqrt(lambda / 3.0), quad);
    return 16.0 * (plain - sine / R);
}

enum class Identity { momentum_double, log_integral, eta_sqrt_bound };

struct IdentityParams {
    Vec3 k{0.0, 0.0, 0.0};        // momentum_double
    Vec3 k_prime{1.0, 0.0, 0.0};  // momentum_double
    double a = 1.0;               // log_integral
    double eta = 1.0;             // eta_sqrt_bound
    double lambda = 1.0;          // eta_sqrt_bound
};

// reference is the closed-form side (the majorant for the bound identity);
// rel_error = (computed - reference)/reference, so the bound identity is
// satisfied when rel_error <= 0.
struct IdentityReport {
    double reference;
    double computed;
    double rel_error;
};

namespace detail {

inline IdentityReport momentum_double_report(const IdentityParams& params,
                                             const QuadratureSpec& quad) {
    const double d = distance(params.k, params.k_prime);
    if (!(d > 0.0)) throw DomainError("verify_identity: coincident momenta");
    QuadratureSpec inner{0.2 * quad.rel_tol, 0.0, quad.max_intervals};
    // angular integral done numerically on purpose; collapsing it to the
    // logarithm would just reproduce the log_integral route.  Parametrized by
    // v = 1 - cos so the denominator is a sum of nonnegative terms; the naive
    // q^2 + d^2 - 2qd cos cancels catastrophically when q is close to d.
    auto shell = [&](double q) {
        const double gap = (q - d) * (q - d);
        const double c = 2.0 * q * d;
        auto over_angle = [gap, c](double v) { return 1.0 / (gap + c * v); };
        return integrate(over_angle, 0.0, 2.0, inner);
    };
    const std::array<double, 6> head{0.0, 0.5 * d, d, 1.5 * d, 2.0 * d, 4.0 * d};
    const double computed = kTwoPi * integrate_half_line(shell, head, d, quad);
    const double reference = kPi * kPi * kPi / d;
    return {reference, computed, (computed - reference) / reference};
}

inline IdentityReport log_integral_report(const IdentityParams& params,
                                          const QuadratureSpec& quad) {
    const double a = params.a;
    if (!(a > 0.0)) throw DomainError("verify_identity: scale a must be positive");
    auto integrand = [a](double p) { return std::log((p + a) / std::fabs(p - a)) / p; };
    const std::array<double, 5> head{0.0, 0.5 * a, a, 2.0 * a, 4.0 * a};
    const double computed = integrate_half_line(integrand, head, a, quad);
    const double reference = 0.5 * kPi * kPi;
    return {reference, computed, (computed - reference) / reference};
}

inline IdentityReport eta_sqrt_bound_report(const IdentityParams& params,
                                            const QuadratureSpec& quad) {
    const double eta = params.eta;
    const double lambda = params.lambda;
    if (!(eta > 0.0)) throw DomainError("verify_identity: eta must be positive");
    if (!(lambda > 0.0)) throw DomainError("verify_identity: lambda must be positive");
    const double opet = 1.0 + eta;
    const double root_lambda = std::sqrt(lambda);

    // unit Gaussian charge, transform exp(-(p^2+P^2)/2) on R^3 x R^3
    const std::array<double, 7> cut{0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0};
    QuadratureSpec inner{0.2 * quad.rel_tol, 0.0, quad.max_intervals};
    auto outer = [&](double P) {
        const double P2 = P * P;
        auto along_p = [&](double p) {
            const double p2 = p * p;
            const double shifted = std::sqrt(eta * p2 / (opet * opet) + eta * P2 / opet
                                             + lambda / opet)
                                   - root_lambda;
            return p2 * shifted * shifted * std::exp(-p2);
        };
        return P2 * std::exp(-P2) * integrate_segments(along_p, cut, inner);
    };
    const double lhs_sq = 16.0 * kPi * kPi * integrate_segments(outer, cut, quad);

    const double norm_sq = kPi * kPi * kPi;           // ||xi||^2
    const double grad_sq = 3.0 * norm_sq;             // ||grad xi||^2
    const double reference = std::sqrt(eta) * std::sqrt(norm_sq + grad_sq)
                             + eta * root_lambda * std::sqrt(norm_sq);
    const double computed = std::sqrt(lhs_sq);
    return {reference, computed, (computed - reference) / reference};
}

} // namespace detail

inline IdentityReport verify_identity(Identity id, const IdentityParams& params,
                                      const QuadratureSpec& quad = {}) {
    switch (id) {
        case Identity::momentum_double: return detail::momentum_double_report(params, quad);
        case Identity::log_integral: return detail::log_integral_report(params, quad);
        case Identity::eta_sqrt_bound: return detail::eta_sqrt_bound_report(params, quad);
    }
    throw DomainError("verify_identity: unknown identity");
}

} // namespace nlpoint
