#pragma once

// Boundary form of the (N+1)-body problem restricted to two heavy centers
// with separable Gaussian test charges. The alpha part of B is closed-form,
// the theta cross term reduces to one radial integral, the diagonal part of
// Xi to a 2-D radial integral, and only the 9-dimensional off-diagonal Xi
// term is sampled by Monte Carlo.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <thread>
#include <vector>

#include "nlpoint/constants.hpp"
#include "nlpoint/errors.hpp"
#include "nlpoint/kernels.hpp"
#include "nlpoint/quadrature.hpp"
#include "nlpoint/theta.hpp"

namespace nlpoint {

// Centered separable Gaussian charge on a coincidence hyperplane, given in
// momentum space as
//   xi_hat(p, P) = amplitude exp(-p^2/(2 width_p^2) - P^2/(2 width_P^2))
// with p conjugate to the light-heavy centroid and P to the spectator
// center. Fourier transforms are unitary, so position and momentum norms
// coincide; both closed forms are kept as a Plancherel cross-check.
struct GaussianCharge {
    double amplitude = 1.0;
    double width_p = 1.0;
    double width_P = 1.0;
    bool centered = true;

    double position_amplitude() const {
        return amplitude * width_p * width_p * width_p * width_P * width_P * width_P;
    }
    double norm_sq_momentum() const {
        const double pi_wp = detail::kPi * width_p * width_p;
        const double pi_wP = detail::kPi * width_P * width_P;
        return amplitude * amplitude * std::sqrt(pi_wp * pi_wp * pi_wp)
               * std::sqrt(pi_wP * pi_wP * pi_wP);
    }
    double norm_sq_position() const {
        const double c = position_amplitude();
        const double pi_up = detail::kPi / (width_p * width_p);
        const double pi_uP = detail::kPi / (width_P * width_P);
        return c * c * std::sqrt(pi_up * pi_up * pi_up) * std::sqrt(pi_uP * pi_uP * pi_uP);
    }
    double norm_sq() const { return norm_sq_momentum(); }
};

struct OffdiagonalEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct FormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t sample_count = 0;
    double xi_diagonal = 0.0;
    double xi_offdiagonal = 0.0;
    double b_alpha = 0.0;
    double b_theta = 0.0;
};

namespace detail {

inline void require_charge(const GaussianCharge& charge) {
    if (!std::isfinite(charge.amplitude))
        throw DomainError("gaussian charge amplitude must be finite");
    if (!(charge.width_p > 0.0) || !(charge.width_P > 0.0))
        throw DomainError("gaussian charge widths must be positive");
    if (!charge.centered)
        throw DomainError("form terms require centered charges (radial reduction)");
}

inline void require_model(const MassModel& model) {
    if (!(model.m_light > 0.0)) throw DomainError("mass model: m_light must be positive");
    if (!(model.eta >= 0.0)) throw DomainError("mass model: eta must be nonnegative");
}

// seed sequence for batch streams (splitmix64)
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Box-Muller on top of the mt19937_64 bit stream. Both pieces are pinned
// algorithms, unlike std::normal_distribution whose output is
// implementation-defined.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_positive();
        const double u2 = uniform_positive();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform_positive() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline int worker_count(int batches) {
    if (const char* env = std::getenv("NLPOINT_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || parsed < 1)
            throw ConfigError("NLPOINT_THREADS must be a positive integer");
        return static_cast<int>(parsed < batches ? parsed : batches);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    const int fallback = hw == 0 ? 1 : static_cast<int>(hw);
    return fallback < batches ? fallback : batches;
}

// fixed-tree pairwise sum, independent of the order batches finished in
inline double pairwise_sum(std::vector<double> values) {
    std::size_t n = values.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t k = 0; k + half < n; ++k) values[k] += values[k + half];
        n = half;
    }
    return values.empty() ? 0.0 : values[0];
}

struct Cholesky3 {
    double l11, l21, l31, l22, l32, l33;
};

// lower factor of the per-component precision matrix
//   M = diag(d1, d2, d3) + coupling * v v^T,  v = (1, 1, -1)
inline Cholesky3 charge_pair_cholesky(double d1, double d2, double d3, double coupling) {
    const double m11 = d1 + coupling, m21 = coupling, m31 = -coupling;
    const double m22 = d2 + coupling, m32 = -coupling;
    const double m33 = d3 + coupling;
    Cholesky3 c{};
    c.l11 = std::sqrt(m11);
    c.l21 = m21 / c.l11;
    c.l31 = m31 / c.l11;
    c.l22 = std::sqrt(m22 - c.l21 * c.l21);
    c.l32 = (m32 - c.l31 * c.l21) / c.l22;
    c.l33 = std::sqrt(m33 - c.l31 * c.l31 - c.l32 * c.l32);
    return c;
}

} // namespace detail

// Diagonal part of the Xi form for one charge:
//   int sqrt(eta p^2/(1+eta)^2 + eta P^2/(1+eta) + 2 m lambda/(1+eta)) |xi_hat|^2.
// eta == 0 is the frozen-heavy marker where the multiplier collapses to
// sqrt(2 m lambda) and the integral is the plain norm.
inline double xi_diagonal_term(const GaussianCharge& charge, const MassModel& model,
                               double lambda, const QuadratureSpec& quad = {}) {
    detail::require_charge(charge);
    detail::require_model(model);
    if (!(lambda > 0.0)) throw DomainError("xi_diagonal_term requires lambda > 0");
    const double two_m_lambda = 2.0 * model.m_light * lambda;
    if (model.eta == 0.0) return std::sqrt(two_m_lambda) * charge.norm_sq();

    const double one_plus = 1.0 + model.eta;
    const double cp = model.eta / (one_plus * one_plus);
    const double cP = model.eta / one_plus;
    const double c0 = two_m_lambda / one_plus;
    const double wp = charge.width_p, wP = charge.width_P;
    const QuadratureSpec inner{0.2 * quad.rel_tol, 0.0, quad.max_intervals};
    auto over_p = [&](double P) {
        const double shift = cP * P * P + c0;
        auto f = [&](double p) {
            return p * p * std::exp(-p * p / (wp * wp)) * std::sqrt(cp * p * p + shift);
        };
        const std::array<double, 4> head{0.0, wp, 2.0 * wp, 4.0 * wp};
        return integrate_half_line(f, head, wp, inner);
    };
    auto outer = [&](double P) {
        return P * P * std::exp(-P * P / (wP * wP)) * over_p(P);
    };
    const std::array<double, 4> head{0.0, wP, 2.0 * wP, 4.0 * wP};
    const double radial = integrate_half_line(outer, head, wP, quad);
    const double area = 4.0 * detail::kPi;
    return area * area * charge.amplitude * charge.amplitude * radial;
}

// Off-diagonal Xi form between the charges of the two hyperplanes,
//   -((1+eta)/2 pi^2) int dp dP dk  xi_i(p, P) xi_j(p - k + P, k)
//                                   / (|k - p|^2 + eta(k^2 + P^2) + 2 m lambda),
// estimated by importance sampling from the product of the two Gaussians.
// The 9-dimensional Gaussian factorizes per Cartesian component into a 3x3
// precision matrix, so samples come from one small Cholesky solve. Batches
// use independent mt19937_64 streams seeded by splitmix64 from the master
// seed, making the estimate reproducible for any worker-thread count.
inline OffdiagonalEstimate xi_offdiagonal_mc(const GaussianCharge& charge_i,
                                             const GaussianCharge& charge_j,
                                             const MassModel& model, double lambda,
                                             std::int64_t samples, std::uint64_t seed) {
    detail::require_charge(charge_i);
    detail::require_charge(charge_j);
    detail::require_model(model);
    if (!(lambda > 0.0)) throw DomainError("xi_offdiagonal_mc requires lambda > 0");
    if (samples < 10000) throw DomainError("xi_offdiagonal_mc requires at least 1e4 samples");

    const double d1 = 1.0 / (charge_i.width_p * charge_i.width_p);
    const double d2 = 1.0 / (charge_i.width_P * charge_i.width_P);
    const double d3 = 1.0 / (charge_j.width_P * charge_j.width_P);
    const double coupling = 1.0 / (charge_j.width_p * charge_j.width_p);
    const auto chol = detail::charge_pair_cholesky(d1, d2, d3, coupling);

    const double det3 = chol.l11 * chol.l22 * chol.l33;
    const double gauss_mass = charge_i.amplitude * charge_j.amplitude
                              * std::pow(detail::kTwoPi, 4.5) / (det3 * det3 * det3);
    const double prefactor = -(1.0 + model.eta) / (2.0 * detail::kPi * detail::kPi) * gauss_mass;

    const double eta = model.eta;
    const double two_m_lambda = 2.0 * model.m_light * lambda;
    constexpr int kBatches = 64;
    const std::int64_t per_batch = (samples + kBatches - 1) / kBatches;

    std::array<std::uint64_t, kBatches> batch_seeds{};
    std::uint64_t state = seed;
    for (auto& s : batch_seeds) s = detail::splitmix64_next(state);

    std::array<double, kBatches> batch_means{};
    auto run_batch = [&](int b) {
        detail::NormalStream normals(batch_seeds[static_cast<std::size_t>(b)]);
        double acc = 0.0, comp = 0.0;
        for (std::int64_t s = 0; s < per_batch; ++s) {
            double p[3], heavy[3], k[3];
            for (int c = 0; c < 3; ++c) {
                const double z1 = normals.next(), z2 = normals.next(), z3 = normals.next();
                // solve L^T x = z so that Cov(x) = M^{-1}
                k[c] = z3 / chol.l33;
                heavy[c] = (z2 - chol.l32 * k[c]) / chol.l22;
                p[c] = (z1 - chol.l21 * heavy[c] - chol.l31 * k[c]) / chol.l11;
            }
            double transfer = 0.0, kinetic = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double diff = k[c] - p[c];
                transfer += diff * diff;
                kinetic += k[c] * k[c] + heavy[c] * heavy[c];
            }
            const double term = 1.0 / (transfer + eta * kinetic + two_m_lambda);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        batch_means[static_cast<std::size_t>(b)] = acc / static_cast<double>(per_batch);
    };

    const int workers = detail::worker_count(kBatches);
    if (workers <= 1) {
        for (int b = 0; b < kBatches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int b = t; b < kBatches; b += workers) run_batch(b);
            });
        for (auto& th : pool) th.join();
    }

    const double mean =
        detail::pairwise_sum({batch_means.begin(), batch_means.end()}) / kBatches;
    std::vector<double> sq(kBatches);
    for (int b = 0; b < kBatches; ++b) {
        const double d = batch_means[static_cast<std::size_t>(b)] - mean;
        sq[static_cast<std::size_t>(b)] = d * d;
    }
    const double var_of_mean = detail::pairwise_sum(std::move(sq)) / (kBatches * (kBatches - 1.0));
    return {prefactor * mean, std::fabs(prefactor) * std::sqrt(var_of_mean)};
}

namespace detail {

// theta cross term of B after marginalizing the Gaussians:
//   2 gamma C_i C_j (pi/(a+b))^{3/2} 4 pi int_0^inf u theta(u) e^{-c u^2} du
// with a, b the summed position exponents and c = ab/(a+b).
inline double b_theta_cross(const GaussianCharge& charge_i, const GaussianCharge& charge_j,
                            double gamma, const ThetaProfile& profile,
                            const QuadratureSpec& quad) {
    if (gamma == 0.0 || profile.kind == ThetaKind::LocalZero) return 0.0;
    const double a = 0.5 * (charge_i.width_p * charge_i.width_p
                            + charge_j.width_p * charge_j.width_p);
    const double b = 0.5 * (charge_i.width_P * charge_i.width_P
                            + charge_j.width_P * charge_j.width_P);
    const double c = a * b / (a + b);
    auto f = [&](double u) { return u * theta_eval(profile, u) * std::exp(-c * u * u); };
    double radial = 0.0;
    if (profile.kind == ThetaKind::Exponential) {
        const double scale = std::fmin(profile.b, 1.0 / std::sqrt(c));
        const std::array<double, 4> head{0.0, scale, 2.0 * scale, 4.0 * scale};
        radial = integrate_half_line(f, head, scale, quad);
    } else {
        radial = integrate(f, 0.0, profile.b, quad);
    }
    const double shared = detail::kPi / (a + b);
    return 2.0 * gamma * charge_i.position_amplitude() * charge_j.position_amplitude()
           * std::sqrt(shared * shared * shared) * 4.0 * detail::kPi * radial;
}

} // namespace detail

// Full B form for the pair: alpha_1 ||xi_1||^2 + alpha_2 ||xi_2||^2 plus the
// theta cross term. The cross term pairs xi_i and xi_j at the same arguments,
// following the boundary operator display literally.
inline double b_form_term(const GaussianCharge& charge_i, const GaussianCharge& charge_j,
                          const std::array<double, 2>& alphas, double gamma,
                          const ThetaProfile& profile, const QuadratureSpec& quad = {}) {
    detail::require_charge(charge_i);
    detail::require_charge(charge_j);
    if (!(gamma >= 0.0)) throw DomainError("b_form_term requires gamma >= 0");
    if (!std::isfinite(alphas[0]) || !std::isfinite(alphas[1]))
        throw DomainError("b_form_term requires finite alphas");
    return alphas[0] * charge_i.norm_sq() + alphas[1] * charge_j.norm_sq()
           + detail::b_theta_cross(charge_i, charge_j, gamma, profile, quad);
}

// Assembles the boundary form value for the two-charge probe. The two
// off-diagonal orientations get independent seed streams; their estimates
// are summed and the errors combined in quadrature.
inline FormEstimate phi_form_estimate(const std::array<GaussianCharge, 2>& charges,
                                      const std::array<double, 2>& alphas, double gamma,
                                      const ThetaProfile& profile, const MassModel& model,
                                      double lambda, std::int64_t samples, std::uint64_t seed,
                                      const QuadratureSpec& quad = {}) {
    FormEstimate est;
    est.xi_diagonal = xi_diagonal_term(charges[0], model, lambda, quad)
                      + xi_diagonal_term(charges[1], model, lambda, quad);

    std::uint64_t state = seed;
    const std::uint64_t seed_ij = detail::splitmix64_next(state);
    const std::uint64_t seed_ji = detail::splitmix64_next(state);
    const auto off_ij = xi_offdiagonal_mc(charges[0], charges[1], model, lambda, samples, seed_ij);
    const auto off_ji = xi_offdiagonal_mc(charges[1], charges[0], model, lambda, samples, seed_ji);
    est.xi_offdiagonal = off_ij.value + off_ji.value;
    est.std_error = std::sqrt(off_ij.std_error * off_ij.std_error
                              + off_ji.std_error * off_ji.std_error);

    if (!std::isfinite(alphas[0]) || !std::isfinite(alphas[1]))
        throw DomainError("phi_form_estimate requires finite alphas");
    if (!(gamma >= 0.0)) throw DomainError("phi_form_estimate requires gamma >= 0");
    est.b_alpha = alphas[0] * charges[0].norm_sq() + alphas[1] * charges[1].norm_sq();
    est.b_theta = detail::b_theta_cross(charges[0], charges[1], gamma, profile, quad);

    constexpr std::int64_t kBatches = 64;
    est.sample_count = 2 * kBatches * ((samples + kBatches - 1) / kBatches);
    est.value = est.xi_diagonal + est.xi_offdiagonal + est.b_alpha + est.b_theta;
    return est;
}

} // namespace nlpoint
