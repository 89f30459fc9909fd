#pragma once

// Fixed-center model: center configuration, the boundary linear system
// M(lambda), its charge solve, and application of the free resolvent
// (h0 + lambda)^{-1} to an evaluation handle.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nlpoint/errors.hpp"
#include "nlpoint/geometry.hpp"
#include "nlpoint/kernels.hpp"
#include "nlpoint/quadrature.hpp"
#include "nlpoint/theta.hpp"

namespace nlpoint {

// N interaction centers with their strengths alpha_i and a shared range
// profile. An empty configuration is legal and means the free Hamiltonian;
// operations that need at least one center say so.
struct CenterConfig {
    std::vector<Vec3> centers;
    std::vector<double> strengths;
    ThetaProfile profile = ThetaProfile::exponential(1.0);
};

inline void validate_config(const CenterConfig& config) {
    if (config.centers.size() != config.strengths.size())
        throw DomainError("validate_config: center and strength counts differ");
    for (const Vec3& c : config.centers)
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z))
            throw DomainError("validate_config: non-finite center coordinate");
    for (double a : config.strengths)
        if (!std::isfinite(a)) throw DomainError("validate_config: non-finite strength");
    for (std::size_t i = 0; i < config.centers.size(); ++i)
        for (std::size_t j = i + 1; j < config.centers.size(); ++j)
            if (!(distance(config.centers[i], config.centers[j]) > 0.0))
                throw DomainError("validate_config: coincident centers");
}

inline double min_separation(const CenterConfig& config) {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < config.centers.size(); ++i)
        for (std::size_t j = i + 1; j < config.centers.size(); ++j)
            sep = std::min(sep, distance(config.centers[i], config.centers[j]));
    return sep;
}

struct BoundaryMatrix {
    double lambda;
    Eigen::MatrixXd entries;
};

namespace detail {

// Shared builder that also accepts lambda = 0, where the off-diagonal
// coupling degenerates to (theta(r) - 1)/r. The spectral search uses the
// zero-lambda matrix as the left end of its brackets.
inline BoundaryMatrix boundary_matrix_at(const CenterConfig& config, double lambda) {
    validate_config(config);
    if (config.centers.empty())
        throw DomainError("boundary_matrix: at least one center required");
    const std::size_t n = config.centers.size();
    const double root = std::sqrt(lambda);
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = config.strengths[i] + root;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = distance(config.centers[i], config.centers[j]);
            const double off = (theta_eval(config.profile, r) - std::exp(-root * r)) / r;
            m(i, j) = off;
            m(j, i) = off;
        }
    }
    return {lambda, std::move(m)};
}

} // namespace detail

inline BoundaryMatrix boundary_matrix(const CenterConfig& config, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("boundary_matrix requires lambda > 0");
    return detail::boundary_matrix_at(config, lambda);
}

// Solve M q = rhs through the spectral decomposition of the symmetric
// matrix. Near-singular M means lambda sits at (or next to) a point of the
// discrete spectrum, which callers must hear about; no regularization.
inline std::vector<double> solve_charges(const BoundaryMatrix& m, std::span<const double> rhs) {
    const Eigen::Index n = m.entries.rows();
    if (static_cast<Eigen::Index>(rhs.size()) != n)
        throw DomainError("solve_charges: rhs size does not match the matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries);
    if (es.info() != Eigen::Success)
        throw Error("solve_charges: eigendecomposition failed");
    const Eigen::VectorXd evals = es.eigenvalues();
    double sigma_min = std::numeric_limits<double>::infinity();
    double sigma_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sigma_min = std::min(sigma_min, std::fabs(evals[i]));
        sigma_max = std::max(sigma_max, std::fabs(evals[i]));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (sigma_min <= 50.0 * eps * sigma_max)
        throw SingularBoundaryMatrix("boundary matrix is singular at this lambda");
    const double cond = sigma_max / sigma_min;
    if (cond > 1e12)
        throw IllConditioned("boundary matrix too close to singular", cond);

    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
    auto apply_inverse = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        Eigen::VectorXd proj = es.eigenvectors().transpose() * v;
        proj.array() /= evals.array();
        return es.eigenvectors() * proj;
    };
    Eigen::VectorXd q = apply_inverse(b);
    const double rhs_norm = b.norm();
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd residual = b - m.entries * q;
        if (residual.norm() <= 1e-12 * rhs_norm) break;
        q += apply_inverse(residual);
    }
    if ((b - m.entries * q).norm() > 1e-12 * rhs_norm)
        throw IllConditioned("charge solve residual above tolerance", cond);
    return {q.data(), q.data() + n};
}

namespace detail {

// Average of f over the sphere |y - c| = r: Gauss-Legendre in cos(theta)
// crossed with a uniform grid in phi (trapezoid rule, exact for the low
// azimuthal modes). The order doubles until two levels agree.
class SphereAverager {
public:
    explicit SphereAverager(QuadratureSpec spec) : spec_(spec) {}

    template <class F>
    double operator()(F&& f, const Vec3& c, double r) {
        double coarse = at_order(f, c, r, hint_);
        for (int n = 2 * hint_; n <= kMaxOrder; n *= 2) {
            const double fine = at_order(f, c, r, n);
            if (std::fabs(fine - coarse) <= std::max(spec_.abs_tol, spec_.rel_tol * std::fabs(fine))) {
                hint_ = std::max(8, n / 2);
                return fine;
            }
            coarse = fine;
        }
        throw QuadratureError("sphere average did not settle at the order cap", 0.0);
    }

private:
    static constexpr int kMaxOrder = 96;

    template <class F>
    double at_order(F&& f, const Vec3& c, double r, int n) {
        const auto& [nodes, weights] = gauss_legendre(n);
        const int nphi = 2 * n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ct = nodes[i];
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            double ring = 0.0;
            for (int j = 0; j < nphi; ++j) {
                const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(nphi);
                ring += f(Vec3{c.x + r * st * std::cos(phi), c.y + r * st * std::sin(phi),
                               c.z + r * ct});
            }
            acc += weights[i] * ring / static_cast<double>(nphi);
        }
        return 0.5 * acc;
    }

    QuadratureSpec spec_;
    int hint_ = 8;
};

} // namespace detail

// [(h0 + lambda)^{-1} f](x) = (1/4pi) int g^lambda(|x-y|) f(y) d^3y, reduced
// to the radial integral int_0^inf r e^{-sqrt(lambda) r} Sf(x; r) dr over
// sphere averages Sf. Evaluation stops at r = 50/sqrt(lambda), where the
// screening factor alone is down to e^{-50}; f is expected to be localized
// on that scale. The angular averages run at a tolerance tightened by the
// radial weight's total mass 1/lambda, so both error sources stay inside
// the requested budget.
template <class F>
double free_resolvent_apply(F&& f, double lambda, const Vec3& x,
                            const QuadratureSpec& quad = {}) {
    if (!(lambda > 0.0)) throw DomainError("free_resolvent_apply requires lambda > 0");
    const double s = std::sqrt(lambda);
    const double r_max = 50.0 / s;

    QuadratureSpec angular{0.25 * quad.rel_tol, 0.25 * quad.abs_tol * lambda,
                           quad.max_intervals};
    detail::SphereAverager average(angular);
    auto radial = [&](double r) {
        if (r <= 0.0) return 0.0;
        return r * std::exp(-s * r) * average(f, x, r);
    };

    std::vector<double> breakpoints{0.0};
    for (double b = r_max / 512.0; b < r_max; b *= 2.0) breakpoints.push_back(b);
    breakpoints.push_back(r_max);
    QuadratureSpec radial_spec{0.5 * quad.rel_tol, 0.5 * quad.abs_tol, quad.max_intervals};
    return integrate_segments(radial, breakpoints, radial_spec);
}

} // namespace nlpoint
