#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nlpoint/resolvent.hpp"

using nlpoint::CenterConfig;
using nlpoint::Vec3;

namespace {

double gaussian_at(const Vec3& y, const Vec3& c, double sigma) {
    const double d2 = (y.x - c.x) * (y.x - c.x) + (y.y - c.y) * (y.y - c.y)
                      + (y.z - c.z) * (y.z - c.z);
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

std::vector<double> log_radii(double lo, double hi, int n) {
    // strictly decreasing, as boundary_probe wants them
    std::vector<double> radii(n);
    for (int k = 0; k < n; ++k)
        radii[k] = hi * std::pow(lo / hi, double(k) / double(n - 1));
    return radii;
}

} // namespace

TEST_CASE("free-case output reproduces the free resolvent") {
    CenterConfig empty;
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.0, 0.0, 0.0}, 1.0); };
    auto out = nlpoint::resolvent_apply(empty, 1.0, f);
    REQUIRE(out.charges.empty());
    const Vec3 x{0.5, 0.0, 0.0};
    const double direct = nlpoint::free_resolvent_apply(f, 1.0, x);
    REQUIRE(out.smooth_part(x) == direct);
    REQUIRE(nlpoint::field_value(out, empty, x) == direct);
}

TEST_CASE("single-center charge matches the boundary solve in closed form") {
    // Unit Gaussian source centered on the single interaction point. The
    // smooth field at the center is int_0^inf r e^{-1.5 r} e^{-r^2/2} dr
    // and the charge divides it by alpha + sqrt(lambda) = 1/2.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}};
    config.strengths = {-1.0};
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.0, 0.0, 0.0}, 1.0); };

    auto out = nlpoint::resolvent_apply(config, 2.25, f);
    REQUIRE(out.lambda == 2.25);
    REQUIRE(out.charges.size() == 1);
    REQUIRE(out.charges[0] == Catch::Approx(0.45255308534610993).epsilon(1e-8));

    // full field = smooth + q g at a point off the center
    const Vec3 x{0.3, -0.2, 0.1};
    const double expected = out.smooth_part(x)
                            + out.charges[0] * nlpoint::g_lambda(nlpoint::norm(x), 2.25);
    REQUIRE(nlpoint::field_value(out, config, x) == Catch::Approx(expected).epsilon(1e-14));
}

TEST_CASE("synthetic pure-tail field probes back charge and decay") {
    // Field with no smooth component: q e^{-s rho} / rho averages to itself,
    // so the fit must recover c_{-1} = q and c_0 = -s q up to the O(rho)
    // remainder of the exponential.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}};
    config.strengths = {-1.0};
    nlpoint::ResolventOutput out;
    out.charges = {0.8};
    out.lambda = 2.25;
    out.smooth_part = [](const Vec3&) { return 0.0; };
    out.source = [](const Vec3&) { return 0.0; };

    auto radii = log_radii(1e-4, 1e-3, 8);
    auto probe = nlpoint::boundary_probe(out, config, 0, radii);
    REQUIRE(probe.charge_estimate == Catch::Approx(0.8).margin(2e-6));
    REQUIRE(probe.regular_estimate == Catch::Approx(-1.5 * 0.8).margin(2e-3));
    REQUIRE(probe.fit_residual < 1e-3);
}

TEST_CASE("probe recovers the single-center boundary relation") {
    // Regular part of the field at the center must equal alpha times the
    // charge; the probe reads both off the computed resolvent.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}};
    config.strengths = {-1.0};
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.2, 0.1, -0.3}, 0.8); };

    auto out = nlpoint::resolvent_apply(config, 4.0, f);
    const double q = out.charges[0];
    REQUIRE(q > 0.0);

    auto probe = nlpoint::boundary_probe(out, config, 0, log_radii(2e-4, 2e-3, 8));
    REQUIRE(probe.charge_estimate == Catch::Approx(q).epsilon(1e-2));
    REQUIRE(probe.regular_estimate == Catch::Approx(-1.0 * q).epsilon(1e-2));
    REQUIRE(probe.fit_residual < 1e-2 * std::fabs(q));
}

TEST_CASE("two-center probe reads the generalized boundary condition") {
    // With a saturated profile across the pair, the regular part at center i
    // is alpha_i q_i + theta(r) q_j / r. Checked at both centers.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    config.strengths = {-1.0, -0.7};
    config.profile = nlpoint::ThetaProfile::indicator(2.0);
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.2, 0.1, -0.3}, 0.8); };

    auto out = nlpoint::resolvent_apply(config, 4.0, f);
    REQUIRE(out.charges.size() == 2);
    auto radii = log_radii(2e-4, 2e-3, 8);
    for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t j = 1 - i;
        auto probe = nlpoint::boundary_probe(out, config, i, radii);
        const double expected = config.strengths[i] * out.charges[i] + out.charges[j];
        REQUIRE(probe.charge_estimate == Catch::Approx(out.charges[i]).epsilon(1.5e-2));
        REQUIRE(probe.regular_estimate == Catch::Approx(expected).epsilon(1.5e-2));
    }
}

TEST_CASE("field solves the equation away from the centers") {
    // Second-difference Laplacian on the full field: (-Delta + lambda) psi
    // should reproduce the source where the field is smooth.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}};
    config.strengths = {-1.0};
    const double lambda = 4.0;
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.2, 0.1, -0.3}, 0.8); };
    auto out = nlpoint::resolvent_apply(config, lambda, f);

    // step balances second-difference truncation (the screened tail has
    // large fourth derivatives at moderate distance) against quadrature
    // noise amplified by 1/h^2
    const double h = 0.005;
    for (const Vec3& x : {Vec3{0.9, 0.3, -0.2}, Vec3{-0.5, 0.6, 0.4}}) {
        const double center = nlpoint::field_value(out, config, x);
        double sum_neighbors = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            for (double step : {-h, h}) {
                Vec3 xs = x;
                (axis == 0 ? xs.x : axis == 1 ? xs.y : xs.z) += step;
                sum_neighbors += nlpoint::field_value(out, config, xs);
            }
        }
        const double minus_laplacian = (6.0 * center - sum_neighbors) / (h * h);
        const double residual = minus_laplacian + lambda * center - f(x);
        REQUIRE(std::fabs(residual) < 1e-4 * std::fabs(f(x)));
    }
}

TEST_CASE("resolvent difference composes through the first identity") {
    // (h+l)^{-1} - (h+l')^{-1} = (l'-l) (h+l)^{-1} (h+l')^{-1}. The right
    // side is assembled from closed forms: the free composition telescopes
    // to (w - w')/(l'-l) and the composed tails to (g^l - g^{l'})/(l'-l),
    // leaving one boundary solve for the composed charges.
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    config.strengths = {-1.0, -0.7};
    config.profile = nlpoint::ThetaProfile::indicator(2.0);
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.2, 0.1, -0.3}, 0.8); };

    const double l = 4.0, lp = 9.0;
    const double s = std::sqrt(l), sp = std::sqrt(lp);
    auto out = nlpoint::resolvent_apply(config, l, f);
    auto outp = nlpoint::resolvent_apply(config, lp, f);

    // g-composition sphere value, finite at r = 0
    auto g_composed = [&](double r) {
        if (r < 1e-12) return 1.0 / (s + sp);
        return (std::exp(-s * r) - std::exp(-sp * r)) / (r * (lp - l));
    };
    auto w_composed = [&](const Vec3& x) {
        double value = (out.smooth_part(x) - outp.smooth_part(x)) / (lp - l);
        for (std::size_t j = 0; j < 2; ++j)
            value += outp.charges[j] * g_composed(nlpoint::distance(x, config.centers[j]));
        return value;
    };
    std::vector<double> rhs{w_composed(config.centers[0]), w_composed(config.centers[1])};
    auto composed = nlpoint::solve_charges(nlpoint::boundary_matrix(config, l), rhs);

    for (const Vec3& x : {Vec3{0.4, 0.3, 0.2}, Vec3{-0.6, 0.5, -0.1}}) {
        const double lhs = nlpoint::field_value(out, config, x)
                           - nlpoint::field_value(outp, config, x);
        double rhs_field = w_composed(x);
        for (std::size_t j = 0; j < 2; ++j)
            rhs_field += composed[j]
                         * nlpoint::g_lambda(nlpoint::distance(x, config.centers[j]), l);
        REQUIRE(lhs == Catch::Approx((lp - l) * rhs_field).epsilon(1e-7).margin(1e-9));
    }
}

TEST_CASE("resolvent rejects invalid inputs") {
    CenterConfig config;
    config.centers = {{0.0, 0.0, 0.0}};
    config.strengths = {-2.0};
    auto f = [](const Vec3& y) { return gaussian_at(y, {0.0, 0.0, 0.0}, 1.0); };

    REQUIRE_THROWS_AS(nlpoint::resolvent_apply(config, 0.0, f), nlpoint::DomainError);
    REQUIRE_THROWS_AS(nlpoint::resolvent_apply(config, -1.0, f), nlpoint::DomainError);
    // alpha = -2 binds at energy -4, so lambda = 1 sits below the spectrum
    REQUIRE_THROWS_AS(nlpoint::resolvent_apply(config, 1.0, f), nlpoint::BelowSpectrumError);
    REQUIRE_THROWS_AS(
        nlpoint::resolvent_apply(config, 5.0, std::function<double(const Vec3&)>{}),
        nlpoint::DomainError);

    auto out = nlpoint::resolvent_apply(config, 5.0, f);
    const std::vector<double> fine{2e-3, 1e-3};
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(out, config, 1, fine), nlpoint::DomainError);
    const std::vector<double> increasing{1e-3, 2e-3};
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(out, config, 0, increasing),
                      nlpoint::DomainError);
    const std::vector<double> lone{1e-3};
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(out, config, 0, lone), nlpoint::DomainError);

    CenterConfig pair = config;
    pair.centers.push_back({1.0, 0.0, 0.0});
    pair.strengths.push_back(-0.5);
    auto out2 = nlpoint::resolvent_apply(pair, 7.0, f);
    const std::vector<double> wide{0.6, 0.5};
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(out2, pair, 0, wide), nlpoint::DomainError);
    // output and configuration must describe the same system
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(out, pair, 0, fine), nlpoint::DomainError);
    REQUIRE_THROWS_AS(nlpoint::field_value(out, pair, {0.0, 0.0, 0.5}),
                      nlpoint::DomainError);

    nlpoint::ResolventOutput bare;
    bare.charges = {0.1};
    bare.lambda = 4.0;
    bare.smooth_part = [](const Vec3&) { return 0.0; };
    REQUIRE_THROWS_AS(nlpoint::boundary_probe(bare, config, 0, fine), nlpoint::DomainError);
}
