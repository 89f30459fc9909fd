#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nlpoint/kernels.hpp"
#include "nlpoint/rng.hpp"
#include "nlpoint/theta.hpp"

using nlpoint::ThetaProfile;
using nlpoint::Vec3;
using nlpoint::theta_eval;

namespace {

Vec3 random_point(nlpoint::Rng& rng, double box) {
    return {box * (2.0 * rng.uniform01() - 1.0), box * (2.0 * rng.uniform01() - 1.0),
            box * (2.0 * rng.uniform01() - 1.0)};
}

}  // namespace

TEST_CASE("range profiles") {
    const auto expo = ThetaProfile::exponential(2.0);
    const auto ind = ThetaProfile::indicator(1.0);
    const auto bump = ThetaProfile::smooth_bump(1.0);
    const auto zero = ThetaProfile::local_zero();

    CHECK(theta_eval(expo, 2.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(expo.derivative_at_zero == Catch::Approx(-0.5).epsilon(1e-15));

    CHECK(theta_eval(ind, 0.999) == 1.0);
    CHECK(theta_eval(ind, 1.0) == 0.0);
    CHECK(ind.derivative_at_zero == 0.0);

    CHECK(theta_eval(bump, 0.5) == Catch::Approx(0.75).epsilon(1e-15));
    CHECK(theta_eval(bump, 1.0) == 0.0);
    CHECK(theta_eval(bump, 37.0) == 0.0);
    CHECK(bump.derivative_at_zero == 0.0);

    CHECK(theta_eval(zero, 1e-9) == 0.0);

    // profiles approach 1 at contact (except the vanishing one)
    for (const auto& p : {expo, ind, bump})
        CHECK(theta_eval(p, 1e-12) == Catch::Approx(1.0).margin(1e-9));

    // bump profile respects the two-sided envelope 1 - r/b <= theta <= 1 on its support
    for (int i = 1; i < 1000; ++i) {
        const double r = i / 1000.0;
        const double v = theta_eval(bump, r);
        CHECK(v <= 1.0 + 1e-12);
        CHECK(v >= 1.0 - r - 1e-12);
    }

    CHECK_THROWS_AS(theta_eval(bump, 0.0), nlpoint::DomainError);
    CHECK_THROWS_AS(theta_eval(bump, -1.0), nlpoint::DomainError);
    CHECK_THROWS_AS(ThetaProfile::exponential(0.0), nlpoint::DomainError);
    CHECK_THROWS_AS(ThetaProfile::smooth_bump(-2.0), nlpoint::DomainError);
}

TEST_CASE("screened coulomb factor") {
    CHECK(nlpoint::g_lambda(1.0, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(nlpoint::g_lambda(2.0, 4.0) == Catch::Approx(std::exp(-4.0) / 2.0).epsilon(1e-15));
    CHECK(1e-8 * nlpoint::g_lambda(1e-8, 1.0) == Catch::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS(nlpoint::g_lambda(0.0, 1.0), nlpoint::DomainError);
    CHECK_THROWS_AS(nlpoint::g_lambda(1.0, 0.0), nlpoint::DomainError);
    CHECK_THROWS_AS(nlpoint::g_lambda(1.0, -2.0), nlpoint::DomainError);
}

TEST_CASE("off-diagonal coupling") {
    // exponential profile with range 1/sqrt(lambda) matches the screening exactly
    const auto matched = ThetaProfile::exponential(1.0);
    for (int i = 1; i <= 40; ++i) {
        const double r = 0.1 * i;
        CHECK(nlpoint::delta_lambda_theta(matched, r, 1.0) == Catch::Approx(0.0).margin(1e-12));
    }
    const auto ind = ThetaProfile::indicator(1.0);
    CHECK(nlpoint::delta_lambda_theta(ind, 1.0, 1.0)
          == Catch::Approx(-std::exp(-1.0)).epsilon(1e-14));
    CHECK(nlpoint::delta_lambda_theta(ind, 0.5, 1.0)
          == Catch::Approx((1.0 - std::exp(-0.5)) / 0.5).epsilon(1e-14));
    // frozen: (1 - e^{-1}) / 1 with the unit-range indicator evaluated just inside the edge
    CHECK(nlpoint::delta_lambda_theta(ind, 1.0 - 1e-14, 1.0)
          == Catch::Approx(0.63212055882855768).epsilon(1e-12));
}

TEST_CASE("free cluster kernel, single particle") {
    const Vec3 origin{0.0, 0.0, 0.0};
    std::vector<Vec3> x{origin};
    std::vector<Vec3> y{{1.0, 0.0, 0.0}};
    // frozen: e^{-1} / (4 pi)
    CHECK(nlpoint::green_free_kernel(x, y, 1.0)
          == Catch::Approx(0.02927491576215958).epsilon(1e-13));

    // against the radial factor on random geometry
    nlpoint::Rng rng(91);
    for (int t = 0; t < 50; ++t) {
        x[0] = random_point(rng, 2.0);
        y[0] = random_point(rng, 2.0);
        const double lam = 0.2 + 4.0 * rng.uniform01();
        const double r = nlpoint::distance(x[0], y[0]);
        if (r < 1e-6) continue;
        const double expected = nlpoint::g_lambda(r, lam) / (4.0 * M_PI);
        CHECK(nlpoint::green_free_kernel(x, y, lam) == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("free cluster kernel, two particles") {
    std::vector<Vec3> x{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    std::vector<Vec3> y{{0.9, 0.0, 0.0}, {0.0, 1.2, 0.0}};
    // configuration distance sqrt(0.81 + 1.44) = 1.5; frozen via subordination at lambda = 2
    CHECK(nlpoint::green_free_kernel(x, y, 2.0)
          == Catch::Approx(0.00075531728251095251).epsilon(1e-11));

    // symmetric under exchanging both rows
    std::vector<Vec3> xs{x[1], x[0]};
    std::vector<Vec3> ys{y[1], y[0]};
    CHECK(nlpoint::green_free_kernel(xs, ys, 2.0)
          == Catch::Approx(nlpoint::green_free_kernel(x, y, 2.0)).epsilon(1e-15));

    CHECK_THROWS_AS(nlpoint::green_free_kernel(x, y, 0.0), nlpoint::DomainError);
    CHECK_THROWS_AS(nlpoint::green_free_kernel(x, x, 2.0), nlpoint::DomainError);
    std::vector<Vec3> mismatched{y[0]};
    CHECK_THROWS_AS(nlpoint::green_free_kernel(x, mismatched, 2.0), nlpoint::DomainError);
}

TEST_CASE("mass-weighted kernel") {
    // at eta = 1 and light mass 1/2 every particle is identical, so the weighted
    // kernel collapses to the free one with the light coordinate appended
    nlpoint::MassModel equal{0.5, 1.0};
    nlpoint::Rng rng(17);
    for (int n : {1, 2, 3}) {
        for (int t = 0; t < 20; ++t) {
            Vec3 xl = random_point(rng, 1.5), yl = random_point(rng, 1.5);
            std::vector<Vec3> X, Y, xall{xl}, yall{yl};
            for (int k = 0; k < n; ++k) {
                X.push_back(random_point(rng, 1.5));
                Y.push_back(random_point(rng, 1.5));
                xall.push_back(X.back());
                yall.push_back(Y.back());
            }
            const double lam = 0.5 + 3.0 * rng.uniform01();
            const double got = nlpoint::green_mass_kernel(xl, X, yl, Y, equal, lam);
            const double expected = nlpoint::green_free_kernel(xall, yall, lam);
            CHECK(got == Catch::Approx(expected).epsilon(1e-12));
        }
    }

    // decreasing in the weighted separation at fixed order
    nlpoint::MassModel skew{0.5, 2.5};
    std::vector<Vec3> X{{0.4, 0.0, 0.0}}, Y{{0.0, 0.0, 0.0}};
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 0.3; d < 3.0; d += 0.3) {
        const double v =
            nlpoint::green_mass_kernel({d, 0.0, 0.0}, X, {0.0, 0.0, 0.0}, Y, skew, 1.0);
        CHECK(v < prev);
        prev = v;
    }

    CHECK_THROWS_AS(
        nlpoint::green_mass_kernel({0.0, 0.0, 0.0}, X, {0.0, 0.0, 0.0}, X, skew, 1.0),
        nlpoint::DomainError);
    nlpoint::MassModel bad{-0.5, 1.0};
    CHECK_THROWS_AS(
        nlpoint::green_mass_kernel({1.0, 0.0, 0.0}, X, {0.0, 0.0, 0.0}, Y, bad, 1.0),
        nlpoint::DomainError);
}

TEST_CASE("boundary coefficient field") {
    const auto ind = ThetaProfile::indicator(1.0);
    // two spectators at distance 1/2 from z and from each other:
    // alpha + gamma (2 + 2) + gamma/2 * 2 = alpha + 5 gamma
    const Vec3 z{0.0, 0.0, 0.0};
    std::vector<Vec3> spec{{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}};
    const double rkl = std::sqrt(0.5);
    const double expected = -1.0 + 1.0 * (2.0 + 2.0) + 0.5 * 1.0 / rkl;
    CHECK(nlpoint::a_function(z, spec, -1.0, 1.0, ind) == Catch::Approx(expected).epsilon(1e-14));

    // all separations beyond the range leave only alpha
    std::vector<Vec3> far{{5.0, 0.0, 0.0}, {0.0, 0.0, -7.0}};
    CHECK(nlpoint::a_function(z, far, 0.75, 3.0, ind) == Catch::Approx(0.75).epsilon(1e-15));
    CHECK(nlpoint::a_function(z, {}, 0.75, 3.0, ind) == Catch::Approx(0.75).epsilon(1e-15));

    // jointly linear in (alpha, gamma)
    const double base = nlpoint::a_function(z, spec, 0.0, 1.0, ind);
    CHECK(nlpoint::a_function(z, spec, 2.0, 3.0, ind)
          == Catch::Approx(2.0 + 3.0 * base).epsilon(1e-13));

    CHECK_THROWS_AS(nlpoint::a_function(z, spec, 0.0, -1.0, ind), nlpoint::DomainError);
    std::vector<Vec3> onz{z};
    CHECK_THROWS_AS(nlpoint::a_function(z, onz, 0.0, 1.0, ind), nlpoint::DomainError);
}

TEST_CASE("coupling row action") {
    const auto ind = ThetaProfile::indicator(1.0);
    const Vec3 z{0.0, 0.0, 0.0};
    std::vector<Vec3> others{{0.5, 0.0, 0.0}, {0.0, 0.25, 0.0}};
    std::vector<double> xi{1.0, 2.0, -1.0};
    // alpha_0 xi_0 + gamma (theta(0.5)/0.5 xi_1 + theta(0.25)/0.25 xi_2)
    std::vector<double> alphas{-1.0, 0.0, 0.0};
    const double expected = -1.0 + 1.0 * (2.0 * 2.0 + 4.0 * (-1.0));
    CHECK(nlpoint::b_apply_point(0, xi, z, others, alphas, 1.0, ind)
          == Catch::Approx(expected).epsilon(1e-14));

    // gamma = 0 keeps only the diagonal term
    CHECK(nlpoint::b_apply_point(0, xi, z, others, alphas, 0.0, ind)
          == Catch::Approx(-1.0).epsilon(1e-15));

    // linear in the coefficient vector
    std::vector<double> xi2{0.5, -1.0, 3.0}, sum{1.5, 1.0, 2.0};
    const double v1 = nlpoint::b_apply_point(1, xi, z, others, alphas, 2.0, ind);
    const double v2 = nlpoint::b_apply_point(1, xi2, z, others, alphas, 2.0, ind);
    const double vs = nlpoint::b_apply_point(1, sum, z, others, alphas, 2.0, ind);
    CHECK(vs == Catch::Approx(v1 + v2).epsilon(1e-13).margin(1e-13));

    std::vector<double> short_xi{1.0, 2.0};
    CHECK_THROWS_AS(nlpoint::b_apply_point(0, short_xi, z, others, alphas, 1.0, ind),
                    nlpoint::DomainError);
    CHECK_THROWS_AS(nlpoint::b_apply_point(3, xi, z, others, alphas, 1.0, ind),
                    nlpoint::DomainError);
    std::vector<Vec3> onz{z, {0.5, 0.0, 0.0}};
    CHECK_THROWS_AS(nlpoint::b_apply_point(0, xi, z, onz, alphas, 1.0, ind),
                    nlpoint::DomainError);
}

TEST_CASE("pairwise screened weight") {
    std::vector<Vec3> two{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    // frozen: e^{-1} / (4 pi) at unit screening, 1 / (4 pi) unscreened
    CHECK(nlpoint::phi_weight(two, 1.0) == Catch::Approx(0.02927491576215958).epsilon(1e-13));
    CHECK(nlpoint::phi_weight(two, 0.0) == Catch::Approx(0.079577471545947668).epsilon(1e-13));

    std::vector<Vec3> three{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}};
    std::vector<Vec3> permuted{three[2], three[0], three[1]};
    CHECK(nlpoint::phi_weight(three, 0.7)
          == Catch::Approx(nlpoint::phi_weight(permuted, 0.7)).epsilon(1e-15));

    std::vector<Vec3> coincident{two[0], two[0]};
    CHECK_THROWS_AS(nlpoint::phi_weight(coincident, 1.0), nlpoint::DomainError);
    CHECK_THROWS_AS(nlpoint::phi_weight(two, -1.0), nlpoint::DomainError);
}
