#pragma once

// Closed-form critical couplings for the many-body forms, their eta limits,
// and the parameter map identifying the Dirichlet-form operator as a member
// of this interaction family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "nlpoint/constants.hpp"
#include "nlpoint/errors.hpp"
#include "nlpoint/theta.hpp"

namespace nlpoint {

// Coupling threshold for N identical light bosons:
//   2 - 8 sqrt(3) / (pi (N-2) (8 + sqrt(3)(N-3))).
// Increasing in N and always below 2.
inline double gamma_c_bosons(int n) {
    if (n < 3) throw DomainError("gamma_c_bosons requires at least three particles");
    const double root3 = std::sqrt(3.0);
    const double nn = static_cast<double>(n);
    return 2.0 - 8.0 * root3 / (detail::kPi * (nn - 2.0) * (8.0 + root3 * (nn - 3.0)));
}

// Coupling threshold at light-to-heavy mass ratio eta:
//   (2(eta+1)/pi) asin(1/(eta+1)) - 2 sqrt(eta(eta+2)) / (pi (N-1)(eta+1)).
// Evaluated through x = 1/(eta+1) as
//   (2/pi) [ (asin(x)/x - sqrt(1-x^2)) + sqrt(1-x^2) (N-2)/(N-1) ],
// a sum of nonnegative terms. The naive difference of the two O(1) pieces
// goes negative from roundoff once eta passes ~1e12; here positivity
// survives at machine precision for every eta, with a short series carrying
// the first bracket once x is small enough for its own cancellation to bite.
inline double gamma_hat_c(int n, double eta) {
    if (n < 2) throw DomainError("gamma_hat_c requires at least two particles");
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw DomainError("gamma_hat_c: eta must be positive and finite");
    const double x = 1.0 / (eta + 1.0);
    const double one_minus_x = eta / (eta + 1.0);
    const double cosine = std::sqrt(one_minus_x * (1.0 + x));
    double core;
    if (x < 0.01) {
        const double x2 = x * x;
        core = x2 * (2.0 / 3.0 + x2 * (1.0 / 5.0 + x2 * (3.0 / 28.0 + x2 * (5.0 / 72.0))));
    } else {
        core = std::asin(x) / x - cosine;
    }
    const double ratio = (static_cast<double>(n) - 2.0) / (static_cast<double>(n) - 1.0);
    return (2.0 / detail::kPi) * (core + cosine * ratio);
}

// gamma_hat_c is monotone in eta between two closed-form extremes: it rises
// to 1 as the light particle becomes infinitely light and falls to
// (2/pi)(N-2)/(N-1) as the mass ratio grows. The markers evaluate those
// limits exactly; grid scans only cross-check them.
enum class EtaLimit { Zero, Infinity };

inline double gamma_hat_c_limit(int n, EtaLimit limit) {
    if (n < 2) throw DomainError("gamma_hat_c requires at least two particles");
    switch (limit) {
        case EtaLimit::Zero:
            return 1.0;
        case EtaLimit::Infinity:
            return 2.0 * (static_cast<double>(n) - 2.0) / (detail::kPi * (static_cast<double>(n) - 1.0));
    }
    throw Error("gamma_hat_c_limit: unknown limit marker");
}

inline std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("geometric_grid needs 0 < lo < hi");
    if (count < 2) throw DomainError("geometric_grid needs at least two points");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] = lo * std::exp(static_cast<double>(k) * step);
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

struct GammaHatExtrema {
    double inf_estimate = 0.0;
    double sup_estimate = 0.0;
};

// Grid extrema of gamma_hat_c over eta. The grid must cover at least twelve
// decades; what matters is the span, not the spacing, since the function is
// monotone in eta. Approach to the analytic limits goes like sqrt(eta) at the
// small end, so reproducing the supremum to 1e-4 needs the grid to start
// around 1e-10 or below.
inline GammaHatExtrema gamma_hat_extrema(int n, std::span<const double> eta_grid) {
    if (eta_grid.size() < 2) throw DomainError("gamma_hat_extrema needs at least two grid points");
    const auto [lo, hi] = std::minmax_element(eta_grid.begin(), eta_grid.end());
    if (!(*lo > 0.0)) throw DomainError("gamma_hat_extrema: eta grid must be positive");
    if (!(*hi / *lo >= 1e12))
        throw DomainError("gamma_hat_extrema: eta grid must span at least 12 decades");
    GammaHatExtrema out{std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
    for (double eta : eta_grid) {
        const double value = gamma_hat_c(n, eta);
        out.inf_estimate = std::min(out.inf_estimate, value);
        out.sup_estimate = std::max(out.sup_estimate, value);
    }
    return out;
}

struct DirichletCase {
    double alpha = 0.0;
    double gamma = 2.0;
    ThetaProfile profile;
};

// The Dirichlet-form operator with mass parameter m sits inside this family
// at alpha = -m, gamma = 2, theta(r) = exp(-m r). m = 0 degenerates to the
// constant weight theta == 1, an exponential of infinite range.
inline DirichletCase dirichlet_special_case(double m) {
    if (!(m >= 0.0) || !std::isfinite(m))
        throw DomainError("dirichlet_special_case: mass must be nonnegative");
    const double range = m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
    return {-m, 2.0, ThetaProfile::exponential(range)};
}

struct CriticalityQuery {
    int n = 2;
    std::variant<double, EtaLimit> eta = 1.0;
    double gamma = 1.0;
};

struct CriticalityReport {
    double gamma_hat = 0.0;
    double gamma_bosons = std::numeric_limits<double>::quiet_NaN();  // defined for N >= 3
    bool above_gamma_hat = false;
};

inline CriticalityReport assess_criticality(const CriticalityQuery& query) {
    if (!(query.gamma > 0.0)) throw DomainError("criticality query: gamma must be positive");
    CriticalityReport report;
    report.gamma_hat = std::holds_alternative<EtaLimit>(query.eta)
                           ? gamma_hat_c_limit(query.n, std::get<EtaLimit>(query.eta))
                           : gamma_hat_c(query.n, std::get<double>(query.eta));
    if (query.n >= 3) report.gamma_bosons = gamma_c_bosons(query.n);
    report.above_gamma_hat = query.gamma > report.gamma_hat;
    return report;
}

} // namespace nlpoint
