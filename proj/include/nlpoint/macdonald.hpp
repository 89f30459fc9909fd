#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nlpoint/constants.hpp"
#include "nlpoint/errors.hpp"

// Modified Bessel function of the second kind K_nu(z) for real order nu >= 0
// and z > 0.
//
// Two independent evaluation routes:
//   * half-integer orders: K_{1/2}(z) = sqrt(pi/2z) e^{-z} and the forward
//     recurrence K_{m+1} = K_{m-1} + (2m/z) K_m, which is stable for K
//     (the sequence grows with the order);
//   * general orders: reduce to mu = nu - round(nu) with |mu| <= 1/2,
//     evaluate the pair (K_mu, K_{mu+1}) by the Temme power series for
//     z < 2 and by the Steed/Thompson-Barnett continued fraction CF2 for
//     z >= 2, then recur upward.
//
// Both routes carry an explicit log-scale so that intermediate growth does
// not overflow before the final value is known to be representable;
// unrepresentable results raise OverflowError / UnderflowError, distinct
// from DomainError for bad arguments.

namespace nlpoint {

struct MacdonaldOrder {
    double nu;
    bool half_integer_flag;

    explicit MacdonaldOrder(double order) : nu(order) {
        if (!(order >= 0.0)) throw DomainError("Macdonald order must be nonnegative");
        const double twice = 2.0 * order;
        half_integer_flag = (twice == std::floor(twice)) && (std::fmod(twice, 2.0) == 1.0);
    }
};

namespace detail {

inline constexpr double kLnDblMax = 709.78271289338399673;
inline constexpr double kLnDblMinNormal = -708.39641853226410622;
inline constexpr double kEulerGamma = 0.57721566490153286061;

// zeta(2) .. zeta(29)
inline constexpr double kZeta[] = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915,
    1.0369277551433699263, 1.0173430619844491397, 1.0083492773819228268,
    1.0040773561979443394, 1.0020083928260822144, 1.0009945751278180853,
    1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519,
    1.0000076371976378998, 1.0000038172932649998, 1.0000019082127165539,
    1.0000009539620338728, 1.0000004769329867878, 1.0000002384505027277,
    1.0000001192199259653, 1.0000000596081890513, 1.0000000298035035147,
    1.0000000149015548284, 1.0000000074507117898, 1.0000000037253340248,
    1.0000000018626597235,
};

struct TemmeGamma {
    double gam1;             // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), -> -EulerGamma at mu = 0
    double gam2;             // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
    double inv_gamma_plus;   // 1/Gamma(1+mu)
    double inv_gamma_minus;  // 1/Gamma(1-mu)
};

// For small |mu| the difference in gam1 cancels badly if formed from two
// tgamma calls. Instead use ln Gamma(1+mu) = -T(mu) + E(mu) with
//   T(mu) = EulerGamma*mu + sum_{odd k>=3} zeta(k) mu^k / k   (odd part),
//   E(mu) = sum_{even k>=2} zeta(k) mu^k / k                  (even part),
// so that 1/Gamma(1 +- mu) = e^{-E} e^{+-T} and
//   gam1 = -e^{-E} sinh(T)/mu,   gam2 = e^{-E} cosh(T),
// both free of cancellation. The series is used for |mu| <= 1/4 where it
// converges to full precision within the tabulated zeta values.
inline TemmeGamma temme_gamma(double mu) {
    if (std::fabs(mu) > 0.25) {
        const double gp = 1.0 / std::tgamma(1.0 + mu);
        const double gm = 1.0 / std::tgamma(1.0 - mu);
        return {(gm - gp) / (2.0 * mu), 0.5 * (gm + gp), gp, gm};
    }
    const double mu2 = mu * mu;
    double t_over_mu = kEulerGamma;  // T(mu)/mu, even in mu
    double even_part = 0.0;
    double mupow = mu2;
    for (int j = 1; 2 * j + 1 <= 29; ++j) {
        even_part += kZeta[2 * j - 2] * mupow / (2 * j);
        t_over_mu += kZeta[2 * j - 1] * mupow / (2 * j + 1);
        mupow *= mu2;
    }
    const double t = mu * t_over_mu;
    const double scale = std::exp(-even_part);
    const double sinhc_t = (t == 0.0) ? 1.0 : std::sinh(t) / t;
    const double gam1 = -scale * t_over_mu * sinhc_t;
    const double gam2 = scale * std::cosh(t);
    return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

// Temme series for (K_mu(x), K_{mu+1}(x)), |mu| <= 1/2, 0 < x < 2.
// K_mu = sum_k c_k f_k and K_{mu+1} = (2/x) sum_k c_k (p_k - k f_k) with
//   c_k = (x^2/4)^k / k!,
//   f_0 from the gamma pair above, p_0 = Gamma(1+mu) (x/2)^{-mu} / 2,
//   q_0 = Gamma(1-mu) (x/2)^{+mu} / 2,
//   f_k = (k f_{k-1} + p_{k-1} + q_{k-1}) / (k^2 - mu^2),
//   p_k = p_{k-1} / (k - mu),  q_k = q_{k-1} / (k + mu).
inline std::pair<double, double> macdonald_pair_series(double mu, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const TemmeGamma tg = temme_gamma(mu);
    const double d = -std::log(0.5 * x);
    const double e = mu * d;
    const double pimu = kPi * mu;
    const double fact = (mu == 0.0) ? 1.0 : pimu / std::sin(pimu);
    const double sinhc_e = (e == 0.0) ? 1.0 : std::sinh(e) / e;

    double f = fact * (tg.gam1 * std::cosh(e) + tg.gam2 * d * sinhc_e);
    double p = 0.5 * std::exp(e) / tg.inv_gamma_plus;
    double q = 0.5 * std::exp(-e) / tg.inv_gamma_minus;
    double c = 1.0;
    const double x24 = 0.25 * x * x;
    double sum_f = f;
    double sum_h = p;
    for (int k = 1; k <= 500; ++k) {
        f = (k * f + p + q) / (k * k - mu * mu);
        c *= x24 / k;
        p /= (k - mu);
        q /= (k + mu);
        const double del = c * f;
        sum_f += del;
        sum_h += c * (p - k * f);
        if (std::fabs(del) < std::fabs(sum_f) * eps) {
            return {sum_f, sum_h * 2.0 / x};
        }
    }
    throw Error("Macdonald series failed to converge");
}

// CF2 evaluation of the scaled pair (e^x K_mu(x), e^x K_{mu+1}(x)) for
// |mu| <= 1/2, x >= 2 (Steed's algorithm with the Thompson-Barnett sum for
// the normalizing series S).
inline std::pair<double, double> macdonald_pair_cf2_scaled(double mu, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double mu2 = mu * mu;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    bool converged = false;
    for (int i = 2; i <= 10000; ++i) {
        a -= 2 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::fabs(dels) < std::fabs(s) * eps) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error("Macdonald continued fraction failed to converge");
    h = a1 * h;
    const double kmu = std::sqrt(kPi / (2.0 * x)) / s;
    const double kmu1 = kmu * (mu + x + 0.5 - h) / x;
    return {kmu, kmu1};
}

// Finalizes a scaled evaluation: the true value is mantissa * e^{extra_log}
// with mantissa > 0. Throws when the result falls outside the normal double
// range.
inline double macdonald_descale(double mantissa, double extra_log) {
    const double ln_true = std::log(mantissa) + extra_log;
    if (ln_true > kLnDblMax) throw OverflowError("macdonald_k overflows double range");
    if (ln_true < kLnDblMinNormal) throw UnderflowError("macdonald_k underflows double range");
    if (extra_log == 0.0) return mantissa;
    if (std::fabs(extra_log) < 709.0) return mantissa * std::exp(extra_log);
    return std::exp(ln_true);
}

inline constexpr double kRescaleAt = 1e280;
inline const double kLnRescale = std::log(kRescaleAt);

} // namespace detail

// General-order evaluation; ignores half-integer closed forms on purpose so
// that the two routes stay independently testable.
inline double macdonald_k_general(double nu, double z) {
    if (!(nu >= 0.0)) throw DomainError("Macdonald order must be nonnegative");
    if (!(z > 0.0)) throw DomainError("macdonald_k requires z > 0");

    const int steps = static_cast<int>(nu + 0.5);
    const double mu = nu - steps;  // |mu| <= 1/2

    double kmu, kmu1;
    double extra_log = 0.0;
    if (z < 2.0) {
        std::tie(kmu, kmu1) = detail::macdonald_pair_series(mu, z);
    } else {
        std::tie(kmu, kmu1) = detail::macdonald_pair_cf2_scaled(mu, z);
        extra_log = -z;
    }
    for (int m = 1; m < steps; ++m) {
        const double knext = kmu + (2.0 * (mu + m) / z) * kmu1;
        kmu = kmu1;
        kmu1 = knext;
        if (kmu1 > detail::kRescaleAt) {
            kmu /= detail::kRescaleAt;
            kmu1 /= detail::kRescaleAt;
            extra_log += detail::kLnRescale;
        }
    }
    return detail::macdonald_descale(steps == 0 ? kmu : kmu1, extra_log);
}

// Half-integer closed form: K_{1/2} seed plus forward recurrence, all in the
// e^{+z}-scaled variable.
inline double macdonald_k_half_integer(int m, double z) {
    if (m < 0) throw DomainError("Macdonald order must be nonnegative");
    if (!(z > 0.0)) throw DomainError("macdonald_k requires z > 0");
    double k0 = std::sqrt(detail::kPi / (2.0 * z));  // e^z K_{1/2}
    double extra_log = -z;
    if (m == 0) return detail::macdonald_descale(k0, extra_log);
    double k1 = k0 * (1.0 + 1.0 / z);                // e^z K_{3/2}
    for (int j = 1; j < m; ++j) {
        // order nu = j + 1/2: K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu
        const double knext = k0 + ((2.0 * j + 1.0) / z) * k1;
        k0 = k1;
        k1 = knext;
        if (k1 > detail::kRescaleAt) {
            k0 /= detail::kRescaleAt;
            k1 /= detail::kRescaleAt;
            extra_log += detail::kLnRescale;
        }
    }
    return detail::macdonald_descale(k1, extra_log);
}

inline double macdonald_k(MacdonaldOrder order, double z) {
    if (order.half_integer_flag) {
        return macdonald_k_half_integer(static_cast<int>(order.nu), z);
    }
    return macdonald_k_general(order.nu, z);
}

inline double macdonald_k(double nu, double z) { return macdonald_k(MacdonaldOrder(nu), z); }

} // namespace nlpoint
