#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "nlpoint/constants.hpp"
#include "nlpoint/errors.hpp"

// Adaptive 1-D integration on Gauss-Kronrod 7/15 panels with worst-interval
// subdivision, plus the two half-line variants the kernels need: an
// algebraic tail map p = p0 + s t/(1-t) for monotone integrands and a
// half-period splitter with alternating-series remainder bound for
// sin(pR)-weighted tails.

namespace nlpoint {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 data).
inline constexpr double kKronrodX[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
};

template <class F>
Panel kronrod_panel(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(mid);
    double fv[15];
    fv[7] = fc;
    double kron = kKronrodW[7] * fc;
    double gauss = kGaussW[3] * fc;
    double resabs = kKronrodW[7] * std::fabs(fc);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodX[j];
        const double flo = f(mid - dx);
        const double fhi = f(mid + dx);
        fv[j] = flo;
        fv[14 - j] = fhi;
        kron += kKronrodW[j] * (flo + fhi);
        if (j % 2 == 1) gauss += kGaussW[j / 2] * (flo + fhi);
        resabs += kKronrodW[j] * (std::fabs(flo) + std::fabs(fhi));
    }
    // QUADPACK-style error estimate: the raw |K - G| difference measures the
    // embedded Gauss rule, not the Kronrod result, so it is damped against
    // the panel's own variation resasc before use.
    const double mean = 0.5 * kron;
    double resasc = kKronrodW[7] * std::fabs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kKronrodW[j] * (std::fabs(fv[j] - mean) + std::fabs(fv[14 - j] - mean));
    resabs *= std::fabs(h);
    resasc *= std::fabs(h);
    double err = std::fabs((kron - gauss) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double round_floor = 50.0 * eps * resabs;
    if (round_floor > 0.0) err = std::max(err, round_floor);
    return {a, b, kron * h, err};
}

struct PanelWorse {
    bool operator()(const Panel& lhs, const Panel& rhs) const { return lhs.error < rhs.error; }
};

inline void require_finite(const Panel& p) {
    if (!std::isfinite(p.value) || !std::isfinite(p.error))
        throw DomainError("integrand produced a non-finite value in [" + short_float(p.a) + ", "
                          + short_float(p.b) + "]");
}

} // namespace detail

// Adaptive integration over consecutive [breakpoints[i], breakpoints[i+1]]
// segments. Breakpoints double as protection points: panel nodes are strictly
// interior, so integrable endpoint singularities may sit exactly on a
// breakpoint.
template <class F>
double integrate_segments(F&& f, std::span<const double> breakpoints,
                          const QuadratureSpec& spec = {}) {
    if (breakpoints.size() < 2) throw DomainError("integrate_segments needs >= 2 breakpoints");
    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelWorse> queue;
    double total = 0.0;
    double queued_err = 0.0;  // error carried by panels still eligible for splitting
    double floor_err = 0.0;   // panels already at double resolution
    int count = 0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw DomainError("integrate_segments: breakpoints must increase strictly");
        detail::Panel p = detail::kronrod_panel(f, breakpoints[i], breakpoints[i + 1]);
        detail::require_finite(p);
        total += p.value;
        queued_err += p.error;
        queue.push(p);
        ++count;
    }
    while (true) {
        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
        if (queued_err + floor_err <= tol) return total;
        if (count >= spec.max_intervals || queue.empty())
            throw QuadratureError("adaptive quadrature did not reach tolerance",
                                  queued_err + floor_err);
        const detail::Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            queued_err -= worst.error;
            floor_err += worst.error;
            continue;
        }
        detail::Panel left = detail::kronrod_panel(f, worst.a, mid);
        detail::Panel right = detail::kronrod_panel(f, mid, worst.b);
        detail::require_finite(left);
        detail::require_finite(right);
        total += left.value + right.value - worst.value;
        queued_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++count;
    }
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    const double pts[2] = {a, b};
    return integrate_segments(f, pts, spec);
}

// Integral over [breakpoints.front(), infinity): adaptive panels up to the
// last breakpoint, then the algebraic map p = p0 + scale t/(1-t) on the tail.
// The integrand must decay fast enough for the mapped tail to be integrable
// (faster than 1/p^2).
template <class F>
double integrate_half_line(F&& f, std::span<const double> breakpoints, double scale,
                           const QuadratureSpec& spec = {}) {
    if (breakpoints.empty()) throw DomainError("integrate_half_line needs a start point");
    if (!(scale > 0.0)) throw DomainError("integrate_half_line requires scale > 0");
    double head = 0.0;
    if (breakpoints.size() >= 2) head = integrate_segments(f, breakpoints, spec);
    const double p0 = breakpoints.back();
    auto tail = [&f, p0, scale](double t) {
        const double om = 1.0 - t;
        return f(p0 + scale * t / om) * scale / (om * om);
    };
    return head + integrate(tail, 0.0, 1.0, spec);
}

namespace detail {

// Euler transform of a slowly converging alternating sequence of partial
// sums: repeated pair averaging, where after j passes the trailing element
// is the binomially weighted mean of the last j+1 partial sums. Succeeds
// once two consecutive passes change the estimate by less than half the
// tolerance; the change plateau is the error measure, as usual for
// alternating-series acceleration.
inline bool euler_average(std::span<const double> partial, const QuadratureSpec& spec,
                          double& est, double& change) {
    std::vector<double> row(partial.begin(), partial.end());
    est = row.back();
    change = std::numeric_limits<double>::infinity();
    int settled = 0;
    while (row.size() > 1) {
        for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
        row.pop_back();
        change = std::fabs(row.back() - est);
        est = row.back();
        if (change <= 0.5 * std::max(spec.abs_tol, spec.rel_tol * std::fabs(est))) {
            if (++settled >= 2) return true;
        } else {
            settled = 0;
        }
    }
    return false;
}

} // namespace detail

// Oscillatory half-line integral  I = int_0^infty g(p) sin(p R) dp  for
// g >= 0 and nonincreasing beyond monotone_from. Head: adaptive integration
// up to the first half-period boundary past monotone_from. Tail: one Kronrod
// panel per half period, so the partial sums alternate around the limit.
// When the panel magnitudes decay fast the remainder bound |I_k| closes the
// sum directly; otherwise the alternating partial sums are Euler-averaged,
// which trades the algebraic panel decay for geometric convergence.
template <class F>
double sine_integral_half_line(F&& g, double R, double monotone_from,
                               const QuadratureSpec& spec = {}) {
    if (!(R > 0.0)) throw DomainError("sine_integral_half_line requires R > 0");
    if (!(monotone_from >= 0.0))
        throw DomainError("sine_integral_half_line requires monotone_from >= 0");
    const double half = detail::kPi / R;
    auto integrand = [&g, R](double p) { return g(p) * std::sin(p * R); };

    long k0 = static_cast<long>(std::ceil(monotone_from / half));
    if (k0 < 1) k0 = 1;
    std::vector<double> head_points;
    const long seed_cap = 512;
    const long seeds = std::min(k0, seed_cap);
    for (long j = 0; j <= seeds; ++j)
        head_points.push_back(static_cast<double>(k0) * half * static_cast<double>(j)
                              / static_cast<double>(seeds));
    double total = integrate_segments(integrand, head_points, spec);

    // Panel rule errors alternate in sign along with the panels themselves
    // (the error is a smooth functional of g on each half period), so they
    // largely cancel in the sum; the floor keeps the largest single panel
    // estimate instead of adding them all up.
    std::vector<double> partial;
    double err_peak = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    double last_change = std::numeric_limits<double>::infinity();
    const long panel_cap = std::min<long>(spec.max_intervals, 512);
    for (long k = k0; k < k0 + panel_cap; ++k) {
        const detail::Panel p = detail::kronrod_panel(integrand, static_cast<double>(k) * half,
                                                      static_cast<double>(k + 1) * half);
        total += p.value;
        err_peak = std::max(err_peak, p.error);
        partial.push_back(total);
        const double mag = std::fabs(p.value);
        if (mag <= prev_mag
            && mag + err_peak <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)))
            return total;
        prev_mag = mag;
        const std::size_t n = partial.size();
        if (n >= 16 && (n & (n - 1)) == 0) {
            double est = 0.0, change = 0.0;
            if (detail::euler_average(partial, spec, est, change)) return est;
            last_change = change;
        }
    }
    const double achieved = std::isfinite(last_change) ? last_change : prev_mag + err_peak;
    throw QuadratureError("oscillatory tail did not reach tolerance", achieved);
}

// Nodes and weights of n-point Gauss-Legendre on [-1, 1], cached per order.
// Newton iteration on the Legendre recurrence; symmetric nodes come out of
// the standard cos initial guess.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre requires n >= 1");
    static std::mutex mutex;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(detail::kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(nodes), std::move(weights))).first->second;
}

// Cancellation-resistant summation for batch reductions.
inline double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

} // namespace nlpoint
