#pragma once

#include <cmath>

#include "nlpoint/errors.hpp"

namespace nlpoint {

enum class ThetaKind { Exponential, Indicator, SmoothBump, LocalZero };

// Regularizing weight theta on (0, infinity). Admissible profiles satisfy
// 1 - r/b <= theta(r) <= 1 + r/b and tend to 1 at the origin. LocalZero
// (theta identically 0) is the singular reference point corresponding to the
// classical local point interaction; it is kept as a profile so the
// pathological limit can be scanned with the same machinery.
struct ThetaProfile {
    ThetaKind kind = ThetaKind::Exponential;
    double b = 1.0;                   // range (length)
    double derivative_at_zero = 0.0;  // theta'(0+), inverse length

    static ThetaProfile exponential(double range) {
        require_range(range);
        return {ThetaKind::Exponential, range, -1.0 / range};
    }
    static ThetaProfile indicator(double range) {
        require_range(range);
        return {ThetaKind::Indicator, range, 0.0};
    }
    // Truncated parabola 1 - (r/b)^2 on [0, b). Smooth at the origin with
    // theta'(0) = 0, compactly supported in [0, b], and within the
    // admissibility bounds since (1 - r/b)(1 + r/b) >= 1 - r/b there. The
    // bounds force a kink at the support edge: any profile reaching 0 at
    // r = b with zero slope would dip below 1 - r/b just inside, so this is
    // as smooth as the constraints allow.
    static ThetaProfile smooth_bump(double range) {
        require_range(range);
        return {ThetaKind::SmoothBump, range, 0.0};
    }
    static ThetaProfile local_zero() { return {ThetaKind::LocalZero, 1.0, 0.0}; }

private:
    static void require_range(double range) {
        if (!(range > 0.0)) throw DomainError("theta range b must be positive");
    }
};

inline double theta_eval(const ThetaProfile& profile, double r) {
    if (!(r > 0.0)) throw DomainError("theta_eval requires r > 0");
    switch (profile.kind) {
        case ThetaKind::Exponential:
            return std::exp(-r / profile.b);
        case ThetaKind::Indicator:
            return r < profile.b ? 1.0 : 0.0;
        case ThetaKind::SmoothBump: {
            if (r >= profile.b) return 0.0;
            const double t = r / profile.b;
            return 1.0 - t * t;
        }
        case ThetaKind::LocalZero:
            return 0.0;
    }
    throw Error("theta_eval: unknown profile kind");
}

} // namespace nlpoint
