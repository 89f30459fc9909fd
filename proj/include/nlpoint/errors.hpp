#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nlpoint {

namespace detail {

inline std::string short_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace detail

// Base class of every exception thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Result magnitude exceeds double range.
class OverflowError : public Error {
public:
    using Error::Error;
};

// Result magnitude below the smallest normal double.
class UnderflowError : public Error {
public:
    using Error::Error;
};

// Adaptive integration stopped before reaching the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& msg, double achieved)
        : Error(msg + " (achieved error estimate " + detail::short_float(achieved) + ")"),
          achieved_error(achieved) {}
    double achieved_error;
};

// The boundary matrix M(lambda) is numerically singular, i.e. lambda sits at
// (or indistinguishably close to) a point of the discrete spectrum.
class SingularBoundaryMatrix : public Error {
public:
    using Error::Error;
};

// Condition number of M(lambda) above the configured cap.
class IllConditioned : public Error {
public:
    IllConditioned(const std::string& msg, double cond)
        : Error(msg + " (condition estimate " + detail::short_float(cond) + ")"),
          condition_estimate(cond) {}
    double condition_estimate;
};

// Bracket expansion in the bound-state search hit its cap while an
// eigencurve was still negative.
class MaxExpansionExceeded : public Error {
public:
    using Error::Error;
};

// Resolvent requested at a spectral parameter not strictly below the
// bottom of the spectrum.
class BelowSpectrumError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent run configuration (CLI layer).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace nlpoint
