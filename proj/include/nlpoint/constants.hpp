#pragma once

namespace nlpoint::detail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647693;

} // namespace nlpoint::detail
