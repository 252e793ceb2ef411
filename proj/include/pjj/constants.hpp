#pragma once

#include <numbers>

namespace pjj {

/// Reduced Planck constant in SI units (J s), exact since the 2019 SI redefinition.
inline constexpr double hbar = 1.054571817e-34;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace pjj
