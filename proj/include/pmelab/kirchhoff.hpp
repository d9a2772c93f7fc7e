#pragma once

#include <cmath>

namespace pmelab {

/// G(u) = |u|^alpha u / (alpha + 1), so that div(|u|^alpha grad u) = Laplacian G(u).
/// Odd, strictly increasing, G'(u) = |u|^alpha.
inline double kirchhoff(double u, double alpha) noexcept {
    if (u == 0.0) return 0.0;
    const double a = std::abs(u);
    const double mag = (alpha == 1.0 ? a : std::pow(a, alpha)) * u;
    return mag / (alpha + 1.0);
}

/// Diffusivity G'(u) = |u|^alpha.
inline double diffusivity(double u, double alpha) noexcept {
    if (u == 0.0) return 0.0;
    return alpha == 1.0 ? std::abs(u) : std::pow(std::abs(u), alpha);
}

}  // namespace pmelab
