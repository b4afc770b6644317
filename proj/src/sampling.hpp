#pragma once

#include <cmath>

#include "zkmfa/derivation.hpp"

namespace zkmfa::detail {

// Sum of twelve uniforms minus six: zero mean, unit variance, support [-6, 6].
// Uses only IEEE add/convert, so outputs are bit-identical across platforms.
inline double standard_normal(XofStream& xof) noexcept {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) {
        s += xof.next_unit();
    }
    return s - 6.0;
}

// Marsaglia-Tsang; shape < 1 boosted via U^(1/shape).
inline double gamma_variate(XofStream& xof, double shape) {
    if (shape < 1.0) {
        const double u = xof.next_unit();
        return gamma_variate(xof, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = standard_normal(xof);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = xof.next_unit();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

inline double beta_variate(XofStream& xof, double a, double b) {
    const double x = gamma_variate(xof, a);
    const double y = gamma_variate(xof, b);
    return x / (x + y);
}

}  // namespace zkmfa::detail
