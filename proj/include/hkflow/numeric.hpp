#pragma once
#include <cmath>
#include <cstdint>

namespace hkflow {

// Integer power by repeated squaring; handles negative exponents.
inline double pow_i(double x, int e) {
    if (e < 0) return 1.0 / pow_i(x, -e);
    double acc = 1.0, base = x;
    unsigned n = static_cast<unsigned>(e);
    while (n) {
        if (n & 1u) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

// Real power with a fast path for integer exponents (hot in the flow loop).
inline double pow_r(double x, double a) {
    double ai = std::nearbyint(a);
    if (ai == a && std::fabs(a) <= 64.0) return pow_i(x, static_cast<int>(ai));
    return std::pow(x, a);
}

} // namespace hkflow
