#pragma once
#include <optional>
#include <stdexcept>

#include "hkflow/numeric.hpp"

namespace hkflow {

// The constants of the pinching argument. With H_min0 = min_M H(0):
//   ell = -2-k by default; an override must satisfy -1/2 - (3/2)k <= ell <= -1-k
//   C0  = 1/2 (k+1)/(k-1) H_min0^{k+2}
//   C1  = C0 (1+k),  C2 = C0^2 (1+k)
//   C3  = C1 H_min0^{2k-2},  C4 = C2 H_cap^{k-3}   (C4 needs the cap)
// C5 and C6 are derived outputs of the Q-bound check, not inputs.
struct ConstantsLedger {
    int n = 2;
    int k = 3;
    double alpha = 6.0;
    int ell = -5;
    double H_min0 = 0.0;
    double C0 = 0.0, C1 = 0.0, C2 = 0.0, C3 = 0.0;
    std::optional<double> H_cap;
    std::optional<double> C4;

    bool eligible(double H_max) const { return H_cap && H_max <= *H_cap; }
};

inline bool ell_in_window(int ell, int k) {
    return 2 * ell >= -1 - 3 * k && ell <= -1 - k;
}

inline ConstantsLedger build_ledger(int n, int k, double H_min0,
                                    std::optional<double> H_cap = std::nullopt,
                                    std::optional<double> alpha = std::nullopt,
                                    std::optional<int> ell_override = std::nullopt) {
    if (k < 3 || k % 2 == 0) throw std::runtime_error("k must be odd and >= 3");
    if (n < 2) throw std::runtime_error("n must be >= 2");
    if (!(H_min0 > 0.0)) throw std::runtime_error("H_min0 must be positive");
    ConstantsLedger L;
    L.n = n;
    L.k = k;
    L.alpha = alpha.value_or(static_cast<double>(n + k + 1));
    L.ell = ell_override.value_or(-2 - k);
    if (ell_override && !ell_in_window(*ell_override, k))
        throw std::runtime_error("ell override outside the window -1/2-(3/2)k <= ell <= -1-k");
    L.H_min0 = H_min0;
    L.C0 = 0.5 * (k + 1.0) / (k - 1.0) * pow_i(H_min0, k + 2);
    L.C1 = L.C0 * (1 + k);
    L.C2 = L.C0 * L.C0 * (1 + k);
    L.C3 = L.C1 * pow_i(H_min0, 2 * k - 2);
    L.H_cap = H_cap;
    if (H_cap) L.C4 = L.C2 * pow_i(*H_cap, k - 3);
    return L;
}

} // namespace hkflow
