#pragma once
#include <optional>

// Closed-form solution of the H^k flow on round hyperspheres in R^{n+1}.
// Substituting F = R(t) * nu into the flow rule gives dR/dt = -(n/R)^k, so
//   R(t)^{k+1} = R0^{k+1} - (k+1) n^k t,   T_max = R0^{k+1} / ((k+1) n^k).
// The radius law is not stated in the source material; the test suite pins it
// against an independent adaptive ODE integration before anything trusts it.

namespace hkflow {

struct ConstantsLedger;

struct SphereSolution {
    int n = 2;        // dimension >= 2
    int k = 3;        // odd >= 3
    double R0 = 1.0;  // initial radius > 0

    double T_max() const;
    // R(t); throws "past blow-up" for t >= T_max. Negative t is allowed
    // (the closed form extends backwards), which the residual suite uses.
    double radius_at(double t) const;
    double H_at(double t) const;   // n / R(t)
    double A2_at(double t) const;  // n / R(t)^2
    double area_at(double t) const;  // omega_n R^n
};

// Area of the unit n-sphere in R^{n+1}.
double unit_sphere_area(int n);

struct SphereMonitors {
    double H, A2, Q, H_min, area;
};
// Exact monitor values at time t under the given constants ledger
// (Q = |A|^2/H^{2k} + C0 H^{ell+1}).
SphereMonitors exact_monitors(const SphereSolution& sol, const ConstantsLedger& ledger, double t);

struct LAlphaResult {
    double value = 0.0;     // int_0^{t_end} int_M H^alpha dmu dt (finite part)
    double norm = 0.0;      // value^(1/alpha)
    bool divergent = false; // t_end == T_max and alpha >= n+k+1
};
// Space-time L^alpha accumulation of H in closed form. The integrand is
// omega_n n^alpha R^{n-alpha}, whose antiderivative in t is a power of
// R^{k+1} (or a log at alpha = n+k+1). Requires alpha >= 1.
LAlphaResult l_alpha_norm(const SphereSolution& sol, double alpha, double t_end);

// Slope per decade of the truncated alpha = n+k+1 accumulator evaluated at
// t_end = T_max (1 - 10^-m): omega_n n^{alpha-k}/(k+1) * ln 10.
double l_alpha_log_slope(const SphereSolution& sol);

} // namespace hkflow
