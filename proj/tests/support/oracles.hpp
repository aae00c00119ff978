#pragma once
#include <complex>
#include <functional>
#include <vector>

#include "hkflow/profile.hpp"
#include "hkflow/vec3.hpp"

// Independent numerical oracles for the test suite. Everything here stays off
// the production code path: derivatives come from finite differences or
// complex-step on exact parametrizations, integrals from adaptive quadrature,
// and ODE trajectories from an adaptive Runge-Kutta integrator.

namespace hkflow::oracle {

// Adaptive RK45 (Dormand-Prince) for scalar dy/dt = f(t, y).
double rk45_integrate(const std::function<double(double, double)>& f, double y0, double t0,
                      double t1, double rel_tol = 1e-12);

// Adaptive Simpson quadrature of f over [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12);

// Geometric quantities of a parametrized surface F(u, phi) computed by
// second-order finite differences of the exact parametrization (independent
// of the profile-stencil pipeline).
struct ChartOracle {
    double g_uu, g_uphi, g_phiphi;
    double H, A2, kappa1, kappa2;
};
ChartOracle chart_oracle(const std::function<Vec3(double, double)>& F, double u, double phi,
                         double step = 1e-5);

// Closed-form fields of the spheroid (a sin u, c cos u): curvatures, their
// arc-length derivatives, and the gradient/Laplacian quantities built from
// them. Derivatives in u are exact (hand-differentiated); the Laplacian uses
// complex-step differentiation of the analytic flux, exact to roundoff.
struct SpheroidOracle {
    double a = 1.0, c = 2.0;

    double w(double u) const;
    double kappa1(double u) const;  // meridian, = a c / w^3
    double kappa2(double u) const;  // parallel, = c / (a w)
    double H(double u) const;
    double A2(double u) const;
    double grad_H_sq(double u) const;     // (dH/ds)^2
    double grad_A_sq(double u) const;     // (dk1/ds)^2 + 3 (dk2/ds)^2
    double cross_AdA_dH(double u) const;  // (k1 k1' + k2 k2')(k1' + k2'), ' = d/ds
    double lap_H(double u) const;         // (1/(w r)) d/du[(r/w) dH/du]
};

// pi * integral of r^2 (-dz) along the profile polyline (disc slicing);
// independent of the divergence-theorem volume in the geometry module.
double profile_volume_slices(const ProfileSurface& s);

// Deterministic family of smooth convex perturbed spheres for property tests.
ProfileSurface random_convex_profile(unsigned seed, int N);

} // namespace hkflow::oracle
