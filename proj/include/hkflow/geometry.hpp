#pragma once
#include <span>
#include <vector>

#include "hkflow/vec3.hpp"

// Differential geometry of a parametrized surface chart in R^3, plus the 1-D
// field operators used on axisymmetric grids.
//
// Conventions (every test depends on these):
//   * nu is the OUTER unit normal (points away from the enclosed body).
//   * h_ij = -<nu, d2F/dx^i dx^j>, so a round sphere of radius R has
//     kappa_1 = kappa_2 = 1/R and H = g^{ij} h_ij = n/R > 0.
//   * Charts are (u, phi); axisymmetric fields are stored as 1-D arrays in u
//     with u_j = j*pi/N. phi-dependence enters only through g_phiphi = r^2 and
//     h_phiphi, which the contraction formulas carry explicitly.
//   * Across poles, r is odd and z (and every scalar geometric field) is even;
//     pole stencils use that parity.

namespace hkflow {

struct ChartSample {
    Vec3 position;
    Vec3 d_u, d_phi;              // dF/du, dF/dphi
    Vec3 dd_uu, dd_uphi, dd_phiphi;
};

// Symmetric 2x2 tensor in (u, phi) coordinates.
struct Sym2 {
    double uu = 0.0, uphi = 0.0, phiphi = 0.0;
};

// d g_ij / du, supplied by the caller's stencil. d/dphi vanishes by symmetry
// for every chart family this artifact handles.
struct MetricDerivs {
    Sym2 dg_du;
};

struct MetricData {
    Sym2 g;
    Sym2 g_inv;
    double sqrt_det_g = 0.0;
    // christoffel[m][i][j] = Gamma^m_ij, symmetric in (i, j).
    double christoffel[2][2][2] = {};
};

struct ShapeData {
    Vec3 nu;
    Sym2 h;
    double H = 0.0;
    double A_norm_sq = 0.0;
    double kappa1 = 0.0;  // meridian (u) direction on axisymmetric charts
    double kappa2 = 0.0;  // parallel (phi) direction
};

// g_ij = <dF/dx^i, dF/dx^j> with inverse, area density and Christoffels
// Gamma^m_ij = 1/2 g^{ml} (d_i g_jl + d_j g_il - d_l g_ij).
// Throws on a degenerate chart (det g <= 0), naming node_index if >= 0.
MetricData metric_from_chart(const ChartSample& sample, const MetricDerivs& derivs,
                             int node_index = -1);

// Second fundamental form h_ij = -<nu, d2F>, mean curvature H = g^{ij} h_ij,
// |A|^2 and principal curvatures (shape operator eigenvalues).
ShapeData shape_from_chart(const ChartSample& sample, const MetricData& metric);

// --- axisymmetric field operators -----------------------------------------
//
// Grid context for a profile (r(u), z(u)), u in [0, pi], nodes j = 0..N.
// Carries the metric data the operators need: w = sqrt(r'^2 + z'^2),
// sqrt(det g) = w*r, and finite-volume cell measures with polar caps so that
// the Laplace-Beltrami operator conserves exactly (sum of Delta f against the
// cell measures telescopes to zero).
struct AxisymGrid {
    double du = 0.0;
    std::vector<double> r, w;
    std::vector<double> inv_w;    // cached 1/w
    std::vector<double> mu_cell;  // 2*pi * cell measure, polar caps included

    size_t nodes() const { return r.size(); }
    double area() const;
    double integrate(std::span<const double> f) const;  // integral over M w.r.t. dmu
};

// Derivative in u of a field that is even across both poles (all scalar
// geometric fields). Centered second order; f'(pole) = 0 by parity.
std::vector<double> deriv_even(const AxisymGrid& grid, std::span<const double> f);
void deriv_even_into(const AxisymGrid& grid, std::span<const double> f, std::vector<double>& out);

// |grad f|^2 = g^{ij} d_i f d_j f = (f')^2 / w^2 for axisymmetric scalars.
std::vector<double> surface_gradient_norm_sq(const AxisymGrid& grid, std::span<const double> f);
void surface_gradient_norm_sq_into(const AxisymGrid& grid, std::span<const double> f,
                                   std::vector<double>& out);

// Delta f = (1/sqrt(det g)) d_i (sqrt(det g) g^{ij} d_j f), discretized in
// conservative (finite-volume) flux form; pole cells use the polar-cap
// measure, which recovers the smooth limit Delta f -> 2 f''(0) / w(0)^2.
std::vector<double> laplace_beltrami(const AxisymGrid& grid, std::span<const double> f);
void laplace_beltrami_into(const AxisymGrid& grid, std::span<const double> f,
                           std::vector<double>& scratch_flux, std::vector<double>& out);

// Covariant derivative of the second fundamental form on an axisymmetric
// grid. The nonzero components are
//   nabla_u h_uu   = h_uu' - 2 (w'/w) h_uu
//   nabla_u h_pp   = h_pp' - 2 (r'/r) h_pp
//   nabla_phi h_up = -(r'/r) h_pp + (r r'/w^2) h_uu
// (all three vanish at the poles for a smooth surface), and
//   |nabla A|^2 = (nabla_u h_uu)^2/w^6 + (nabla_u h_pp)^2/(w^2 r^4)
//               + 2 (nabla_phi h_up)^2/(w^2 r^4).
struct GradA {
    std::vector<double> nabla_u_huu;
    std::vector<double> nabla_u_hpp;
    std::vector<double> nabla_phi_hup;
    std::vector<double> norm_sq;
};

GradA covariant_grad_A(const AxisymGrid& grid,
                       std::span<const double> h_uu, std::span<const double> h_pp,
                       std::span<const double> r_prime, std::span<const double> w_prime);
void covariant_grad_A_into(const AxisymGrid& grid,
                           std::span<const double> h_uu, std::span<const double> h_pp,
                           std::span<const double> r_prime, std::span<const double> w_prime,
                           std::vector<double>& scratch_d_huu, std::vector<double>& scratch_d_hpp,
                           GradA& out);

} // namespace hkflow
