#include "hkflow/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hkflow {

MetricData metric_from_chart(const ChartSample& sample, const MetricDerivs& derivs,
                             int node_index) {
    MetricData m;
    m.g.uu = dot(sample.d_u, sample.d_u);
    m.g.uphi = dot(sample.d_u, sample.d_phi);
    m.g.phiphi = dot(sample.d_phi, sample.d_phi);

    double det = m.g.uu * m.g.phiphi - m.g.uphi * m.g.uphi;
    if (!(det > 0.0)) {
        std::string where = node_index >= 0 ? " at node " + std::to_string(node_index) : "";
        throw std::runtime_error("degenerate chart" + where + " (det g = " + std::to_string(det) + ")");
    }

    m.g_inv.uu = m.g.phiphi / det;
    m.g_inv.uphi = -m.g.uphi / det;
    m.g_inv.phiphi = m.g.uu / det;
    m.sqrt_det_g = std::sqrt(det);

    // dg[l][i][j] = d_l g_ij; only d_u is nonzero for this chart family.
    const double dg[2][2][2] = {
        {{derivs.dg_du.uu, derivs.dg_du.uphi}, {derivs.dg_du.uphi, derivs.dg_du.phiphi}},
        {{0.0, 0.0}, {0.0, 0.0}},
    };
    const double ginv[2][2] = {{m.g_inv.uu, m.g_inv.uphi}, {m.g_inv.uphi, m.g_inv.phiphi}};

    for (int mm = 0; mm < 2; ++mm)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += ginv[mm][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                m.christoffel[mm][i][j] = 0.5 * s;
            }
    return m;
}

ShapeData shape_from_chart(const ChartSample& sample, const MetricData& metric) {
    ShapeData s;
    Vec3 n = cross(sample.d_u, sample.d_phi);
    s.nu = n / norm(n);

    s.h.uu = -dot(s.nu, sample.dd_uu);
    s.h.uphi = -dot(s.nu, sample.dd_uphi);
    s.h.phiphi = -dot(s.nu, sample.dd_phiphi);

    s.H = metric.g_inv.uu * s.h.uu + 2.0 * metric.g_inv.uphi * s.h.uphi +
          metric.g_inv.phiphi * s.h.phiphi;

    // |A|^2 = g^{ik} g^{jl} h_ij h_kl
    const double gi[2][2] = {{metric.g_inv.uu, metric.g_inv.uphi},
                             {metric.g_inv.uphi, metric.g_inv.phiphi}};
    const double h[2][2] = {{s.h.uu, s.h.uphi}, {s.h.uphi, s.h.phiphi}};
    double a2 = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    a2 += gi[i][k] * gi[j][l] * h[i][j] * h[k][l];
    s.A_norm_sq = a2;

    // Principal curvatures = eigenvalues of the shape operator g^{-1} h.
    // On axisymmetric charts the operator is diagonal; keep the meridian
    // (u) eigenvalue first in that case.
    double s_uu = gi[0][0] * h[0][0] + gi[0][1] * h[1][0];
    double s_up = gi[0][0] * h[0][1] + gi[0][1] * h[1][1];
    double s_pu = gi[1][0] * h[0][0] + gi[1][1] * h[1][0];
    double s_pp = gi[1][0] * h[0][1] + gi[1][1] * h[1][1];
    double tr = s_uu + s_pp;
    double det = s_uu * s_pp - s_up * s_pu;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    if (std::fabs(s_up) + std::fabs(s_pu) < 1e-14 * (std::fabs(tr) + 1.0)) {
        s.kappa1 = s_uu;
        s.kappa2 = s_pp;
    } else {
        s.kappa1 = tr / 2.0 + disc;
        s.kappa2 = tr / 2.0 - disc;
    }
    return s;
}

double AxisymGrid::area() const {
    double a = 0.0;
    for (double m : mu_cell) a += m;
    return a;
}

double AxisymGrid::integrate(std::span<const double> f) const {
    double a = 0.0;
    for (size_t j = 0; j < mu_cell.size(); ++j) a += mu_cell[j] * f[j];
    return a;
}

void deriv_even_into(const AxisymGrid& grid, std::span<const double> f,
                     std::vector<double>& out) {
    const size_t n = grid.nodes();
    out.resize(n);
    const double inv2du = 1.0 / (2.0 * grid.du);
    for (size_t j = 1; j + 1 < n; ++j) out[j] = (f[j + 1] - f[j - 1]) * inv2du;
    // parity: even fields have vanishing derivative at both poles
    out[0] = 0.0;
    out[n - 1] = 0.0;
}

std::vector<double> deriv_even(const AxisymGrid& grid, std::span<const double> f) {
    std::vector<double> d;
    deriv_even_into(grid, f, d);
    return d;
}

void surface_gradient_norm_sq_into(const AxisymGrid& grid, std::span<const double> f,
                                   std::vector<double>& out) {
    deriv_even_into(grid, f, out);
    for (size_t j = 0; j < out.size(); ++j) {
        double fu = out[j] * grid.inv_w[j];
        out[j] = fu * fu;
    }
}

std::vector<double> surface_gradient_norm_sq(const AxisymGrid& grid, std::span<const double> f) {
    std::vector<double> d;
    surface_gradient_norm_sq_into(grid, f, d);
    return d;
}

void laplace_beltrami_into(const AxisymGrid& grid, std::span<const double> f,
                           std::vector<double>& flux, std::vector<double>& out) {
    const size_t n = grid.nodes();
    const double inv_du = 1.0 / grid.du;
    const double two_pi = 2.0 * std::acos(-1.0);

    // Pole guard: computed fields carry an O(h^2) bias whose constant differs
    // between the one-sided pole stencil and the interior stencils; the
    // resulting one-node jump would turn into an O(1) Laplacian error at the
    // pole-adjacent nodes. Replace the pole values by the even-parity
    // quadratic extrapolant (4 f_1 - f_2)/3, which is O(h^4) for smooth
    // fields. Telescoping, and hence exact conservation, is unaffected.
    double f0 = (4.0 * f[1] - f[2]) / 3.0;
    double fN = (4.0 * f[n - 2] - f[n - 3]) / 3.0;

    // face conductances c = r/w averaged to midpoints; c = 0 on the axis
    flux.resize(n - 1);  // flux[j] through face j+1/2, times 2*pi
    const double half_scale = two_pi * 0.5 * inv_du;
    for (size_t j = 0; j + 1 < n; ++j) {
        double cj = grid.r[j] * grid.inv_w[j];
        double cj1 = grid.r[j + 1] * grid.inv_w[j + 1];
        double lo = j == 0 ? f0 : f[j];
        double hi = j + 2 == n ? fN : f[j + 1];
        flux[j] = half_scale * (cj + cj1) * (hi - lo);
    }

    out.resize(n);
    out[0] = flux[0] / grid.mu_cell[0];
    for (size_t j = 1; j + 1 < n; ++j) out[j] = (flux[j] - flux[j - 1]) / grid.mu_cell[j];
    out[n - 1] = -flux[n - 2] / grid.mu_cell[n - 1];
}

std::vector<double> laplace_beltrami(const AxisymGrid& grid, std::span<const double> f) {
    std::vector<double> flux, lap;
    laplace_beltrami_into(grid, f, flux, lap);
    return lap;
}

void covariant_grad_A_into(const AxisymGrid& grid,
                           std::span<const double> h_uu, std::span<const double> h_pp,
                           std::span<const double> r_prime, std::span<const double> w_prime,
                           std::vector<double>& d_huu, std::vector<double>& d_hpp, GradA& out) {
    const size_t n = grid.nodes();
    out.nabla_u_huu.assign(n, 0.0);
    out.nabla_u_hpp.assign(n, 0.0);
    out.nabla_phi_hup.assign(n, 0.0);
    out.norm_sq.assign(n, 0.0);

    deriv_even_into(grid, h_uu, d_huu);
    deriv_even_into(grid, h_pp, d_hpp);

    for (size_t j = 1; j + 1 < n; ++j) {
        double r = grid.r[j];
        double inv_w = grid.inv_w[j], inv_r = 1.0 / r;
        double gu = w_prime[j] * inv_w;   // Gamma^u_uu
        double gp = r_prime[j] * inv_r;   // Gamma^phi_uphi
        double nuu = d_huu[j] - 2.0 * gu * h_uu[j];
        double npp = d_hpp[j] - 2.0 * gp * h_pp[j];
        double nup = -gp * h_pp[j] + (r * r_prime[j] * inv_w * inv_w) * h_uu[j];
        out.nabla_u_huu[j] = nuu;
        out.nabla_u_hpp[j] = npp;
        out.nabla_phi_hup[j] = nup;
        double iw2 = inv_w * inv_w, ir4 = inv_r * inv_r * inv_r * inv_r;
        out.norm_sq[j] = nuu * nuu * iw2 * iw2 * iw2 + (npp * npp + 2.0 * nup * nup) * iw2 * ir4;
    }
    // nabla A vanishes at the poles of any smooth axisymmetric surface
}

GradA covariant_grad_A(const AxisymGrid& grid,
                       std::span<const double> h_uu, std::span<const double> h_pp,
                       std::span<const double> r_prime, std::span<const double> w_prime) {
    GradA out;
    std::vector<double> d_huu, d_hpp;
    covariant_grad_A_into(grid, h_uu, h_pp, r_prime, w_prime, d_huu, d_hpp, out);
    return out;
}

} // namespace hkflow
