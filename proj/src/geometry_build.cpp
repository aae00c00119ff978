#include "hkflow/geometry_build.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hkflow/numeric.hpp"

namespace hkflow {

namespace {
const double kTwoPi = 2.0 * std::acos(-1.0);
}

double GeometryFields::H_min() const {
    double m = H[0];
    for (double v : H) m = std::min(m, v);
    return m;
}

double GeometryFields::H_max() const {
    double m = H[0];
    for (double v : H) m = std::max(m, v);
    return m;
}

double GeometryFields::A2_max() const {
    double m = A2[0];
    for (double v : A2) m = std::max(m, v);
    return m;
}

double GeometryFields::volume() const {
    const size_t n = grid.nodes();
    double v = 0.0;
    for (size_t j = 0; j < n; ++j)
        v += grid.mu_cell[j] * (grid.r[j] * nu_r[j] + z[j] * nu_z[j]);
    return v / 3.0;
}

GeometryFields build_geometry(const ProfileSurface& s, const GeometryOptions& opt) {
    GeometryFields g;
    GeometryScratch sc;
    build_geometry_into(s, opt, sc, g);
    return g;
}

void build_geometry_into(const ProfileSurface& s, const GeometryOptions& opt, GeometryScratch& sc,
                         GeometryFields& g) {
    s.validate();
    const int N = s.segments();
    const size_t n = N + 1;
    const double du = s.du();

    g.grid.du = du;
    g.grid.r = s.r;
    g.z = s.z;
    g.pole_regular = true;
    g.r_u.resize(n);
    g.z_u.resize(n);
    g.r_uu.resize(n);
    g.z_uu.resize(n);

    // Profile derivatives: centered second order; poles by parity
    // (r odd, z even across each pole).
    for (size_t j = 1; j + 1 < n; ++j) {
        g.r_u[j] = (s.r[j + 1] - s.r[j - 1]) / (2.0 * du);
        g.z_u[j] = (s.z[j + 1] - s.z[j - 1]) / (2.0 * du);
        g.r_uu[j] = (s.r[j + 1] - 2.0 * s.r[j] + s.r[j - 1]) / (du * du);
        g.z_uu[j] = (s.z[j + 1] - 2.0 * s.z[j] + s.z[j - 1]) / (du * du);
    }
    g.r_u[0] = s.r[1] / du;
    g.r_u[N] = -s.r[N - 1] / du;
    g.z_u[0] = 0.0;
    g.z_u[N] = 0.0;
    g.r_uu[0] = 0.0;
    g.r_uu[N] = 0.0;
    g.z_uu[0] = 2.0 * (s.z[1] - s.z[0]) / (du * du);
    g.z_uu[N] = 2.0 * (s.z[N - 1] - s.z[N]) / (du * du);

    if (opt.check_pole_regularity) {
        // one-sided 2nd-order z' at the poles must vanish for a smooth surface
        auto check = [&](int j0, int j1, int j2, const char* which) {
            double zp = (-3.0 * s.z[j0] + 4.0 * s.z[j1] - s.z[j2]) / (2.0 * du);
            double w0 = std::fabs(g.r_u[j0]);
            if (std::fabs(zp) > opt.pole_tol * std::max(w0, 1e-300)) {
                g.pole_regular = false;
                throw std::runtime_error(std::string("pole regularity violated at ") + which +
                                         " pole: |z'| = " + std::to_string(std::fabs(zp)));
            }
        };
        check(0, 1, 2, "north");
        check(N, N - 1, N - 2, "south");
    }

    g.grid.w.resize(n);
    g.grid.inv_w.resize(n);
    g.w_u.resize(n);
    for (size_t j = 0; j < n; ++j) {
        g.grid.w[j] = std::sqrt(g.r_u[j] * g.r_u[j] + g.z_u[j] * g.z_u[j]);
        g.grid.inv_w[j] = 1.0 / g.grid.w[j];
    }
    for (size_t j = 0; j < n; ++j)
        g.w_u[j] = (g.r_u[j] * g.r_uu[j] + g.z_u[j] * g.z_uu[j]) * g.grid.inv_w[j];

    // finite-volume cell measures with polar caps
    g.grid.mu_cell.resize(n);
    for (size_t j = 1; j + 1 < n; ++j) g.grid.mu_cell[j] = kTwoPi * du * g.grid.w[j] * s.r[j];
    g.grid.mu_cell[0] = kTwoPi * g.grid.w[0] * g.grid.w[0] * du * du / 8.0;
    g.grid.mu_cell[N] = kTwoPi * g.grid.w[N] * g.grid.w[N] * du * du / 8.0;

    g.h_uu.resize(n);
    g.h_pp.resize(n);
    g.kappa1.resize(n);
    g.kappa2.resize(n);
    g.H.resize(n);
    g.A2.resize(n);
    g.nu_r.resize(n);
    g.nu_z.resize(n);

    for (size_t j = 0; j < n; ++j) {
        double inv_w = g.grid.inv_w[j];
        g.nu_r[j] = -g.z_u[j] * inv_w;
        g.nu_z[j] = g.r_u[j] * inv_w;
        g.h_uu[j] = (g.z_u[j] * g.r_uu[j] - g.r_u[j] * g.z_uu[j]) * inv_w;
        g.h_pp[j] = -g.z_u[j] * s.r[j] * inv_w;
        g.kappa1[j] = g.h_uu[j] * inv_w * inv_w;
        if (j == 0 || j == static_cast<size_t>(N)) {
            g.kappa2[j] = g.kappa1[j];  // umbilic pole limit
            g.h_pp[j] = 0.0;
        } else {
            g.kappa2[j] = -g.z_u[j] * inv_w / s.r[j];
        }
        g.H[j] = g.kappa1[j] + g.kappa2[j];
        g.A2[j] = g.kappa1[j] * g.kappa1[j] + g.kappa2[j] * g.kappa2[j];
        if (!std::isfinite(g.H[j]))
            throw std::runtime_error("non-finite geometry at node " + std::to_string(j));
    }

    g.convex = true;
    for (size_t j = 0; j < n; ++j)
        if (!(g.kappa1[j] > 0.0 && g.kappa2[j] > 0.0)) { g.convex = false; break; }

    surface_gradient_norm_sq_into(g.grid, g.H, g.grad_H_sq);
    laplace_beltrami_into(g.grid, g.H, sc.flux, g.lap_H);
    covariant_grad_A_into(g.grid, g.h_uu, g.h_pp, g.r_u, g.w_u, sc.d_huu, sc.d_hpp, g.grad_A);

    g.tr_A3.resize(n);
    g.h_gradH_gradH.resize(n);
    g.cross_AdA_dH.resize(n);
    deriv_even_into(g.grid, g.H, sc.dH);
    const std::vector<double>& dH = sc.dH;
    for (size_t j = 0; j < n; ++j) {
        g.tr_A3[j] = pow_i(g.kappa1[j], 3) + pow_i(g.kappa2[j], 3);
        g.h_gradH_gradH[j] = g.kappa1[j] * g.grad_H_sq[j];
        if (j == 0 || j == static_cast<size_t>(N)) {
            g.cross_AdA_dH[j] = 0.0;
        } else {
            double iw = g.grid.inv_w[j], ir = 1.0 / s.r[j];
            double iw2 = iw * iw, ir2 = ir * ir;
            // g^{ua} h^{jk} (nabla_u h_jk)(d_a H)
            double hjk_nabla = g.h_uu[j] * g.grad_A.nabla_u_huu[j] * iw2 * iw2 +
                               g.h_pp[j] * g.grad_A.nabla_u_hpp[j] * ir2 * ir2;
            g.cross_AdA_dH[j] = hjk_nabla * dH[j] * iw2;
        }
    }
}

FlowVelocity flow_displacement(const ProfileSurface& s, const GeometryFields& g, int k) {
    (void)s;
    const size_t n = g.H.size();
    double hmin = g.H[0];
    std::string bad;
    for (size_t j = 0; j < n; ++j) {
        if (g.H[j] <= 0.0) {
            if (!bad.empty()) bad += ",";
            bad += std::to_string(j);
        }
        hmin = std::min(hmin, g.H[j]);
    }
    if (!bad.empty())
        throw std::runtime_error("H nonpositive at node(s) " + bad +
                                 "; the flow requires H > 0 everywhere (hypothesis (a))");

    FlowVelocity v;
    v.vr.resize(n);
    v.vz.resize(n);
    for (size_t j = 0; j < n; ++j) {
        double speed = pow_i(g.H[j], k);
        v.vr[j] = -speed * g.nu_r[j];
        v.vz[j] = -speed * g.nu_z[j];
    }
    // poles move only along z
    v.vr[0] = 0.0;
    v.vr[n - 1] = 0.0;
    return v;
}

ProfileSurface displaced(const ProfileSurface& s, const FlowVelocity& v, double dt) {
    ProfileSurface out = s;
    const size_t n = s.r.size();
    for (size_t j = 0; j < n; ++j) {
        out.r[j] = s.r[j] + dt * v.vr[j];
        out.z[j] = s.z[j] + dt * v.vz[j];
    }
    out.r[0] = 0.0;
    out.r[n - 1] = 0.0;
    return out;
}

} // namespace hkflow
