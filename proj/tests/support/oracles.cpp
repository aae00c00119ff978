#include "support/oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hkflow/geometry_build.hpp"

namespace hkflow::oracle {

double rk45_integrate(const std::function<double(double, double)>& f, double y0, double t0,
                      double t1, double rel_tol) {
    // Dormand-Prince 5(4) coefficients
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0, y = y0;
    double h = (t1 - t0) / 100.0;
    int guard = 0;
    while (t < t1 && ++guard < 2000000) {
        if (t + h > t1) h = t1 - t;
        double k1 = f(t, y);
        double k2 = f(t + c2 * h, y + h * a21 * k1);
        double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        double k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        double ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        double k7 = f(t + h, ynew);
        double err = std::fabs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        double tol = rel_tol * std::max(std::fabs(y), std::fabs(ynew)) + 1e-300;
        if (err <= tol) {
            t += h;
            y = ynew;
        }
        double scale = err > 0 ? 0.9 * std::pow(tol / err, 0.2) : 2.0;
        h *= std::min(5.0, std::max(0.2, scale));
    }
    return y;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                            double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    if (depth > 60 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 0);
}

ChartOracle chart_oracle(const std::function<Vec3(double, double)>& F, double u, double phi,
                         double step) {
    const double h = step;
    auto d_u = (F(u + h, phi) - F(u - h, phi)) / (2.0 * h);
    auto d_p = (F(u, phi + h) - F(u, phi - h)) / (2.0 * h);
    auto dd_uu = (F(u + h, phi) - F(u, phi) * 2.0 + F(u - h, phi)) / (h * h);
    auto dd_pp = (F(u, phi + h) - F(u, phi) * 2.0 + F(u, phi - h)) / (h * h);
    auto dd_up = (F(u + h, phi + h) - F(u + h, phi - h) - F(u - h, phi + h) + F(u - h, phi - h)) /
                 (4.0 * h * h);

    ChartOracle o;
    o.g_uu = dot(d_u, d_u);
    o.g_uphi = dot(d_u, d_p);
    o.g_phiphi = dot(d_p, d_p);
    Vec3 nu = cross(d_u, d_p);
    nu = nu / norm(nu);
    double l = -dot(nu, dd_uu), m = -dot(nu, dd_up), q = -dot(nu, dd_pp);
    double det_g = o.g_uu * o.g_phiphi - o.g_uphi * o.g_uphi;
    // shape operator g^{-1} h
    double s11 = (o.g_phiphi * l - o.g_uphi * m) / det_g;
    double s12 = (o.g_phiphi * m - o.g_uphi * q) / det_g;
    double s21 = (o.g_uu * m - o.g_uphi * l) / det_g;
    double s22 = (o.g_uu * q - o.g_uphi * m) / det_g;
    double tr = s11 + s22, dets = s11 * s22 - s12 * s21;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dets));
    o.H = tr;
    o.A2 = tr * tr - 2.0 * dets;
    if (std::fabs(s12) + std::fabs(s21) < 1e-9) {
        o.kappa1 = s11;
        o.kappa2 = s22;
    } else {
        o.kappa1 = tr / 2.0 + disc;
        o.kappa2 = tr / 2.0 - disc;
    }
    return o;
}

double SpheroidOracle::w(double u) const {
    double s = std::sin(u), cc = std::cos(u);
    return std::sqrt(a * a * cc * cc + c * c * s * s);
}

double SpheroidOracle::kappa1(double u) const { return a * c / std::pow(w(u), 3); }
double SpheroidOracle::kappa2(double u) const { return c / (a * w(u)); }
double SpheroidOracle::H(double u) const { return kappa1(u) + kappa2(u); }
double SpheroidOracle::A2(double u) const {
    double k1 = kappa1(u), k2 = kappa2(u);
    return k1 * k1 + k2 * k2;
}

namespace {
// dw/du for the spheroid
double w_prime(double a, double c, double u) {
    double s = std::sin(u), cc = std::cos(u);
    double ww = std::sqrt(a * a * cc * cc + c * c * s * s);
    return (c * c - a * a) * s * cc / ww;
}
} // namespace

double SpheroidOracle::grad_H_sq(double u) const {
    double ww = w(u), wp = w_prime(a, c, u);
    double dk1 = -3.0 * a * c * wp / std::pow(ww, 4);
    double dk2 = -c * wp / (a * ww * ww);
    double dH_ds = (dk1 + dk2) / ww;
    return dH_ds * dH_ds;
}

double SpheroidOracle::grad_A_sq(double u) const {
    double ww = w(u), wp = w_prime(a, c, u);
    double dk1_ds = -3.0 * a * c * wp / std::pow(ww, 5);
    double dk2_ds = -c * wp / (a * std::pow(ww, 3));
    return dk1_ds * dk1_ds + 3.0 * dk2_ds * dk2_ds;
}

double SpheroidOracle::cross_AdA_dH(double u) const {
    double ww = w(u), wp = w_prime(a, c, u);
    double k1 = kappa1(u), k2 = kappa2(u);
    double dk1_ds = -3.0 * a * c * wp / std::pow(ww, 5);
    double dk2_ds = -c * wp / (a * std::pow(ww, 3));
    return (k1 * dk1_ds + k2 * dk2_ds) * (dk1_ds + dk2_ds);
}

double SpheroidOracle::lap_H(double u) const {
    using C = std::complex<double>;
    const double A = a, Cc = c;
    auto flux = [A, Cc](C u_) {
        C s = std::sin(u_), cc = std::cos(u_);
        C ww = std::sqrt(A * A * cc * cc + Cc * Cc * s * s);
        C wp = (Cc * Cc - A * A) * s * cc / ww;
        C dH_du = -3.0 * A * Cc * wp / (ww * ww * ww * ww) - Cc * wp / (A * ww * ww);
        C r = A * s;
        return (r / ww) * dH_du;
    };
    const double h = 1e-100;  // complex step: exact derivative to roundoff
    double dflux = std::imag(flux(C(u, h))) / h;
    return dflux / (w(u) * a * std::sin(u));
}

double profile_volume_slices(const ProfileSurface& s) {
    const double pi = std::acos(-1.0);
    double v = 0.0;
    for (int j = 0; j < s.segments(); ++j) {
        double rm = 0.5 * (s.r[j] + s.r[j + 1]);
        v += rm * rm * (s.z[j] - s.z[j + 1]);
    }
    return pi * v;
}

ProfileSurface random_convex_profile(unsigned seed, int N) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-0.03, 0.03);
    const double pi = std::acos(-1.0);
    for (int attempt = 0; attempt < 50; ++attempt) {
        double a1 = amp(rng), a2 = amp(rng), b1 = amp(rng);
        ProfileSurface s;
        s.r.resize(N + 1);
        s.z.resize(N + 1);
        for (int j = 0; j <= N; ++j) {
            double u = pi * j / N;
            double cc = std::cos(u);
            s.r[j] = std::sin(u) * (1.0 + a1 * cc * cc + a2 * (cc * cc * cc * cc));
            s.z[j] = cc * (1.0 + b1 * cc * cc);
        }
        s.r[0] = s.r[N] = 0.0;
        try {
            GeometryFields g = build_geometry(s);
            if (g.convex) return s;
        } catch (const std::exception&) {
        }
    }
    throw std::runtime_error("random_convex_profile: no convex sample found");
}

} // namespace hkflow::oracle
