#include "hkflow/sphere_exact.hpp"

#include <cmath>
#include <stdexcept>

#include "hkflow/constants_ledger.hpp"
#include "hkflow/numeric.hpp"

namespace hkflow {

double SphereSolution::T_max() const {
    return pow_i(R0, k + 1) / ((k + 1) * pow_i(static_cast<double>(n), k));
}

double SphereSolution::radius_at(double t) const {
    if (t >= T_max()) throw std::runtime_error("past blow-up: t >= T_max");
    double s = pow_i(R0, k + 1) - (k + 1) * pow_i(static_cast<double>(n), k) * t;
    return std::pow(s, 1.0 / (k + 1));
}

double SphereSolution::H_at(double t) const { return n / radius_at(t); }
double SphereSolution::A2_at(double t) const { double R = radius_at(t); return n / (R * R); }
double SphereSolution::area_at(double t) const { return unit_sphere_area(n) * pow_i(radius_at(t), n); }

double unit_sphere_area(int n) {
    // omega_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
    double half = 0.5 * (n + 1);
    return 2.0 * std::pow(std::acos(-1.0), half) / std::tgamma(half);
}

SphereMonitors exact_monitors(const SphereSolution& sol, const ConstantsLedger& ledger, double t) {
    SphereMonitors m;
    m.H = sol.H_at(t);
    m.A2 = sol.A2_at(t);
    m.Q = m.A2 / pow_i(m.H, 2 * sol.k) + ledger.C0 * pow_i(m.H, ledger.ell + 1);
    m.H_min = m.H;
    m.area = sol.area_at(t);
    return m;
}

LAlphaResult l_alpha_norm(const SphereSolution& sol, double alpha, double t_end) {
    if (alpha < 1.0) throw std::runtime_error("alpha must be >= 1");
    const double T = sol.T_max();
    if (t_end > T) throw std::runtime_error("t_end past T_max");
    LAlphaResult out;
    if (t_end <= 0.0) return out;

    const int n = sol.n, k = sol.k;
    const double wn = unit_sphere_area(n);
    const double nk = pow_i(static_cast<double>(n), k);
    const double s0 = pow_i(sol.R0, k + 1);
    const double s1 = s0 - (k + 1) * nk * t_end;  // R(t_end)^{k+1}, 0 at T_max
    const double pref = wn * std::pow(static_cast<double>(n), alpha - k) / (k + 1);
    const double gamma = (n - alpha + k + 1) / (k + 1);

    bool at_Tmax = (t_end == T) || (s1 <= 0.0);
    if (at_Tmax && alpha >= n + k + 1) {
        out.divergent = true;
        return out;
    }
    if (std::fabs(gamma) < 1e-14) {
        out.value = pref * std::log(s0 / s1);
    } else {
        double upper = std::pow(s0, gamma);
        double lower = at_Tmax ? 0.0 : std::pow(s1, gamma);
        out.value = pref * (upper - lower) / gamma;
    }
    out.norm = std::pow(out.value, 1.0 / alpha);
    return out;
}

double l_alpha_log_slope(const SphereSolution& sol) {
    double alpha = sol.n + sol.k + 1;
    return unit_sphere_area(sol.n) * std::pow(static_cast<double>(sol.n), alpha - sol.k) /
           (sol.k + 1) * std::log(10.0);
}

} // namespace hkflow
