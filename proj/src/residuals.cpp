#include "hkflow/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hkflow/numeric.hpp"
#include "hkflow/sphere_exact.hpp"

namespace hkflow {

namespace {
const double kPi = std::acos(-1.0);
const double kTwoPi = 2.0 * kPi;
}

const char* identity_name(IdentityId id) {
    switch (id) {
        case IdentityId::H_evo: return "H_evo";
        case IdentityId::A2_evo: return "A2_evo";
        case IdentityId::Hpow_evo: return "Hpow_evo";
        case IdentityId::ratio_evo: return "ratio_evo";
        case IdentityId::ratio_evo_2k: return "ratio_evo_2k";
    }
    return "?";
}

IdentityId identity_from_name(const std::string& name) {
    if (name == "H_evo") return IdentityId::H_evo;
    if (name == "A2_evo") return IdentityId::A2_evo;
    if (name == "Hpow_evo") return IdentityId::Hpow_evo;
    if (name == "ratio_evo") return IdentityId::ratio_evo;
    if (name == "ratio_evo_2k") return IdentityId::ratio_evo_2k;
    throw std::runtime_error("unknown identity name: " + name);
}

std::vector<double> identity_evolved_field(const IdentitySpec& spec, const GeometryFields& g,
                                           int k) {
    const size_t n = g.H.size();
    std::vector<double> f(n);
    int ell = spec.id == IdentityId::ratio_evo_2k ? 2 * k - 1 : spec.ell;
    for (size_t j = 0; j < n; ++j) {
        switch (spec.id) {
            case IdentityId::H_evo: f[j] = g.H[j]; break;
            case IdentityId::A2_evo: f[j] = g.A2[j]; break;
            case IdentityId::Hpow_evo: f[j] = pow_i(g.H[j], ell + 1); break;
            case IdentityId::ratio_evo:
            case IdentityId::ratio_evo_2k: f[j] = g.A2[j] / pow_i(g.H[j], ell + 1); break;
        }
    }
    return f;
}

namespace {

std::vector<double> ratio_terms_common(std::vector<TermValue>& terms, const GeometryFields& g,
                                       int k, int ell) {
    const size_t n = g.H.size();
    std::vector<double> f = identity_evolved_field({IdentityId::ratio_evo, ell}, g, k);
    std::vector<double> lap_f = laplace_beltrami(g.grid, f);
    std::vector<double> df = deriv_even(g.grid, f);
    std::vector<double> Hk1(n);
    for (size_t j = 0; j < n; ++j) Hk1[j] = pow_i(g.H[j], k - 1);
    std::vector<double> dHk1 = deriv_even(g.grid, Hk1);

    double e_f = ell - 1.0;           // f ~ lambda^{ell-1}
    double e_t = e_f - (k + 1.0);     // every term ~ lambda^{ell-k-2}

    TermValue lap{"k H^{k-1} lap(f)", std::vector<double>(n), e_t};
    TermValue drift{"drift <grad H^{k-1}, grad f>", std::vector<double>(n), e_t};
    TermValue sq{"-2k/H^{l+4-k} [H grad A - (l+1)/2 A grad H]^2", std::vector<double>(n), e_t};
    TermValue grad2{"2k(k-1) h(gradH,gradH)/H^{l+3-k}", std::vector<double>(n), e_t};
    TermValue a4{"(2k-l-1) |A|^4 / H^{l+2-k}", std::vector<double>(n), e_t};
    TermValue mixed{"-k(l+1)(2k-l-1)/2 |A|^2 |gradH|^2 / H^{l+4-k}", std::vector<double>(n), e_t};
    TermValue corr{"-2(k-1) trA^3 / H^{l+1-k}", std::vector<double>(n), e_t};

    const double c_drift = static_cast<double>(k) * (ell + 1) / (k - 1.0);
    for (size_t j = 0; j < n; ++j) {
        double H = g.H[j];
        lap.value[j] = k * Hk1[j] * lap_f[j];
        drift.value[j] = c_drift * dHk1[j] * df[j] * g.grid.inv_w[j] * g.grid.inv_w[j];
        double bracket = H * H * g.grad_A.norm_sq[j] - (ell + 1.0) * H * g.cross_AdA_dH[j] +
                         0.25 * (ell + 1.0) * (ell + 1.0) * g.A2[j] * g.grad_H_sq[j];
        sq.value[j] = -2.0 * k * bracket / pow_i(H, ell + 4 - k);
        grad2.value[j] = 2.0 * k * (k - 1.0) * g.h_gradH_gradH[j] / pow_i(H, ell + 3 - k);
        a4.value[j] = (2.0 * k - ell - 1.0) * g.A2[j] * g.A2[j] / pow_i(H, ell + 2 - k);
        mixed.value[j] = -0.5 * k * (ell + 1.0) * (2.0 * k - ell - 1.0) * g.A2[j] *
                         g.grad_H_sq[j] / pow_i(H, ell + 4 - k);
        corr.value[j] = -2.0 * (k - 1.0) * g.tr_A3[j] / pow_i(H, ell + 1 - k);
    }
    terms = {lap, drift, sq, grad2, a4, mixed, corr};
    return f;
}

} // namespace

std::vector<TermValue> identity_rhs_terms(const IdentitySpec& spec, const GeometryFields& g,
                                          int k) {
    const size_t n = g.H.size();
    std::vector<TermValue> terms;

    switch (spec.id) {
        case IdentityId::H_evo: {
            TermValue t1{"k H^{k-1} lap(H)", std::vector<double>(n), -(k + 2.0)};
            TermValue t2{"H^k |A|^2", std::vector<double>(n), -(k + 2.0)};
            TermValue t3{"k(k-1) H^{k-2} |gradH|^2", std::vector<double>(n), -(k + 2.0)};
            for (size_t j = 0; j < n; ++j) {
                double H = g.H[j];
                t1.value[j] = k * pow_i(H, k - 1) * g.lap_H[j];
                t2.value[j] = pow_i(H, k) * g.A2[j];
                t3.value[j] = k * (k - 1.0) * pow_i(H, k - 2) * g.grad_H_sq[j];
            }
            terms = {t1, t2, t3};
            break;
        }
        case IdentityId::A2_evo: {
            std::vector<double> lap_A2 = laplace_beltrami(g.grid, g.A2);
            double e = -(k + 3.0);
            TermValue t1{"k H^{k-1} lap(|A|^2)", std::vector<double>(n), e};
            TermValue t2{"-2k H^{k-1} |gradA|^2", std::vector<double>(n), e};
            TermValue t3{"2k H^{k-1} |A|^4", std::vector<double>(n), e};
            TermValue t4{"2k(k-1) H^{k-2} h(gradH,gradH)", std::vector<double>(n), e};
            TermValue t5{"-2(k-1) H^k trA^3", std::vector<double>(n), e};
            for (size_t j = 0; j < n; ++j) {
                double H = g.H[j];
                t1.value[j] = k * pow_i(H, k - 1) * lap_A2[j];
                t2.value[j] = -2.0 * k * pow_i(H, k - 1) * g.grad_A.norm_sq[j];
                t3.value[j] = 2.0 * k * pow_i(H, k - 1) * g.A2[j] * g.A2[j];
                t4.value[j] = 2.0 * k * (k - 1.0) * pow_i(H, k - 2) * g.h_gradH_gradH[j];
                t5.value[j] = -2.0 * (k - 1.0) * pow_i(H, k) * g.tr_A3[j];
            }
            terms = {t1, t2, t3, t4, t5};
            break;
        }
        case IdentityId::Hpow_evo: {
            int ell = spec.ell;
            std::vector<double> f = identity_evolved_field(spec, g, k);
            std::vector<double> lap_f = laplace_beltrami(g.grid, f);
            double e = -(k + ell + 2.0);
            TermValue t1{"k H^{k-1} lap(H^{l+1})", std::vector<double>(n), e};
            TermValue t2{"(l+1) H^{k+l} |A|^2", std::vector<double>(n), e};
            TermValue t3{"k(k-l-1)(l+1) H^{k+l-2} |gradH|^2", std::vector<double>(n), e};
            for (size_t j = 0; j < n; ++j) {
                double H = g.H[j];
                t1.value[j] = k * pow_i(H, k - 1) * lap_f[j];
                t2.value[j] = (ell + 1.0) * pow_i(H, k + ell) * g.A2[j];
                t3.value[j] =
                    k * (k - ell - 1.0) * (ell + 1.0) * pow_i(H, k + ell - 2) * g.grad_H_sq[j];
            }
            terms = {t1, t2, t3};
            break;
        }
        case IdentityId::ratio_evo:
            ratio_terms_common(terms, g, k, spec.ell);
            break;
        case IdentityId::ratio_evo_2k:
            ratio_terms_common(terms, g, k, 2 * k - 1);
            break;
    }
    return terms;
}

StateTriple triple_from_analytic_sphere(double R0, int k, double t0, double dt, int N) {
    SphereSolution sol{2, k, R0};
    StateTriple tr;
    tr.prev = analytic_sphere_fields(sol.radius_at(t0 - dt), N);
    tr.mid = analytic_sphere_fields(sol.radius_at(t0), N);
    tr.next = analytic_sphere_fields(sol.radius_at(t0 + dt), N);
    tr.t_prev = t0 - dt;
    tr.t_mid = t0;
    tr.t_next = t0 + dt;
    return tr;
}

StateTriple triple_from_euler_regenerated(const ProfileSurface& s, int k, double dt) {
    GeometryFields g = build_geometry(s);
    FlowVelocity v = flow_displacement(s, g, k);
    StateTriple tr;
    tr.prev = build_geometry(displaced(s, v, -dt));
    tr.mid = std::move(g);
    tr.next = build_geometry(displaced(s, v, dt));
    tr.t_prev = -dt;
    tr.t_mid = 0.0;
    tr.t_next = dt;
    return tr;
}

StateTriple triple_from_flow_steps(const ProfileSurface& s, int k, double dt) {
    GeometryFields g0 = build_geometry(s);
    FlowVelocity v0 = flow_displacement(s, g0, k);
    ProfileSurface s1 = displaced(s, v0, dt);
    GeometryFields g1 = build_geometry(s1);
    FlowVelocity v1 = flow_displacement(s1, g1, k);
    ProfileSurface s2 = displaced(s1, v1, dt);
    StateTriple tr;
    tr.prev = std::move(g0);
    tr.mid = std::move(g1);
    tr.next = build_geometry(s2);
    tr.t_prev = 0.0;
    tr.t_mid = dt;
    tr.t_next = 2.0 * dt;
    return tr;
}

ResidualReport evaluate_identity(const IdentitySpec& spec, const StateTriple& states, int k,
                                 const std::optional<IdentityTweak>& tweak) {
    double d1 = states.t_mid - states.t_prev;
    double d2 = states.t_next - states.t_mid;
    if (std::fabs(d1 - d2) > 1e-12 * std::max(std::fabs(d1), std::fabs(d2)))
        throw std::runtime_error("non-equispaced states");
    const double dt = d1;

    std::vector<double> f_prev = identity_evolved_field(spec, states.prev, k);
    std::vector<double> f_next = identity_evolved_field(spec, states.next, k);
    std::vector<TermValue> terms = identity_rhs_terms(spec, states.mid, k);
    if (tweak) {
        bool found = false;
        for (auto& t : terms)
            if (t.name == tweak->term) {
                for (auto& v : t.value) v *= tweak->factor;
                found = true;
            }
        if (!found) throw std::runtime_error("unknown RHS term: " + tweak->term);
    }

    const size_t n = f_prev.size();
    ResidualReport rep;
    rep.residual.resize(n);
    rep.dt = dt;
    rep.nodes = static_cast<int>(n) - 1;
    double l2 = 0.0;
    for (size_t j = 0; j < n; ++j) {
        double rhs = 0.0;
        for (const auto& t : terms) rhs += t.value[j];
        double lhs = (f_next[j] - f_prev[j]) / (2.0 * dt);
        double res = lhs - rhs;
        if (!std::isfinite(res)) throw std::runtime_error("blown-up fields in identity residual");
        rep.residual[j] = res;
        rep.rhs_scale = std::max(rep.rhs_scale, std::fabs(rhs));
        l2 += states.mid.grid.mu_cell[j] * res * res;
        if (j == 0 || j + 1 == n)
            rep.pole_max = std::max(rep.pole_max, std::fabs(res));
        else
            rep.interior_max = std::max(rep.interior_max, std::fabs(res));
    }
    rep.l2 = std::sqrt(l2);
    return rep;
}

ConsistencyReport verify_lemma23_consistency(const GeometryFields& g, int k, int ell) {
    const size_t n = g.H.size();
    ConsistencyReport rep;
    rep.rel_discrepancy.assign(n, 0.0);
    for (size_t j = 1; j + 1 < n; ++j) {
        double H = g.H[j];
        double A2 = g.A2[j];
        double gH = g.grad_H_sq[j];
        double gA = g.grad_A.norm_sq[j];
        double cr = g.cross_AdA_dH[j];

        // pre-square expansion
        double pre = -2.0 * k * gA / pow_i(H, ell + 2 - k) +
                     (2.0 * k - ell - 1.0) * A2 * A2 / pow_i(H, ell + 2 - k) +
                     2.0 * k * (k - 1.0) * gH / pow_i(H, ell + 3 - k) -
                     k * (ell + 1.0) * (k + ell + 1.0) * A2 * gH / pow_i(H, ell + 4 - k) +
                     4.0 * k * (ell + 1.0) * H * cr / pow_i(H, ell + 4 - k);

        // completed-square form; the drift is expanded through the same
        // ingredients (grad|A|^2 = 2 grad A . A)
        double drift = 2.0 * k * (ell + 1.0) * cr / pow_i(H, ell + 3 - k) -
                       k * (ell + 1.0) * (ell + 1.0) * A2 * gH / pow_i(H, ell + 4 - k);
        double bracket =
            H * H * gA - (ell + 1.0) * H * cr + 0.25 * (ell + 1.0) * (ell + 1.0) * A2 * gH;
        double post = drift - 2.0 * k * bracket / pow_i(H, ell + 4 - k) +
                      2.0 * k * (k - 1.0) * gH / pow_i(H, ell + 3 - k) +
                      (2.0 * k - ell - 1.0) * A2 * A2 / pow_i(H, ell + 2 - k) -
                      0.5 * k * (ell + 1.0) * (2.0 * k - ell - 1.0) * A2 * gH /
                          pow_i(H, ell + 4 - k);

        double denom = std::max({std::fabs(pre), std::fabs(post), 1e-300});
        double rel = std::fabs(pre - post) / denom;
        rep.rel_discrepancy[j] = rel;
        rep.max_interior = std::max(rep.max_interior, rel);
    }
    return rep;
}

GeometryFields analytic_sphere_fields(double R, int N) {
    GeometryFields g;
    const size_t n = N + 1;
    const double du = kPi / N;
    g.grid.du = du;
    g.grid.r.resize(n);
    g.grid.w.assign(n, R);
    g.grid.inv_w.assign(n, 1.0 / R);
    g.grid.mu_cell.resize(n);
    g.z.resize(n);
    g.r_u.resize(n);
    g.z_u.resize(n);
    g.r_uu.resize(n);
    g.z_uu.resize(n);
    g.w_u.assign(n, 0.0);
    g.h_uu.assign(n, R);
    g.h_pp.resize(n);
    g.kappa1.assign(n, 1.0 / R);
    g.kappa2.assign(n, 1.0 / R);
    g.H.assign(n, 2.0 / R);
    g.A2.assign(n, 2.0 / (R * R));
    g.nu_r.resize(n);
    g.nu_z.resize(n);
    g.grad_H_sq.assign(n, 0.0);
    g.lap_H.assign(n, 0.0);
    g.grad_A.nabla_u_huu.assign(n, 0.0);
    g.grad_A.nabla_u_hpp.assign(n, 0.0);
    g.grad_A.nabla_phi_hup.assign(n, 0.0);
    g.grad_A.norm_sq.assign(n, 0.0);
    g.tr_A3.assign(n, 2.0 / (R * R * R));
    g.h_gradH_gradH.assign(n, 0.0);
    g.cross_AdA_dH.assign(n, 0.0);
    g.convex = true;

    for (size_t j = 0; j < n; ++j) {
        double u = du * j;
        double s = std::sin(u), c = std::cos(u);
        g.grid.r[j] = R * s;
        g.z[j] = R * c;
        g.r_u[j] = R * c;
        g.z_u[j] = -R * s;
        g.r_uu[j] = -R * s;
        g.z_uu[j] = -R * c;
        g.nu_r[j] = s;
        g.nu_z[j] = c;
        g.h_pp[j] = R * s * s;
        g.grid.mu_cell[j] = kTwoPi * du * R * R * s;
    }
    g.grid.r[0] = g.grid.r[N] = 0.0;
    g.grid.mu_cell[0] = g.grid.mu_cell[N] = kTwoPi * R * R * du * du / 8.0;
    return g;
}

ProfileSurface perturbed_spheroid_profile(double a, double c, double amplitude, int N) {
    ProfileSurface s;
    s.r.resize(N + 1);
    s.z.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
        double u = kPi * j / N;
        double cu = std::cos(u);
        // even perturbation in cos u keeps the poles smooth
        s.r[j] = a * std::sin(u) * (1.0 + amplitude * (2.0 * cu * cu - 1.0));
        s.z[j] = c * cu + amplitude * (cu * cu * cu - cu);
    }
    s.r[0] = s.r[N] = 0.0;
    return s;
}

namespace {

StateTriple make_triple(const IdentitySpec&, StateSource src, int k, int N, double dt) {
    switch (src) {
        case StateSource::analytic_sphere:
            return triple_from_analytic_sphere(1.0, k, 0.005, dt, N);
        case StateSource::sphere:
            return triple_from_euler_regenerated(sphere_profile(1.0, N), k, dt);
        case StateSource::spheroid:
            return triple_from_euler_regenerated(spheroid_profile(1.0, 2.0, N), k, dt);
        case StateSource::perturbed_spheroid:
            return triple_from_euler_regenerated(perturbed_spheroid_profile(1.0, 2.0, 0.01, N), k,
                                                 dt);
    }
    throw std::runtime_error("bad state source");
}

double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double m = static_cast<double>(logx.size());
    for (size_t i = 0; i < logx.size(); ++i) {
        sx += logx[i];
        sy += logy[i];
        sxx += logx[i] * logx[i];
        sxy += logx[i] * logy[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace

RefinementResult refinement_study(const IdentitySpec& spec, StateSource source,
                                  const std::vector<RefinementLevel>& levels, int k,
                                  const std::optional<IdentityTweak>& tweak) {
    if (levels.size() < 3) throw std::runtime_error("refinement study needs >= 3 levels");
    std::vector<int> Ns;
    std::vector<double> dts;
    for (const auto& l : levels) {
        Ns.push_back(l.N);
        dts.push_back(l.dt);
    }
    std::sort(Ns.begin(), Ns.end());
    Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
    std::sort(dts.begin(), dts.end());
    dts.erase(std::unique(dts.begin(), dts.end()), dts.end());

    RefinementResult out;
    const double dt_small = dts.front();
    const int N_big = Ns.back();

    auto eval = [&](int N, double dt) {
        StateTriple tr = make_triple(spec, source, k, N, dt);
        ResidualReport rep = evaluate_identity(spec, tr, k, tweak);
        double mr = std::max(rep.interior_max, rep.pole_max);
        return RefinementRow{N, dt, mr, rep.l2};
    };

    double floor_scale = 0.0;
    for (int N : Ns) {
        auto row = eval(N, dt_small);
        out.h_rows.push_back(row);
    }
    for (double dt : dts) {
        auto row = eval(N_big, dt);
        out.t_rows.push_back(row);
    }
    {
        StateTriple tr = make_triple(spec, source, k, N_big, dt_small);
        ResidualReport rep = evaluate_identity(spec, tr, k, tweak);
        floor_scale = rep.rhs_scale;
        out.max_residual = std::max(rep.interior_max, rep.pole_max);
        out.l2_residual = rep.l2;
    }

    const double floor_abs = 1e-8 * std::max(floor_scale, 1e-30);
    auto all_floor = [&](const std::vector<RefinementRow>& rows) {
        for (const auto& r : rows)
            if (r.max_residual > floor_abs) return false;
        return true;
    };
    out.h_floor = all_floor(out.h_rows);
    out.t_floor = all_floor(out.t_rows);

    if (!out.h_floor) {
        std::vector<double> lx, ly;
        for (const auto& r : out.h_rows) {
            lx.push_back(std::log(kPi / r.N));
            ly.push_back(std::log(std::max(r.max_residual, 1e-300)));
        }
        out.p_h = fit_slope(lx, ly);
    }
    if (!out.t_floor) {
        std::vector<double> lx, ly;
        for (const auto& r : out.t_rows) {
            lx.push_back(std::log(r.dt));
            ly.push_back(std::log(std::max(r.max_residual, 1e-300)));
        }
        out.p_t = fit_slope(lx, ly);
    }

    bool h_ok = out.h_floor || out.p_h >= 1.8;
    bool t_ok = out.t_floor || out.p_t >= 1.8;
    out.pass = h_ok && t_ok;
    out.verdict = (out.h_floor && out.t_floor) ? "floor reached" : (out.pass ? "pass" : "fail");
    return out;
}

} // namespace hkflow
