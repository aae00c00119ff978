#include "hkflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hkflow/text_io.hpp"

namespace hkflow {

namespace {
const double kPi = std::acos(-1.0);
}

double ProfileSurface::du() const { return kPi / segments(); }

void ProfileSurface::validate() const {
    if (r.size() != z.size() || r.size() < 65)
        throw std::runtime_error("profile needs at least N=64 segments with matching r/z");
    int N = segments();
    if (r[0] != 0.0 || r[N] != 0.0) throw std::runtime_error("profile poles must have r = 0 exactly");
    for (int j = 0; j <= N; ++j) {
        if (!std::isfinite(r[j]) || !std::isfinite(z[j]))
            throw std::runtime_error("non-finite profile node " + std::to_string(j));
        if (j > 0 && j < N && !(r[j] > 0.0))
            throw std::runtime_error("profile r <= 0 at interior node " + std::to_string(j));
    }
}

ProfileSurface sphere_profile(double R, int N) {
    ProfileSurface s;
    s.r.resize(N + 1);
    s.z.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
        double u = kPi * j / N;
        s.r[j] = R * std::sin(u);
        s.z[j] = R * std::cos(u);
    }
    s.r[0] = s.r[N] = 0.0;
    return s;
}

ProfileSurface spheroid_profile(double a, double c, int N) {
    ProfileSurface s;
    s.r.resize(N + 1);
    s.z.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
        double u = kPi * j / N;
        s.r[j] = a * std::sin(u);
        s.z[j] = c * std::cos(u);
    }
    s.r[0] = s.r[N] = 0.0;
    return s;
}

std::string write_profile(const ProfileSurface& s) {
    std::string out = "# hkflow-profile v1 N=" + std::to_string(s.segments()) + "\n";
    for (size_t j = 0; j < s.r.size(); ++j)
        out += fmt_double(s.r[j]) + " " + fmt_double(s.z[j]) + "\n";
    return out;
}

ProfileSurface read_profile(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty profile");
    int N = -1;
    if (std::sscanf(header.c_str(), "# hkflow-profile v1 N=%d", &N) != 1 || N < 1)
        throw std::runtime_error("bad profile header: " + header);
    ProfileSurface s;
    s.r.reserve(N + 1);
    s.z.reserve(N + 1);
    double r, z;
    while (in >> r >> z) {
        s.r.push_back(r);
        s.z.push_back(z);
    }
    if (static_cast<int>(s.r.size()) != N + 1)
        throw std::runtime_error("profile node count mismatch: header N=" + std::to_string(N) +
                                 ", got " + std::to_string(s.r.size()) + " rows");
    return s;
}

void write_profile_file(const ProfileSurface& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << write_profile(s);
}

ProfileSurface read_profile_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return read_profile(ss.str());
}

namespace {

// Proper intersection test for segments (p1,p2) and (p3,p4) in the (r,z) plane.
double orient(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

bool segments_intersect(double ax, double ay, double bx, double by,
                        double cx, double cy, double dx, double dy) {
    double d1 = orient(cx, cy, dx, dy, ax, ay);
    double d2 = orient(cx, cy, dx, dy, bx, by);
    double d3 = orient(ax, ay, bx, by, cx, cy);
    double d4 = orient(ax, ay, bx, by, dx, dy);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

} // namespace

bool profile_is_simple(const ProfileSurface& s) {
    int N = s.segments();
    for (int i = 0; i < N; ++i)
        for (int j = i + 2; j < N; ++j) {
            if (segments_intersect(s.r[i], s.z[i], s.r[i + 1], s.z[i + 1],
                                   s.r[j], s.z[j], s.r[j + 1], s.z[j + 1]))
                return false;
        }
    return true;
}

double spacing_ratio(const ProfileSurface& s) {
    int N = s.segments();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int j = 0; j < N; ++j) {
        double dr = s.r[j + 1] - s.r[j], dz = s.z[j + 1] - s.z[j];
        double len2 = dr * dr + dz * dz;
        lo = std::min(lo, len2);
        hi = std::max(hi, len2);
    }
    return std::sqrt(hi / lo);
}

double profile_length(const ProfileSurface& s) {
    int N = s.segments();
    double L = 0.0;
    for (int j = 0; j < N; ++j) L += std::hypot(s.r[j + 1] - s.r[j], s.z[j + 1] - s.z[j]);
    return L;
}

namespace {

// Not-a-knot cubic spline through (t_i, y_i); evaluates value and derivative.
struct CubicSpline {
    std::vector<double> t, a, b, c, d;  // y = a + b*dt + c*dt^2 + d*dt^3 on [t_i, t_i+1]

    static CubicSpline fit(const std::vector<double>& t, const std::vector<double>& y) {
        int n = static_cast<int>(t.size());
        std::vector<double> h(n - 1);
        for (int i = 0; i < n - 1; ++i) h[i] = t[i + 1] - t[i];

        // Second derivatives m_i. Not-a-knot makes the third derivative
        // continuous at t_1 and t_{n-2}:
        //   m_0 = (1 + h0/h1) m_1 - (h0/h1) m_2   (mirror at the right end)
        // Substitute into the interior equations and solve the reduced
        // tridiagonal system for m_1..m_{n-2}.
        std::vector<double> m(n, 0.0);
        int nn = n - 2;
        std::vector<double> sb(nn, 0.0), dg(nn, 0.0), sp_(nn, 0.0), rh(nn, 0.0);
        for (int i = 1; i <= n - 2; ++i) {
            int k = i - 1;
            sb[k] = h[i - 1];
            dg[k] = 2.0 * (h[i - 1] + h[i]);
            sp_[k] = h[i];
            rh[k] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        double r01 = 1.0 + h[0] / h[1], r02 = -h[0] / h[1];
        dg[0] += sb[0] * r01;
        sp_[0] += sb[0] * r02;
        sb[0] = 0.0;
        double rn1 = 1.0 + h[n - 2] / h[n - 3], rn2 = -h[n - 2] / h[n - 3];
        dg[nn - 1] += sp_[nn - 1] * rn1;
        sb[nn - 1] += sp_[nn - 1] * rn2;
        sp_[nn - 1] = 0.0;
        for (int i = 1; i < nn; ++i) {
            double f = sb[i] / dg[i - 1];
            dg[i] -= f * sp_[i - 1];
            rh[i] -= f * rh[i - 1];
        }
        std::vector<double> mm(nn);
        mm[nn - 1] = rh[nn - 1] / dg[nn - 1];
        for (int i = nn - 2; i >= 0; --i) mm[i] = (rh[i] - sp_[i] * mm[i + 1]) / dg[i];
        for (int i = 1; i <= n - 2; ++i) m[i] = mm[i - 1];
        m[0] = r01 * m[1] + r02 * m[2];
        m[n - 1] = rn1 * m[n - 2] + rn2 * m[n - 3];

        CubicSpline sp;
        sp.t = t;
        sp.a.resize(n - 1);
        sp.b.resize(n - 1);
        sp.c.resize(n - 1);
        sp.d.resize(n - 1);
        for (int i = 0; i < n - 1; ++i) {
            sp.a[i] = y[i];
            sp.c[i] = m[i] / 2.0;
            sp.d[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
            sp.b[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
        }
        return sp;
    }

    int find(double x) const {
        int lo = 0, hi = static_cast<int>(t.size()) - 2;
        while (lo < hi) {
            int mid = (lo + hi + 1) / 2;
            if (t[mid] <= x) lo = mid; else hi = mid - 1;
        }
        return lo;
    }

    double value(double x) const {
        int i = find(x);
        double dt = x - t[i];
        return a[i] + dt * (b[i] + dt * (c[i] + dt * d[i]));
    }

    double deriv(double x) const {
        int i = find(x);
        double dt = x - t[i];
        return b[i] + dt * (2.0 * c[i] + 3.0 * dt * d[i]);
    }
};

// 5-point Gauss-Legendre nodes/weights on [0,1].
const double kGx[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                       0.76923465505284155, 0.95308992296933200};
const double kGw[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                       0.23931433524968324, 0.11846344252809454};

double seg_speed(const CubicSpline& sr, const CubicSpline& sz, double x) {
    return std::hypot(sr.deriv(x), sz.deriv(x));
}

double seg_arclen(const CubicSpline& sr, const CubicSpline& sz, double x0, double x1) {
    double L = 0.0;
    for (int q = 0; q < 5; ++q) L += kGw[q] * seg_speed(sr, sz, x0 + (x1 - x0) * kGx[q]);
    return L * (x1 - x0);
}

} // namespace

ProfileSurface resample(const ProfileSurface& s) {
    s.validate();
    int N = s.segments();

    // chord-length parameter
    std::vector<double> tau(N + 1, 0.0);
    for (int j = 1; j <= N; ++j)
        tau[j] = tau[j - 1] + std::hypot(s.r[j] - s.r[j - 1], s.z[j] - s.z[j - 1]);

    CubicSpline sr = CubicSpline::fit(tau, s.r);
    CubicSpline sz = CubicSpline::fit(tau, s.z);

    // cumulative spline arc length per knot interval
    std::vector<double> S(N + 1, 0.0);
    for (int j = 0; j < N; ++j) S[j + 1] = S[j] + seg_arclen(sr, sz, tau[j], tau[j + 1]);
    double total = S[N];

    ProfileSurface out;
    out.r.resize(N + 1);
    out.z.resize(N + 1);
    out.r[0] = 0.0;
    out.z[0] = s.z[0];
    out.r[N] = 0.0;
    out.z[N] = s.z[N];

    int seg = 0;
    for (int i = 1; i < N; ++i) {
        double target = total * i / N;
        while (seg < N - 1 && S[seg + 1] < target) ++seg;
        // Newton on F(x) = S[seg] + arclen(tau_seg, x) - target, bisection-guarded
        double lo = tau[seg], hi = tau[seg + 1];
        double x = lo + (hi - lo) * (target - S[seg]) / std::max(S[seg + 1] - S[seg], 1e-300);
        for (int it = 0; it < 60; ++it) {
            double Fx = S[seg] + seg_arclen(sr, sz, tau[seg], x) - target;
            if (Fx > 0) hi = x; else lo = x;
            double sp = seg_speed(sr, sz, x);
            double step = Fx / std::max(sp, 1e-300);
            double xn = x - step;
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (std::fabs(xn - x) < 1e-15 * std::max(1.0, tau[N])) { x = xn; break; }
            x = xn;
        }
        out.r[i] = sr.value(x);
        out.z[i] = sz.value(x);
    }

    if (!profile_is_simple(out)) throw std::runtime_error("self-intersecting profile after resample");
    return out;
}

} // namespace hkflow
