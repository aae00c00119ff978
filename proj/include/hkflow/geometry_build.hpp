#pragma once
#include <vector>

#include "hkflow/geometry.hpp"
#include "hkflow/profile.hpp"

namespace hkflow {

// Everything derived from a ProfileSurface in one pass: profile derivatives,
// metric context, curvatures, and the curvature-gradient fields the evolution
// identities need. All arrays are per-node (length N+1).
struct GeometryFields {
    AxisymGrid grid;                           // grid.r holds the profile r samples
    std::vector<double> z;                     // profile z samples
    std::vector<double> r_u, z_u, r_uu, z_uu;  // profile derivatives in u
    std::vector<double> w_u;                   // dw/du
    std::vector<double> h_uu, h_pp;            // second fundamental form
    std::vector<double> kappa1, kappa2;        // meridian / parallel curvature
    std::vector<double> H, A2;                 // mean curvature, |A|^2
    std::vector<double> nu_r, nu_z;            // outer unit normal in the (r,z) plane
    std::vector<double> grad_H_sq;             // |grad H|^2
    std::vector<double> lap_H;                 // Delta H
    GradA grad_A;                              // nabla A components and |nabla A|^2
    std::vector<double> tr_A3;                 // kappa1^3 + kappa2^3
    std::vector<double> h_gradH_gradH;         // h^{ij} d_iH d_jH = kappa1 |grad H|^2
    std::vector<double> cross_AdA_dH;          // g^{ia} h^{jk} (nabla_i h_jk)(d_a H)
    bool convex = false;                       // kappa1 > 0 and kappa2 > 0 everywhere
    bool pole_regular = true;                  // |z'(pole)| small relative to w

    double H_min() const;
    double H_max() const;
    double A2_max() const;
    double area() const { return grid.area(); }
    // Enclosed volume via the divergence theorem, V = (1/3) int <F, nu> dmu.
    double volume() const;
};

struct GeometryOptions {
    double pole_tol = 1e-2;          // |z'(pole)|/w threshold for "pole regularity violated"
    bool check_pole_regularity = true;
};

// Builds all geometric fields by second-order stencils in u. Throws
// "pole regularity violated" when the profile fails to meet the axis
// perpendicularly; nonconvexity only clears the convex flag.
GeometryFields build_geometry(const ProfileSurface& s, const GeometryOptions& opt = {});

// Buffer-reusing variant for the stepping loop.
struct GeometryScratch {
    std::vector<double> flux, d_huu, d_hpp, dH;
};
void build_geometry_into(const ProfileSurface& s, const GeometryOptions& opt, GeometryScratch& sc,
                         GeometryFields& out);

// Flow velocity -H^k nu per node in the (r,z) plane (phi-component vanishes
// by symmetry; poles move only along z). Throws "H nonpositive" listing the
// offending nodes when min H <= 0.
struct FlowVelocity {
    std::vector<double> vr, vz;
};
FlowVelocity flow_displacement(const ProfileSurface& s, const GeometryFields& g, int k);

// s + dt * velocity, poles pinned to the axis.
ProfileSurface displaced(const ProfileSurface& s, const FlowVelocity& v, double dt);

} // namespace hkflow
