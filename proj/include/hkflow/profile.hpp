#pragma once
#include <string>
#include <vector>

// Discrete closed convex axisymmetric surface in R^3, given by a profile
// curve u -> (r(u), z(u)) sampled at u_j = j*pi/N, j = 0..N, with r_0 = r_N = 0
// (poles on the z-axis). The surface of revolution is F(u, phi) =
// (r cos phi, r sin phi, z); node j stays the same material point under the
// flow displacement.

namespace hkflow {

struct ProfileSurface {
    std::vector<double> r, z;  // N+1 samples each

    int segments() const { return static_cast<int>(r.size()) - 1; }  // N
    double du() const;

    // r_j > 0 strictly between the poles, r at poles exactly 0, finite values.
    // Throws with the offending node index on violation.
    void validate() const;
};

ProfileSurface sphere_profile(double R, int N);
// Prolate/oblate spheroid (a sin u, c cos u) rotated about z.
ProfileSurface spheroid_profile(double a, double c, int N);

// Plain-text two-column "r z" format, header "# hkflow-profile v1 N=<int>".
// Doubles are written as shortest round-trip decimals; read/write is bit-exact.
std::string write_profile(const ProfileSurface& s);
ProfileSurface read_profile(const std::string& text);
void write_profile_file(const ProfileSurface& s, const std::string& path);
ProfileSurface read_profile_file(const std::string& path);

// True if the profile polyline is simple (no two non-adjacent segments
// intersect). O(N^2) pairwise test; callers with a convexity certificate can
// skip it (kappa_2 > 0 forces z strictly monotone, hence a simple profile).
bool profile_is_simple(const ProfileSurface& s);

// max/min spacing of consecutive nodes along the profile polyline.
double spacing_ratio(const ProfileSurface& s);

// Polyline length of the profile.
double profile_length(const ProfileSurface& s);

// Redistributes the nodes to uniform arc length along a not-a-knot cubic
// spline through the current nodes, preserving the poles and the total
// profile length to 1e-8 relative. Throws "self-intersecting profile" if the
// resampled curve is not simple.
ProfileSurface resample(const ProfileSurface& s);

} // namespace hkflow
